#include "cli/commands.hpp"

int main(int argc, char** argv) { return sticky::cli::run(argc, argv); }

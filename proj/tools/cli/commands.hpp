#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace sticky::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kNumericalAbort = 3,
  kIoError = 4,
};

struct Options {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int run_simulate(const Options& o);
int run_predict(const Options& o);
/// Reads the record in o.out and writes verification.json next to it.
int run_verify(const Options& o);
int run_converge(const Options& o);

/// Command-line entry point.
int run(int argc, char** argv);

}  // namespace sticky::cli

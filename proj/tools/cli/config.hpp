#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <sticky/dynamics.hpp>
#include <sticky/ensemble.hpp>
#include <sticky/kernel.hpp>

namespace sticky::cli {

/// Malformed or inconsistent scenario configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system failure (exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerSpec {
  std::string profile;  // linear | gaussian | custom-table
  std::size_t N = 0;
  nlohmann::json params;
};

struct Scenario {
  nlohmann::json config;  // effective config, seed applied
  Kernel kernel = Kernel::zero();
  std::optional<SamplerSpec> sampler;
  std::vector<double> masses;
  std::vector<double> positions;
  std::vector<double> velocities;
  double t_end = 1.0;
  double snapshot_dt = 0.1;
  Tolerances tol;
  std::uint64_t seed = 0;
  std::vector<std::size_t> converge_Ns;
  std::vector<double> converge_t_grid;
  std::vector<std::string> warnings;

  Ensemble ensemble() const;
};

Kernel parse_kernel(const nlohmann::json& j);
nlohmann::json kernel_to_json(const Kernel& k);

/// Samples N equal-mass cells of the profile at the cell midpoints.
void sample_profile(const SamplerSpec& spec, std::size_t N, std::uint64_t seed, std::vector<double>& masses,
                    std::vector<double>& positions, std::vector<double>& velocities);

Scenario parse_scenario(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace sticky::cli

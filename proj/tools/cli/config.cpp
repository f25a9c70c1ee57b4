#include "cli/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <sticky/error.hpp>

namespace sticky::cli {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(fmt::format("missing field '{}'", key));
  }
  if (!j[key].is_number()) throw ConfigError(fmt::format("field '{}' must be a number", key));
  return j[key].get<double>();
}

std::vector<double> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw ConfigError(fmt::format("field '{}' must be an array", key));
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ConfigError(fmt::format("field '{}' must contain numbers", key));
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Kernel parse_kernel(const json& j) {
  const json spec = j.is_string() ? json{{"type", j}} : j;
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string()) {
    throw ConfigError("kernel must be a name or an object with a 'type' field");
  }
  const auto type = spec["type"].get<std::string>();
  try {
    if (type == "zero") return Kernel::zero();
    if (type == "all_to_all") return Kernel::all_to_all(number(spec, "K", 1.0));
    if (type == "power_law") return Kernel::power_law(number(spec, "c", 1.0), number(spec, "beta", 0.5), number(spec, "R", 1.0));
    if (type == "exponential") return Kernel::exponential(number(spec, "a", 1.0));
    if (type == "compact_bump") return Kernel::compact_bump(number(spec, "radius", 1.0), number(spec, "height", 1.0));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError(fmt::format("unknown kernel type '{}'", type));
}

json kernel_to_json(const Kernel& k) {
  switch (k.family()) {
    case KernelFamily::Zero: return {{"type", "zero"}};
    case KernelFamily::AllToAll: return {{"type", "all_to_all"}, {"K", k.K()}};
    case KernelFamily::PowerLaw: return {{"type", "power_law"}, {"c", k.c()}, {"beta", k.beta()}, {"R", k.R()}};
    case KernelFamily::Exponential: return {{"type", "exponential"}, {"a", k.a()}};
    case KernelFamily::CompactBump: return {{"type", "compact_bump"}, {"radius", k.radius()}, {"height", k.height()}};
  }
  return {};
}

void sample_profile(const SamplerSpec& spec, std::size_t N, std::uint64_t seed, std::vector<double>& masses,
                    std::vector<double>& positions, std::vector<double>& velocities) {
  if (N == 0) throw ConfigError("sampler needs N >= 1");
  masses.assign(N, 1.0 / static_cast<double>(N));
  positions.resize(N);
  velocities.resize(N);
  const json& p = spec.params;
  auto mid = [N](std::size_t k) { return (static_cast<double>(k) + 0.5) / static_cast<double>(N); };

  if (spec.profile == "linear") {
    const double x0 = number(p, "x0", 0.0), x1 = number(p, "x1", 1.0);
    const double v0 = number(p, "v0", 0.5), v1 = number(p, "v1", -0.5);
    for (std::size_t k = 0; k < N; ++k) {
      positions[k] = x0 + (x1 - x0) * mid(k);
      velocities[k] = v0 + (v1 - v0) * mid(k);
    }
  } else if (spec.profile == "gaussian") {
    const double mean = number(p, "mean", 0.0), sd = number(p, "std", 1.0);
    const double vmean = number(p, "velocity_mean", 0.0), vsd = number(p, "velocity_std", 1.0);
    if (!(sd > 0.0) || !(vsd >= 0.0)) throw ConfigError("gaussian sampler needs std > 0 and velocity_std >= 0");
    const boost::math::normal_distribution<double> nd(mean, sd);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> vel(vmean, vsd);
    for (std::size_t k = 0; k < N; ++k) {
      positions[k] = boost::math::quantile(nd, mid(k));
      velocities[k] = vsd > 0.0 ? vel(rng) : vmean;
    }
  } else if (spec.profile == "custom-table") {
    if (!p.contains("table") || !p["table"].is_array() || p["table"].empty()) {
      throw ConfigError("custom-table sampler needs a nonempty 'table' of [m, x, v] rows");
    }
    std::vector<std::array<double, 3>> rows;
    for (const auto& r : p["table"]) {
      if (!r.is_array() || r.size() != 3) throw ConfigError("custom-table rows must be [m, x, v]");
      rows.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>()});
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!(rows[i][0] > rows[i - 1][0])) throw ConfigError("custom-table mass column must increase");
    }
    for (std::size_t k = 0; k < N; ++k) {
      const double m = mid(k);
      std::size_t i = 0;
      while (i + 1 < rows.size() && rows[i + 1][0] <= m) ++i;
      if (i + 1 == rows.size() || m <= rows[0][0]) {
        const auto& r = m <= rows[0][0] ? rows.front() : rows.back();
        positions[k] = r[1];
        velocities[k] = r[2];
      } else {
        const double w = (m - rows[i][0]) / (rows[i + 1][0] - rows[i][0]);
        positions[k] = rows[i][1] + w * (rows[i + 1][1] - rows[i][1]);
        velocities[k] = rows[i][2] + w * (rows[i + 1][2] - rows[i][2]);
      }
    }
    if (!std::is_sorted(positions.begin(), positions.end())) {
      throw ConfigError("custom-table positions must be nondecreasing in m");
    }
  } else {
    throw ConfigError(fmt::format("unknown sampler profile '{}'", spec.profile));
  }
}

Scenario parse_scenario(const json& j, std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Scenario s;
  s.config = j;
  if (!j.contains("kernel")) throw ConfigError("missing field 'kernel'");
  s.kernel = parse_kernel(j["kernel"]);

  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sampler") && j["sampler"].contains("seed")) s.seed = j["sampler"]["seed"].get<std::uint64_t>();
  if (seed_override) s.seed = *seed_override;
  s.config["seed"] = s.seed;
  if (s.config.contains("sampler") && s.config["sampler"].is_object()) s.config["sampler"]["seed"] = s.seed;

  s.t_end = number(j, "t_end", 1.0);
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) throw ConfigError("t_end must be positive");
  s.snapshot_dt = number(j, "snapshot_dt", s.t_end / 10.0);
  if (!(s.snapshot_dt > 0.0)) throw ConfigError("snapshot_dt must be positive");

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    s.tol.atol = number(t, "atol", s.tol.atol);
    s.tol.rtol = number(t, "rtol", s.tol.rtol);
    s.tol.event = number(t, "event", s.tol.event);
    s.tol.contact = number(t, "contact", s.tol.contact);
    if (t.contains("max_steps")) s.tol.max_steps = t["max_steps"].get<std::size_t>();
    if (!(s.tol.atol > 0.0) || !(s.tol.rtol >= 0.0)) throw ConfigError("tolerances must be positive");
  }

  const bool has_particles = j.contains("particles");
  const bool has_sampler = j.contains("sampler");
  if (has_particles == has_sampler) throw ConfigError("exactly one of 'particles' and 'sampler' is required");
  if (has_particles) {
    const json& p = j["particles"];
    s.masses = number_array(p, "masses");
    s.positions = number_array(p, "positions");
    s.velocities = number_array(p, "velocities");
    if (s.masses.empty()) throw ConfigError("no particles");
    if (s.masses.size() != s.positions.size() || s.masses.size() != s.velocities.size()) {
      throw ConfigError("masses, positions and velocities differ in length");
    }
  } else {
    const json& p = j["sampler"];
    SamplerSpec spec;
    spec.profile = p.value("profile", std::string("linear"));
    if (!p.contains("N") || !p["N"].is_number_integer() || p["N"].get<long long>() <= 0) {
      throw ConfigError("sampler needs a positive integer N");
    }
    spec.N = p["N"].get<std::size_t>();
    spec.params = p;
    sample_profile(spec, spec.N, s.seed, s.masses, s.positions, s.velocities);
    s.sampler = spec;
  }

  double total = 0.0;
  for (double m : s.masses) {
    if (!(m > 0.0)) throw ConfigError("masses must be positive");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    s.warnings.push_back(fmt::format("masses sum to {:.17g}; normalised to 1", total));
    for (double& m : s.masses) m /= total;
  }

  if (j.contains("converge")) {
    const json& c = j["converge"];
    if (!c.contains("Ns") || !c["Ns"].is_array() || c["Ns"].empty()) throw ConfigError("converge.Ns must be a nonempty array");
    std::set<std::size_t> seen;
    for (const auto& n : c["Ns"]) {
      if (!n.is_number_integer() || n.get<long long>() <= 0) throw ConfigError("converge.Ns must hold positive integers");
      const auto v = n.get<std::size_t>();
      if (!seen.insert(v).second) throw ConfigError(fmt::format("converge.Ns repeats N={}", v));
      s.converge_Ns.push_back(v);
    }
    s.converge_t_grid = c.contains("t_grid") ? number_array(c, "t_grid") : std::vector<double>{s.t_end};
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  try {
    return parse_scenario(j, seed_override);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
}

Ensemble Scenario::ensemble() const {
  try {
    return Ensemble::create(masses, positions, velocities, kernel);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace sticky::cli

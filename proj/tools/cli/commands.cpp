#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <sticky/cluster_predictor.hpp>
#include <sticky/dynamics.hpp>
#include <sticky/error.hpp>
#include <sticky/verify.hpp>

#include "cli/config.hpp"
#include "cli/record_io.hpp"

#ifndef STICKY_VERSION
#define STICKY_VERSION "unknown"
#endif

namespace sticky::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void prepare_dir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw IoError(fmt::format("cannot write '{}'", p.string()));
  body(os);
  os.flush();
  if (!os) throw IoError(fmt::format("write to '{}' failed", p.string()));
}

void log(bool quiet, const std::string& msg) {
  if (!quiet) std::cerr << msg << '\n';
}

std::string compiler_id() {
#if defined(__clang__)
  return fmt::format("clang {}", __clang_version__);
#elif defined(__GNUC__)
  return fmt::format("gcc {}", __VERSION__);
#else
  return "unknown";
#endif
}

// Maps library and CLI exceptions to exit codes.
int guarded(bool quiet, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log(quiet, fmt::format("config error: {}", e.what()));
    return kConfigError;
  } catch (const IoError& e) {
    log(quiet, fmt::format("i/o error: {}", e.what()));
    return kIoError;
  } catch (const InvalidArgument& e) {
    log(quiet, fmt::format("config error: {}", e.what()));
    return kConfigError;
  } catch (const MalformedPartition& e) {
    log(quiet, fmt::format("config error: {}", e.what()));
    return kConfigError;
  } catch (const std::exception& e) {
    log(quiet, fmt::format("numerical abort: {}", e.what()));
    return kNumericalAbort;
  }
}

Scenario load(const Options& o) {
  auto s = load_scenario(o.config, o.seed);
  for (const auto& w : s.warnings) log(o.quiet, fmt::format("warning: {}", w));
  return s;
}

// Left-endpoint error bound from the recorded increments, per snapshot.
// Each interval contributes its length times the change of the mean rate
// across neighbouring intervals.
double projection_tolerance(const SimulationRecord& rec, std::size_t k) {
  const auto m = rec.snapshots.front().original_masses();
  const std::size_t n = m.size();
  const std::size_t intervals = rec.times.size() - 1;
  if (k == 0 || intervals == 0) return 1e-9;
  std::vector<std::vector<double>> rate(intervals, std::vector<double>(n));
  for (std::size_t j = 0; j < intervals; ++j) {
    const double dt = rec.times[j + 1] - rec.times[j];
    for (std::size_t i = 0; i < n; ++i) rate[j][i] = (rec.phi_integral[j + 1][i] - rec.phi_integral[j][i]) / dt;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dt = rec.times[j + 1] - rec.times[j];
      double osc = intervals == 1 ? 2.0 * std::abs(rate[j][i]) : 0.0;
      if (j + 1 < intervals) osc = std::max(osc, std::abs(rate[j + 1][i] - rate[j][i]));
      if (j > 0) osc = std::max(osc, std::abs(rate[j][i] - rate[j - 1][i]));
      e += dt * osc;
    }
    s += m[i] * e * e;
  }
  return 2.0 * std::sqrt(s) + 1e-7 * (1.0 + rec.times[k]);
}

json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"tolerance", c.tolerance}};
}

}  // namespace

int run_simulate(const Options& o) {
  return guarded(o.quiet, [&] {
    const Scenario s = load(o);
    const Ensemble e0 = s.ensemble();
    prepare_dir(o.out);
    const auto start = std::chrono::steady_clock::now();
    const SimulationRecord rec = simulate(e0, s.kernel, s.t_end, s.snapshot_dt, s.tol);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_file(o.out / "snapshots.csv", [&](std::ostream& os) { write_snapshots_csv(os, rec); });
    write_file(o.out / "events.csv", [&](std::ostream& os) { write_events_csv(os, rec); });
    write_file(o.out / "accumulators.csv", [&](std::ostream& os) { write_accumulators_csv(os, rec); });
    json meta{{"config", s.config},
              {"seed", s.seed},
              {"version", STICKY_VERSION},
              {"compiler", compiler_id()},
              {"wall_time_seconds", wall},
              {"kernel", kernel_to_json(s.kernel)},
              {"kernel_name", s.kernel.name()},
              {"t_end", s.t_end},
              {"snapshot_dt", s.snapshot_dt},
              {"steps", rec.steps},
              {"events", rec.events.size()},
              {"initial", initial_to_json(e0)}};
    write_file(o.out / "metadata.json", [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
    log(o.quiet, fmt::format("simulated {} particles to t={} ({} merges, {} steps, {:.3f}s)", e0.original_size(),
                             s.t_end, rec.events.size(), rec.steps, wall));
    return static_cast<int>(kOk);
  });
}

int run_predict(const Options& o) {
  return guarded(o.quiet, [&] {
    const Scenario s = load(o);
    const Ensemble e0 = s.ensemble();
    prepare_dir(o.out);
    const FluxAnalysis fa = analyze(e0);
    const auto f = forecast(fa, s.kernel);
    write_file(o.out / "flux.csv", [&](std::ostream& os) { write_flux_csv(os, fa); });
    write_file(o.out / "regions.csv", [&](std::ostream& os) { write_regions_csv(os, fa); });
    write_file(o.out / "subgroups.csv", [&](std::ostream& os) { write_subgroups_csv(os, f); });
    log(o.quiet, fmt::format("{} regions, {} subgroups", fa.regions.size(), f.size()));
    return static_cast<int>(kOk);
  });
}

int run_verify(const Options& o) {
  return guarded(o.quiet, [&] {
    if (o.out.empty() || !fs::is_directory(o.out)) throw ConfigError("verify needs an existing record directory");
    const LoadedRecord lr = read_record(o.out);
    const SimulationRecord& rec = lr.record;
    const Ensemble& first = rec.snapshots.front();
    const auto psi = first.original_natural_velocities();
    const auto m = first.original_masses();
    const double tol = default_tolerance(psi);

    std::vector<CheckResult> checks;
    auto fold = [&](const std::string& name, double t) {
      checks.push_back({name, true, -std::numeric_limits<double>::infinity(), t});
      return checks.size() - 1;
    };
    auto update = [&](std::size_t idx, const CheckResult& c) {
      checks[idx].residual = std::max(checks[idx].residual, c.residual);
      checks[idx].pass = checks[idx].pass && c.pass;
    };

    const auto bary = fold("barycentric", tol);
    const auto rh = fold("rankine_hugoniot", tol);
    for (const auto& ev : rec.events) {
      update(bary, check_barycentric(ev, psi, m, tol));
      update(rh, check_rankine_hugoniot(ev, psi, m, tol));
    }
    const auto ol = fold("oleinik_entropy", tol);
    const auto proj = fold("projection_formula", 1.0);
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
      update(ol, check_oleinik_entropy(rec.snapshots[k], tol));
      const double ptol = projection_tolerance(rec, k);
      const double err = projection_formula_error(rec, k);
      update(proj, {"", err <= ptol, err / ptol, 1.0});
    }
    checks.push_back(check_stickiness(rec));

    double vmax = 0.0;
    for (double v : first.velocities()) vmax = std::max(vmax, std::abs(v));
    const double p0 = first.momentum();
    const double m0 = first.total_mass();
    const auto mom = fold("momentum", 1e-10 * (1.0 + vmax));
    const auto mass = fold("mass", 1e-12);
    for (const auto& s : rec.snapshots) {
      const double dp = std::abs(s.momentum() - p0);
      const double dm = std::abs(s.total_mass() - m0);
      update(mom, {"", dp <= checks[mom].tolerance, dp, 0.0});
      update(mass, {"", dm <= checks[mass].tolerance, dm, 0.0});
    }
    for (auto& c : checks) {
      if (std::isinf(c.residual)) c.residual = 0.0;
    }

    bool all = true;
    json report{{"checks", json::array()}};
    for (const auto& c : checks) {
      report["checks"].push_back(check_json(c));
      all = all && c.pass;
      if (!c.pass) log(o.quiet, fmt::format("FAIL {} residual={:.3g} tolerance={:.3g}", c.name, c.residual, c.tolerance));
    }
    report["pass"] = all;
    write_file(o.out / "verification.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    log(o.quiet, all ? "all checks passed" : "verification failed");
    return static_cast<int>(all ? kOk : kCheckFailed);
  });
}

int run_converge(const Options& o) {
  return guarded(o.quiet, [&] {
    const Scenario s = load(o);
    if (!s.sampler) throw ConfigError("converge needs a 'sampler' section");
    if (s.converge_Ns.empty()) throw ConfigError("converge needs a 'converge' section with Ns");
    prepare_dir(o.out);
    const auto spec = *s.sampler;
    const auto kernel = s.kernel;
    const auto seed = s.seed;
    ScenarioSampler sampler = [&](std::size_t N) {
      std::vector<double> m, x, v;
      sample_profile(spec, N, seed, m, x, v);
      return Ensemble::create(m, x, v, kernel);
    };
    const auto study = convergence_study(sampler, s.converge_Ns, s.converge_t_grid, kernel, s.tol);
    write_file(o.out / "convergence.csv", [&](std::ostream& os) {
      os << "N,N_refined,sup_w2,bound,pass\n";
      for (const auto& r : study.rows) {
        fmt::print(os, "{},{},{:.17g},{:.17g},{}\n", r.N, r.N_refined, r.sup_w2, r.bound, r.pass ? 1 : 0);
      }
    });
    log(o.quiet, study.pass ? "convergence study passed" : "convergence study failed");
    return static_cast<int>(study.pass ? kOk : kCheckFailed);
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Event-driven sticky-particle alignment simulator"};
  app.require_subcommand(1);

  Options o;
  std::uint64_t seed = 0;
  auto common = [&](CLI::App* sc, bool config_required) {
    sc->add_option("--config", o.config, "Scenario JSON")->required(config_required);
    sc->add_option("--out", o.out, "Output directory");
    sc->add_option("--seed", seed, "Override the scenario seed");
    sc->add_flag("--quiet", o.quiet, "Suppress diagnostics");
  };
  auto* sim = app.add_subcommand("simulate", "Run a scenario and write the record");
  common(sim, true);
  auto* pred = app.add_subcommand("predict", "Write flux, regions and subgroup forecasts");
  common(pred, true);
  auto* ver = app.add_subcommand("verify", "Check a record directory");
  common(ver, false);
  ver->add_option("dir", o.out, "Record directory");
  auto* conv = app.add_subcommand("converge", "Refinement convergence study");
  common(conv, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(kConfigError);
  }
  for (auto* sc : {sim, pred, ver, conv}) {
    if (sc->parsed() && sc->count("--seed") > 0) o.seed = seed;
  }
  if (sim->parsed()) return run_simulate(o);
  if (pred->parsed()) return run_predict(o);
  if (ver->parsed()) return run_verify(o);
  return run_converge(o);
}

}  // namespace sticky::cli

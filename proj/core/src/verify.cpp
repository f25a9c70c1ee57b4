#include "sticky/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sticky/error.hpp"
#include "sticky/metrics.hpp"
#include "sticky/monotone.hpp"

namespace sticky {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// max over splits of max(mean(right) - value, value - mean(left)).
double split_residual(std::span<const double> m, std::span<const double> psi, IndexRange r, double value) {
  double total_m = 0.0, total_p = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    total_m += m[i];
    total_p += m[i] * psi[i];
  }
  double worst = r.size() > 1 ? kNegInf : 0.0;
  double lm = 0.0, lp = 0.0;
  for (std::size_t k = r.begin; k + 1 < r.end; ++k) {
    lm += m[k];
    lp += m[k] * psi[k];
    const double left = lp / lm;
    const double right = (total_p - lp) / (total_m - lm);
    worst = std::max({worst, right - value, value - left});
  }
  return worst;
}

void require_range(const IndexRange& r, std::size_t n) {
  if (r.end > n || r.begin >= r.end) throw InvalidArgument("event range outside the original particles");
}

}  // namespace

double default_tolerance(std::span<const double> psi) {
  double mx = 0.0;
  for (double p : psi) mx = std::max(mx, std::abs(p));
  return 1e-9 * (1.0 + mx);
}

CheckResult check_barycentric(const MergeEvent& ev, std::span<const double> psi, std::span<const double> masses,
                              std::optional<double> tol) {
  require_range(ev.originals, psi.size());
  const double t = tol.value_or(default_tolerance(psi));
  const double r = split_residual(masses, psi, ev.originals, ev.post_psi);
  return {"barycentric", r <= t, r, t};
}

CheckResult check_rankine_hugoniot(const MergeEvent& ev, std::span<const double> psi, std::span<const double> masses,
                                   std::optional<double> tol) {
  require_range(ev.originals, psi.size());
  const double t = tol.value_or(default_tolerance(psi));
  double ms = 0.0, p = 0.0;
  for (std::size_t i = ev.originals.begin; i < ev.originals.end; ++i) {
    ms += masses[i];
    p += masses[i] * psi[i];
  }
  const double r = std::abs(ev.post_psi - p / ms);
  return {"rankine_hugoniot", r <= t, r, t};
}

double projection_formula_error(const SimulationRecord& rec, std::size_t snapshot) {
  if (snapshot >= rec.snapshots.size() || snapshot >= rec.phi_integral.size()) {
    throw InvalidArgument("projection formula: missing snapshot or accumulator");
  }
  const Ensemble& s = rec.snapshots[snapshot];
  const auto& acc = rec.phi_integral[snapshot];
  const std::size_t n = s.original_size();
  if (acc.size() != n) throw InvalidArgument("projection formula: accumulator has the wrong length");
  const double t = rec.times[snapshot];
  const auto x0 = s.original_positions();
  const auto psi = s.original_natural_velocities();
  const auto m = s.original_masses();
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = x0[k] + t * psi[k] - acc[k];
  const auto pz = pava(m, z);
  const auto xt = s.positions_by_original();
  double e = 0.0;
  for (std::size_t k = 0; k < n; ++k) e += m[k] * (pz[k] - xt[k]) * (pz[k] - xt[k]);
  return std::sqrt(e);
}

CheckResult check_projection_formula(const SimulationRecord& rec, std::size_t snapshot, double tol) {
  const double e = projection_formula_error(rec, snapshot);
  return {"projection_formula", e <= tol, e, tol};
}

CheckResult check_oleinik_entropy(const Ensemble& state, std::optional<double> tol) {
  const auto psi = state.original_natural_velocities();
  const auto m = state.original_masses();
  const double t = tol.value_or(default_tolerance(psi));
  double worst = 0.0;
  bool any = false;
  for (std::size_t c = 0; c < state.size(); ++c) {
    const IndexRange r = state.constituents(c);
    if (r.size() < 2) continue;
    const double res = split_residual(m, psi, r, state.natural_velocities()[c]);
    worst = any ? std::max(worst, res) : res;
    any = true;
  }
  return {"oleinik_entropy", worst <= t, worst, t};
}

CheckResult check_oleinik_entropy(const SimulationRecord& rec, std::size_t snapshot, std::optional<double> tol) {
  if (snapshot >= rec.snapshots.size()) throw InvalidArgument("oleinik: no such snapshot");
  return check_oleinik_entropy(rec.snapshots[snapshot], tol);
}

CheckResult check_stickiness(const SimulationRecord& rec) {
  double violations = 0.0;
  for (std::size_t k = 1; k < rec.snapshots.size(); ++k) {
    const auto early = rec.snapshots[k - 1].offsets();
    const auto late = rec.snapshots[k].offsets();
    const std::set<std::size_t> early_set(early.begin(), early.end());
    for (std::size_t b : late) {
      if (!early_set.contains(b)) violations += 1.0;
    }
  }
  return {"stickiness", violations == 0.0, violations, 0.0};
}

ConvergenceStudy convergence_study(const ScenarioSampler& sampler, std::span<const std::size_t> Ns,
                                   std::span<const double> t_grid, const Kernel& kernel, const Tolerances& tol) {
  if (Ns.empty()) throw InvalidArgument("convergence_study: empty N ladder");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] == 0) throw InvalidArgument("convergence_study: N must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (Ns[i] == Ns[j]) throw InvalidArgument("convergence_study: repeated N in ladder");
    }
  }
  std::vector<double> times(t_grid.begin(), t_grid.end());
  std::sort(times.begin(), times.end());
  const double t_max = times.empty() ? 0.0 : times.back();

  ConvergenceStudy study;
  if (Ns.size() == 1) {
    study.rows.push_back({Ns[0], Ns[0], 0.0, 0.0, true});
    return study;
  }

  struct Run {
    Ensemble initial;
    std::vector<Ensemble> states;
  };
  std::vector<Run> runs;
  for (std::size_t N : Ns) {
    Ensemble e = sampler(N);
    auto states = evolve_to(e, kernel, times, tol);
    runs.push_back({std::move(e), std::move(states)});
  }
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const Ensemble& a = runs[i].initial;
    const Ensemble& b = runs[i + 1].initial;
    ConvergenceRow row{Ns[i], Ns[i + 1], 0.0, 0.0, true};
    for (std::size_t k = 0; k < times.size(); ++k) {
      row.sup_w2 = std::max(row.sup_w2, wasserstein(to_quantile(runs[i].states[k]), to_quantile(runs[i + 1].states[k]), 2.0));
    }
    const auto qa = to_quantile_original(a);
    const auto qb = to_quantile_original(b);
    row.bound = wasserstein(qa, qb, 2.0) +
                t_max * velocity_semidistance(qa, a.original_natural_velocities(), qb,
                                              b.original_natural_velocities(), 2.0);
    row.pass = row.sup_w2 <= row.bound + 1e-6;
    study.pass = study.pass && row.pass;
    study.rows.push_back(row);
  }
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    if (study.rows[i].sup_w2 > 1.1 * study.rows[i - 1].sup_w2 + 1e-12) study.nonincreasing = false;
  }
  study.pass = study.pass && study.nonincreasing;
  return study;
}

FlockingReport check_flocking(const SimulationRecord& rec, const FluxAnalysis& analysis, const Kernel& kernel,
                              std::size_t left, std::size_t right) {
  FlockingReport rep{flocking_thresholds(analysis, kernel, left, right), true, 0.0, 0.0};
  const IndexRange lc = analysis.subgroups[left].interval.cells;
  const IndexRange rc = analysis.subgroups[right].interval.cells;

  auto centre = [](const Ensemble& s, IndexRange r) {
    const auto x = s.positions_by_original();
    const auto m = s.original_masses();
    double ms = 0.0, mx = 0.0;
    for (std::size_t k = r.begin; k < r.end; ++k) {
      ms += m[k];
      mx += m[k] * x[k];
    }
    return mx / ms;
  };
  std::vector<double> gap, edge;
  for (const Ensemble& s : rec.snapshots) {
    gap.push_back(centre(s, rc) - centre(s, lc));
    const auto x = s.positions_by_original();
    edge.push_back(x[rc.end - 1] - x[lc.begin]);
  }
  const std::size_t last = rec.times.size() - 1;
  const std::size_t mid = last / 2;
  if (last > mid) rep.observed_rate = (gap[last] - gap[mid]) / (rec.times[last] - rec.times[mid]);

  switch (rep.thresholds.regime) {
    case FlockingRegime::ThinTailDiverge: {
      double worst = kNegInf;
      for (std::size_t k = 0; k <= last; ++k) {
        worst = std::max(worst, gap[0] + rep.thresholds.lower * rec.times[k] - gap[k]);
      }
      rep.residual = worst;
      rep.pass = worst <= 1e-6;
      break;
    }
    case FlockingRegime::FatTailBound: {
      const double upper = *rep.thresholds.upper;
      double worst = kNegInf;
      bool crossed = false;
      for (std::size_t k = 0; k <= last; ++k) {
        if (!crossed && edge[k] <= upper) crossed = true;
        if (crossed) worst = std::max(worst, edge[k] - upper);
      }
      rep.residual = crossed ? worst : 0.0;
      rep.pass = rep.residual <= 1e-6;
      break;
    }
    case FlockingRegime::ThinTailIndeterminate:
      rep.pass = true;
      break;
  }
  (void)kernel;
  return rep;
}

}  // namespace sticky

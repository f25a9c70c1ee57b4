#include "sticky/cluster_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sticky/error.hpp"

namespace sticky {

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Supercritical: return "Supercritical";
    case Region::Critical: return "Critical";
    case Region::Subcritical: return "Subcritical";
  }
  return "?";
}

std::string_view to_string(Forecast f) {
  switch (f) {
    case Forecast::NoCluster: return "NoCluster";
    case Forecast::FiniteTimeCluster: return "FiniteTimeCluster";
    case Forecast::InfiniteTimeCluster: return "InfiniteTimeCluster";
  }
  return "?";
}

std::string_view to_string(FlockingRegime r) {
  switch (r) {
    case FlockingRegime::ThinTailDiverge: return "ThinTailDiverge";
    case FlockingRegime::FatTailBound: return "FatTailBound";
    case FlockingRegime::ThinTailIndeterminate: return "ThinTailIndeterminate";
  }
  return "?";
}

PiecewiseLinear build_flux(const Ensemble& e) {
  const auto cum = e.cumulative_mass();
  const auto m = e.original_masses();
  const auto psi = e.original_natural_velocities();
  std::vector<double> vals(cum.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) vals[i + 1] = vals[i] + m[i] * psi[i];
  return PiecewiseLinear(std::vector<double>(cum.begin(), cum.end()), std::move(vals));
}

namespace {

MassInterval interval_of(const PiecewiseLinear& pl, IndexRange cells) {
  return {pl.nodes()[cells.begin], pl.nodes()[cells.end], cells};
}

}  // namespace

RegionClassification classify_regions(const PiecewiseLinear& A, const PiecewiseLinear& A_star_star,
                                      double eps_env) {
  if (A.size() != A_star_star.size() || A.size() < 2) throw InvalidArgument("classify_regions: grid mismatch");
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A.nodes()[k] != A_star_star.nodes()[k]) throw InvalidArgument("classify_regions: grid mismatch");
  }
  const auto a = A.values();
  const auto env = A_star_star.values();
  const std::size_t cells = A.size() - 1;
  RegionClassification out;
  out.cell_labels.assign(cells, Region::Subcritical);

  const auto hull = lower_convex_hull(A_star_star, eps_env);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t p = hull[s], q = hull[s + 1];
    if (q - p == 1) {
      out.cell_labels[p] = Region::Subcritical;
      out.regions.push_back({interval_of(A, {p, q}), Region::Subcritical});
      continue;
    }
    std::vector<std::size_t> touch{p};
    for (std::size_t k = p + 1; k < q; ++k) {
      if (a[k] - env[k] <= eps_env) touch.push_back(k);
    }
    touch.push_back(q);
    for (std::size_t t = 0; t + 1 < touch.size(); ++t) {
      const std::size_t lo = touch[t], hi = touch[t + 1];
      if (hi - lo >= 2) {
        for (std::size_t c = lo; c < hi; ++c) out.cell_labels[c] = Region::Supercritical;
        out.supercritical.push_back({lo, hi});
        out.regions.push_back({interval_of(A, {lo, hi}), Region::Supercritical});
      } else {
        out.cell_labels[lo] = Region::Critical;
        auto& r = out.regions;
        if (!r.empty() && r.back().label == Region::Critical && r.back().interval.cells.end == lo &&
            r.back().interval.cells.begin >= p) {
          r.back().interval = interval_of(A, {r.back().interval.cells.begin, hi});
        } else {
          r.push_back({interval_of(A, {lo, hi}), Region::Critical});
        }
      }
    }
  }
  // Join neighbouring subcritical cells.
  std::vector<RegionSpan> joined;
  for (const auto& r : out.regions) {
    if (!joined.empty() && r.label == Region::Subcritical && joined.back().label == Region::Subcritical) {
      joined.back().interval = interval_of(A, {joined.back().interval.cells.begin, r.interval.cells.end});
    } else {
      joined.push_back(r);
    }
  }
  out.regions = std::move(joined);
  return out;
}

std::vector<Subgroup> subgroups(const PiecewiseLinear& A_star_star, double eps_env) {
  const auto hull = lower_convex_hull(A_star_star, eps_env);
  const auto x = A_star_star.nodes();
  const auto y = A_star_star.values();
  std::vector<Subgroup> out;
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t p = hull[s], q = hull[s + 1];
    out.push_back({interval_of(A_star_star, {p, q}), (y[q] - y[p]) / (x[q] - x[p])});
  }
  return out;
}

FluxAnalysis analyze(const Ensemble& initial) {
  FluxAnalysis fa;
  fa.A = build_flux(initial);
  double amax = 0.0;
  for (double v : fa.A.values()) amax = std::max(amax, std::abs(v));
  fa.eps_env = 1e-12 * (1.0 + amax);
  fa.A_star_star = lower_convex_envelope(fa.A, fa.eps_env);
  auto rc = classify_regions(fa.A, fa.A_star_star, fa.eps_env);
  fa.cell_labels = std::move(rc.cell_labels);
  fa.regions = std::move(rc.regions);
  fa.supercritical = std::move(rc.supercritical);
  fa.subgroups = subgroups(fa.A_star_star, fa.eps_env);
  for (std::size_t c = 0; c < initial.size(); ++c) {
    const IndexRange r = initial.constituents(c);
    if (r.size() > 1) fa.initial_clusters.push_back(r);
  }
  return fa;
}

std::vector<SubgroupForecast> forecast(const FluxAnalysis& analysis, const Kernel& kernel) {
  std::vector<SubgroupForecast> out;
  for (const Subgroup& g : analysis.subgroups) {
    SubgroupForecast f{g, Forecast::NoCluster, {}};
    const IndexRange cells = g.interval.cells;
    if (cells.size() == 1) {
      out.push_back(std::move(f));
      continue;
    }
    std::vector<IndexRange> parts;
    for (const auto& r : analysis.supercritical) {
      if (cells.contains(r)) parts.push_back(r);
    }
    for (const auto& r : analysis.initial_clusters) {
      if (cells.contains(r)) parts.push_back(r);
    }
    std::sort(parts.begin(), parts.end(), [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
    std::vector<IndexRange> merged;
    for (const auto& r : parts) {
      if (!merged.empty() && r.begin < merged.back().end) {
        merged.back().end = std::max(merged.back().end, r.end);
      } else {
        merged.push_back(r);
      }
    }
    const bool whole = merged.size() == 1 && merged.front() == cells;
    if (kernel.family() == KernelFamily::Zero) {
      f.forecast = merged.empty() ? Forecast::NoCluster : Forecast::FiniteTimeCluster;
      f.finite_time_clusters = std::move(merged);
    } else if (kernel.reciprocal_phi_integrable_at_zero() || whole) {
      f.forecast = Forecast::FiniteTimeCluster;
      f.finite_time_clusters = {cells};
    } else {
      f.forecast = Forecast::InfiniteTimeCluster;
      f.finite_time_clusters = std::move(merged);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<IndexRange> forecast_partition(const std::vector<SubgroupForecast>& f, std::size_t cells) {
  std::vector<IndexRange> clusters;
  for (const auto& g : f) {
    for (const auto& r : g.finite_time_clusters) clusters.push_back(r);
  }
  std::sort(clusters.begin(), clusters.end(), [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
  std::vector<IndexRange> out;
  std::size_t i = 0;
  for (const auto& r : clusters) {
    for (; i < r.begin; ++i) out.push_back({i, i + 1});
    out.push_back(r);
    i = r.end;
  }
  for (; i < cells; ++i) out.push_back({i, i + 1});
  return out;
}

std::size_t subgroup_at(const FluxAnalysis& analysis, double m) {
  const auto& g = analysis.subgroups;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (m < g[s].interval.hi) return s;
  }
  return g.size() - 1;
}

double separation_bound(const FluxAnalysis& analysis, const Kernel& kernel, const QuantileFunction& initial,
                        double m1, double m2) {
  const double psi1 = analysis.subgroups[subgroup_at(analysis, m1)].psi;
  const double psi2 = analysis.subgroups[subgroup_at(analysis, m2)].psi;
  if (!(m1 < m2) || !(psi1 < psi2)) {
    throw InvalidArgument("separation_bound: need m1 < m2 in subgroups with increasing velocities");
  }
  const double sigma = 0.5 * (psi2 - psi1);
  double eta = std::numeric_limits<double>::infinity();
  if (0.5 * sigma < kernel.sup_big_phi()) eta = 2.0 * kernel.inv_big_phi(0.5 * sigma);
  // Interior points of a collapsing subgroup may drift towards its neighbour,
  // so only the facing edges of the two subgroups carry a time-independent gap.
  const auto nodes = analysis.A.nodes();
  const auto left_cells = analysis.subgroups[subgroup_at(analysis, m1)].interval.cells;
  const auto right_cells = analysis.subgroups[subgroup_at(analysis, m2)].interval.cells;
  const double left_edge = 0.5 * (nodes[left_cells.end - 1] + nodes[left_cells.end]);
  const double right_edge = 0.5 * (nodes[right_cells.begin] + nodes[right_cells.begin + 1]);
  return std::min(initial(right_edge) - initial(left_edge), eta);
}

FlockingThresholds flocking_thresholds(const FluxAnalysis& analysis, const Kernel& kernel, std::size_t left,
                                       std::size_t right) {
  const auto& g = analysis.subgroups;
  if (!(left < right) || right >= g.size()) throw InvalidArgument("flocking_thresholds: need two distinct subgroups");
  const double gap = g[right].psi - g[left].psi;
  if (!(gap > 0.0)) throw InvalidArgument("flocking_thresholds: subgroup velocities must increase");
  if (kernel.fat_tailed()) {
    const double span = g[right].interval.hi - g[left].interval.lo;
    return {FlockingRegime::FatTailBound, 2.0 * kernel.inv_big_phi(0.5 * gap), kernel.inv_big_phi(gap / span)};
  }
  const double l1 = kernel.l1_norm();
  if (gap > l1) return {FlockingRegime::ThinTailDiverge, gap - l1, std::nullopt};
  return {FlockingRegime::ThinTailIndeterminate, 0.0, std::nullopt};
}

}  // namespace sticky

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "sticky/ensemble.hpp"
#include "sticky/kernel.hpp"
#include "sticky/monotone.hpp"

namespace sticky {

enum class Region { Supercritical, Critical, Subcritical };
enum class Forecast { NoCluster, FiniteTimeCluster, InfiniteTimeCluster };
enum class FlockingRegime { ThinTailDiverge, FatTailBound, ThinTailIndeterminate };

std::string_view to_string(Region r);
std::string_view to_string(Forecast f);
std::string_view to_string(FlockingRegime r);

/// Half-open mass interval [lo, hi) together with the cells it covers.
struct MassInterval {
  double lo = 0.0;
  double hi = 0.0;
  IndexRange cells;
};

struct RegionSpan {
  MassInterval interval;
  Region label;
};

struct Subgroup {
  MassInterval interval;
  double psi = 0.0;
};

struct FluxAnalysis {
  PiecewiseLinear A;
  PiecewiseLinear A_star_star;
  double eps_env = 0.0;
  std::vector<Region> cell_labels;
  /// Maximal runs: each supercritical component, critical runs within one
  /// subgroup, and runs of subcritical cells.
  std::vector<RegionSpan> regions;
  /// Cells of each connected component of {A > A**}.
  std::vector<IndexRange> supercritical;
  std::vector<Subgroup> subgroups;
  /// Pre-merged clusters of the initial state (more than one cell).
  std::vector<IndexRange> initial_clusters;
};

struct SubgroupForecast {
  Subgroup subgroup;
  Forecast forecast = Forecast::NoCluster;
  /// Cell ranges that become single clusters in finite time.
  std::vector<IndexRange> finite_time_clusters;
};

struct FlockingThresholds {
  FlockingRegime regime;
  /// ThinTailDiverge: guaranteed linear growth rate of the centre gap.
  /// FatTailBound: 2 inv_Phi(gap / 2).
  double lower = 0.0;
  /// FatTailBound only: inv_Phi(gap / (outer mass span)).
  std::optional<double> upper;
};

/// A on the original mass grid: A(theta_k) = sum_{i<k} m_i psi_i.
PiecewiseLinear build_flux(const Ensemble& e);

struct RegionClassification {
  std::vector<Region> cell_labels;
  std::vector<RegionSpan> regions;
  std::vector<IndexRange> supercritical;
};

/// Labels each cell from A and its envelope on the same grid.
/// Throws InvalidArgument when the grids differ.
RegionClassification classify_regions(const PiecewiseLinear& A, const PiecewiseLinear& A_star_star, double eps_env);

/// Maximal runs of constant envelope slope, in increasing slope order.
std::vector<Subgroup> subgroups(const PiecewiseLinear& A_star_star, double eps_env = 0.0);

FluxAnalysis analyze(const Ensemble& initial);

std::vector<SubgroupForecast> forecast(const FluxAnalysis& analysis, const Kernel& kernel);

/// Cluster partition implied by the forecast: every finite-time cluster
/// range, with the remaining cells as singletons.
std::vector<IndexRange> forecast_partition(const std::vector<SubgroupForecast>& f, std::size_t cells);

/// Index of the subgroup whose interval contains m.
std::size_t subgroup_at(const FluxAnalysis& analysis, double m);

/// Time-independent lower bound on X_t(m2) - X_t(m1): the smaller of the
/// initial gap between the facing edges of the two subgroups and
/// eta = 2 inv_Phi(sigma / 2), sigma = (psi2 - psi1) / 2.
/// Throws InvalidArgument unless the projected natural velocity at m1 is
/// strictly below the one at m2.
double separation_bound(const FluxAnalysis& analysis, const Kernel& kernel, const QuantileFunction& initial,
                        double m1, double m2);

/// Subgroups `left` < `right` by index.
FlockingThresholds flocking_thresholds(const FluxAnalysis& analysis, const Kernel& kernel, std::size_t left,
                                       std::size_t right);

}  // namespace sticky

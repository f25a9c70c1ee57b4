#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sticky/cluster_predictor.hpp"
#include "sticky/dynamics.hpp"
#include "sticky/ensemble.hpp"
#include "sticky/kernel.hpp"

namespace sticky {

struct CheckResult {
  std::string name;
  bool pass = false;
  /// Worst signed violation; <= tolerance means pass.
  double residual = 0.0;
  double tolerance = 0.0;
};

/// 1e-9 (1 + max |psi|).
double default_tolerance(std::span<const double> psi);

/// For every split of the merged originals into a left and right part:
/// mean(right) <= post_psi <= mean(left).
CheckResult check_barycentric(const MergeEvent& ev, std::span<const double> psi, std::span<const double> masses,
                              std::optional<double> tol = std::nullopt);

/// post_psi equals the chord slope of A over the merged mass interval.
CheckResult check_rankine_hugoniot(const MergeEvent& ev, std::span<const double> psi, std::span<const double> masses,
                                   std::optional<double> tol = std::nullopt);

/// || P(X0 + t Psi - int Phi*rho) - X_t ||_2 on the original grid.
double projection_formula_error(const SimulationRecord& rec, std::size_t snapshot);
CheckResult check_projection_formula(const SimulationRecord& rec, std::size_t snapshot, double tol);

/// Split inequalities for every cluster of the state.
CheckResult check_oleinik_entropy(const Ensemble& state, std::optional<double> tol = std::nullopt);
CheckResult check_oleinik_entropy(const SimulationRecord& rec, std::size_t snapshot,
                                  std::optional<double> tol = std::nullopt);

/// Cluster partitions are nested forward in time.
CheckResult check_stickiness(const SimulationRecord& rec);

struct ConvergenceRow {
  std::size_t N = 0;
  std::size_t N_refined = 0;
  double sup_w2 = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  bool nonincreasing = true;
  bool pass = true;
};

using ScenarioSampler = std::function<Ensemble(std::size_t N)>;

/// sup over t_grid of W_2 between consecutive refinements. Throws
/// InvalidArgument on an empty or repeating ladder.
ConvergenceStudy convergence_study(const ScenarioSampler& sampler, std::span<const std::size_t> Ns,
                                   std::span<const double> t_grid, const Kernel& kernel,
                                   const Tolerances& tol = {});

struct FlockingReport {
  FlockingThresholds thresholds;
  bool pass = true;
  double residual = 0.0;
  /// Growth of the centre gap over the second half of the record.
  double observed_rate = 0.0;
};

/// Compares the centre gap (thin tail) or outer-edge distance (fat tail) of
/// subgroups `left` and `right` with the predicted thresholds.
FlockingReport check_flocking(const SimulationRecord& rec, const FluxAnalysis& analysis, const Kernel& kernel,
                              std::size_t left, std::size_t right);

}  // namespace sticky

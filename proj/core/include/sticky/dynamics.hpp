#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sticky/ensemble.hpp"
#include "sticky/kernel.hpp"
#include "sticky/monotone.hpp"

namespace sticky {

struct Tolerances {
  double atol = 1e-10;
  double rtol = 1e-9;
  /// Event localisation in time, multiplied by max(1, position scale).
  double event = 1e-12;
  /// Contact gap, multiplied by max(1, position scale).
  double contact = 1e-13;
  std::size_t max_steps = 20'000'000;
};

/// One inelastic merge of a contiguous run of clusters.
struct MergeEvent {
  double time = 0.0;
  /// Cluster indices before the merge.
  IndexRange clusters;
  /// Original particle indices covered by the merged cluster.
  IndexRange originals;
  std::vector<double> pre_masses;
  std::vector<double> pre_velocities;
  double post_velocity = 0.0;
  double post_psi = 0.0;
  double position = 0.0;
};

struct StepResult {
  double dt = 0.0;
  std::vector<MergeEvent> events;
};

/// v_i = psi_i - sum_j m_j Phi(x_i - x_j).
std::vector<double> drift(const Ensemble& e, const Kernel& kernel);
void drift(std::span<const double> masses, std::span<const double> positions, std::span<const double> psi,
           const Kernel& kernel, std::span<double> out);

/// Dormand-Prince 5(4) integrator with contact detection on cubic Hermite
/// dense output. Where the step would leave its stability interval it takes
/// a Runge-Kutta-Chebyshev step instead. Keeps the proposed step size
/// between calls.
class Integrator {
 public:
  explicit Integrator(Kernel kernel, Tolerances tol = {});

  /// Advances `e` from time t by at most dt_max. Stops early at a contact,
  /// merges it (cascading) and reports the events.
  StepResult step(Ensemble& e, double t, double dt_max);

  /// Merges every run of clusters in contact at time t. Within a run the
  /// pooled blocks are those of the isotonic regression of the velocities.
  std::vector<MergeEvent> resolve_contacts(Ensemble& e, double t);

  const Kernel& kernel() const noexcept { return kernel_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

 private:
  double trial(std::span<const double> x0, std::span<const double> f0, double h, std::span<const double> m,
               std::span<const double> psi);
  // Runge-Kutta-Chebyshev (second order, damped) step for stiff stretches;
  // same outputs as trial().
  double trial_rkc(std::span<const double> x0, std::span<const double> f0, double h, std::span<const double> m,
                   std::span<const double> psi, double rho);
  // Gershgorin bound on the spectral radius of the drift Jacobian.
  double spectral_radius(std::span<const double> m, std::span<const double> x) const;
  // Fraction of the step at which the first contact occurs, or a negative value.
  double locate_contact(std::span<const double> x0, std::span<const double> f0, std::span<const double> x1,
                        std::span<const double> f1, double h, double scale) const;

  Kernel kernel_;
  Tolerances tol_;
  double h_ = 0.0;
  // Unbounded phi: the drift has no meaningful continuation past a contact,
  // so steps whose stages reorder clusters are rejected.
  bool singular_ = false;
  bool crossed_ = false;
  std::vector<double> cache_x_;
  std::vector<double> cache_f_;
  // Runge-Kutta workspace.
  std::vector<double> k_[7];
  std::vector<double> y_;
  std::vector<double> y_prev_;
  std::vector<double> y_prev2_;
  std::vector<double> x1_;
  std::vector<double> err_;
};

/// One step with a fresh integrator.
StepResult step(Ensemble& e, const Kernel& kernel, double t, double dt_max, const Tolerances& tol = {});

struct SimulationRecord {
  std::vector<double> times;
  std::vector<Ensemble> snapshots;
  std::vector<MergeEvent> events;
  /// int_0^t (Phi * rho_s)(X_s(m)) ds per original cell, per snapshot.
  std::vector<std::vector<double>> phi_integral;
  /// int_0^t ||V_s||^2 ds per snapshot.
  std::vector<double> v_norm2_integral;
  std::size_t steps = 0;
};

/// 0, dt, 2 dt, ... up to and including t_end.
std::vector<double> snapshot_times(double t_end, double snapshot_dt);

/// Runs the sticky dynamics to t_end. Both accumulators use a left-endpoint
/// rule on the union of snapshot and event times, with post-merge values at
/// event times.
SimulationRecord simulate(Ensemble initial, const Kernel& kernel, double t_end, double snapshot_dt,
                          const Tolerances& tol = {});

}  // namespace sticky

namespace sticky {

/// States at the given nondecreasing times (no snapshot bookkeeping).
std::vector<Ensemble> evolve_to(Ensemble initial, const Kernel& kernel, std::span<const double> times,
                                const Tolerances& tol = {});

}  // namespace sticky

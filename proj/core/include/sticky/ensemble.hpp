#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sticky/kernel.hpp"
#include "sticky/monotone.hpp"

namespace sticky {

/// Right-continuous nondecreasing step function on (0, 1).
/// Cell i covers [theta_{i-1}, theta_i) with theta_0 = 0 and theta_n = 1.
class QuantileFunction {
 public:
  QuantileFunction() = default;
  /// `breakpoints` are the n-1 interior cell boundaries.
  /// Throws InvalidArgument unless breakpoints increase strictly inside (0, 1)
  /// and values are nondecreasing.
  QuantileFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// Cells of the given masses (normalised by their sum).
  static QuantileFunction from_cells(std::span<const double> masses, std::span<const double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> values() const noexcept { return values_; }
  double lower(std::size_t cell) const noexcept { return cell == 0 ? 0.0 : breakpoints_[cell - 1]; }
  double upper(std::size_t cell) const noexcept { return cell + 1 == size() ? 1.0 : breakpoints_[cell]; }
  std::vector<double> cell_masses() const;
  /// Index of the cell containing m (right-continuous).
  std::size_t cell_at(double m) const;
  double operator()(double m) const { return values_[cell_at(m)]; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Particle or cluster state together with the original-resolution data the
/// clusters were formed from.
///
/// Original particles keep their masses, initial positions and velocities and
/// their frozen natural velocities. Cluster c owns the contiguous originals
/// [offsets()[c], offsets()[c+1]).
class Ensemble {
 public:
  /// Validates the input, pre-merges coincident positions and computes the
  /// natural velocities for `kernel`.
  /// Masses must be positive and sum to 1 within 1e-12; positions nondecreasing.
  static Ensemble create(std::span<const double> masses, std::span<const double> positions,
                         std::span<const double> velocities, const Kernel& kernel);

  /// Reassembles a cluster state from original-resolution data (used when
  /// reading records back).
  static Ensemble restore(std::span<const double> original_masses, std::span<const double> original_positions,
                          std::span<const double> original_velocities,
                          std::span<const double> original_natural_velocities, std::span<const std::size_t> offsets,
                          std::span<const double> positions, std::span<const double> velocities);

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> masses() const noexcept { return m_; }
  std::span<const double> positions() const noexcept { return x_; }
  std::span<const double> velocities() const noexcept { return v_; }
  std::span<const double> natural_velocities() const noexcept { return psi_; }
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  IndexRange constituents(std::size_t cluster) const noexcept { return {offsets_[cluster], offsets_[cluster + 1]}; }

  std::size_t original_size() const noexcept { return orig_->masses.size(); }
  std::span<const double> original_masses() const noexcept { return orig_->masses; }
  std::span<const double> original_positions() const noexcept { return orig_->positions; }
  std::span<const double> original_velocities() const noexcept { return orig_->velocities; }
  std::span<const double> original_natural_velocities() const noexcept { return orig_->psi; }
  /// Cumulative original mass, size original_size()+1.
  std::span<const double> cumulative_mass() const noexcept { return orig_->cumulative; }

  /// Cluster index of every original particle.
  std::vector<std::size_t> lineage() const;
  /// Original-resolution positions / velocities (cluster values broadcast).
  std::vector<double> positions_by_original() const;
  std::vector<double> velocities_by_original() const;

  double total_mass() const noexcept;
  double momentum() const noexcept;
  /// Mass-weighted 2-norm of the cluster velocities, squared.
  double velocity_norm2() const noexcept;

  // Mutators used by the integrator.
  void set_positions(std::span<const double> x);
  void set_velocities(std::span<const double> v);
  /// Replaces clusters [r.begin, r.end) by one cluster at `position` with
  /// `velocity`. Its natural velocity is the mass-weighted mean of the
  /// constituent original natural velocities.
  void merge(IndexRange r, double position, double velocity);

 private:
  struct Originals {
    std::vector<double> masses;
    std::vector<double> positions;
    std::vector<double> velocities;
    std::vector<double> psi;
    std::vector<double> cumulative;
  };

  Ensemble() = default;
  void rebuild_cluster_aggregates();

  std::shared_ptr<const Originals> orig_;
  std::vector<std::size_t> offsets_;
  std::vector<double> m_;
  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<double> psi_;
};

/// psi_i = v_i + sum_j m_j Phi(x_i - x_j).
std::vector<double> natural_velocities(std::span<const double> masses, std::span<const double> positions,
                                       std::span<const double> velocities, const Kernel& kernel);

/// Velocities for which the natural velocities equal `psi`.
std::vector<double> velocities_for_natural(std::span<const double> masses, std::span<const double> positions,
                                           std::span<const double> psi, const Kernel& kernel);

/// Quantile function of the cluster state (cells are clusters).
QuantileFunction to_quantile(const Ensemble& e);
/// Quantile function on the original mass grid.
QuantileFunction to_quantile_original(const Ensemble& e);

/// (Phi * rho)(at) = sum_j m_j Phi(at - x_j).
double convolve_Phi(const Ensemble& e, const Kernel& kernel, double at);

}  // namespace sticky

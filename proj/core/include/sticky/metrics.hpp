#pragma once

#include <limits>
#include <span>

#include "sticky/ensemble.hpp"
#include "sticky/kernel.hpp"

namespace sticky {

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// W_p as the L^p(0,1) distance of quantile functions; p may be infinite.
double wasserstein(const QuantileFunction& q1, const QuantileFunction& q2, double p);

/// ||v1 o X1 - v2 o X2||_{L^p(0,1)}, velocities given per cell.
double velocity_semidistance(const QuantileFunction& q1, std::span<const double> v1, const QuantileFunction& q2,
                             std::span<const double> v2, double p);

/// (W_p^p + U_p^p)^(1/p).
double metric_D(const QuantileFunction& q1, std::span<const double> v1, const QuantileFunction& q2,
                std::span<const double> v2, double p);

/// 1/2 sum_ij m_i m_j W(x_i - x_j) - sum_k m_k psi_k X(k), with the original
/// natural velocities paired with the cluster positions.
double energy(const Ensemble& e, const Kernel& kernel);

/// omega(d) for d = ||X1 - X2||_2, where
/// omega^2 = 8 Phi(max{1, d/2}) Phi(d/2) + (Phi(1) d)^2.
double modulus_bound(const QuantileFunction& q1, const QuantileFunction& q2, const Kernel& kernel);

}  // namespace sticky

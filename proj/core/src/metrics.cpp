#include "sticky/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sticky/error.hpp"

namespace sticky {

namespace {

void require_p(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be at least 1");
}

// Walks the merged breakpoint grid and calls f(length, cell1, cell2).
template <class F>
void merged_cells(const QuantileFunction& q1, const QuantileFunction& q2, F&& f) {
  std::size_t i = 0, j = 0;
  double lo = 0.0;
  while (i < q1.size() && j < q2.size()) {
    const double u1 = q1.upper(i), u2 = q2.upper(j);
    const double hi = std::min(u1, u2);
    if (hi > lo) f(hi - lo, i, j);
    lo = hi;
    if (u1 <= hi) ++i;
    if (u2 <= hi) ++j;
  }
}

template <class G>
double lp_norm_of(const QuantileFunction& q1, const QuantileFunction& q2, double p, G&& diff) {
  require_p(p);
  if (std::isinf(p)) {
    double mx = 0.0;
    merged_cells(q1, q2, [&](double, std::size_t i, std::size_t j) { mx = std::max(mx, std::abs(diff(i, j))); });
    return mx;
  }
  double s = 0.0;
  merged_cells(q1, q2, [&](double len, std::size_t i, std::size_t j) { s += len * std::pow(std::abs(diff(i, j)), p); });
  return std::pow(s, 1.0 / p);
}

}  // namespace

double wasserstein(const QuantileFunction& q1, const QuantileFunction& q2, double p) {
  const auto x1 = q1.values();
  const auto x2 = q2.values();
  return lp_norm_of(q1, q2, p, [&](std::size_t i, std::size_t j) { return x1[i] - x2[j]; });
}

double velocity_semidistance(const QuantileFunction& q1, std::span<const double> v1, const QuantileFunction& q2,
                             std::span<const double> v2, double p) {
  if (v1.size() != q1.size() || v2.size() != q2.size()) {
    throw InvalidArgument("velocity_semidistance: velocities are not aligned with the cells");
  }
  return lp_norm_of(q1, q2, p, [&](std::size_t i, std::size_t j) { return v1[i] - v2[j]; });
}

double metric_D(const QuantileFunction& q1, std::span<const double> v1, const QuantileFunction& q2,
                std::span<const double> v2, double p) {
  const double w = wasserstein(q1, q2, p);
  const double u = velocity_semidistance(q1, v1, q2, v2, p);
  if (std::isinf(p)) return std::max(w, u);
  return std::pow(std::pow(w, p) + std::pow(u, p), 1.0 / p);
}

double energy(const Ensemble& e, const Kernel& kernel) {
  const auto m = e.masses();
  const auto x = e.positions();
  double inter = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) inter += m[i] * m[j] * kernel.w_phi(x[i] - x[j]);
  }
  const auto mo = e.original_masses();
  const auto psi = e.original_natural_velocities();
  const auto off = e.offsets();
  double lin = 0.0;
  for (std::size_t c = 0; c < e.size(); ++c) {
    double s = 0.0;
    for (std::size_t k = off[c]; k < off[c + 1]; ++k) s += mo[k] * psi[k];
    lin += s * x[c];
  }
  // The double sum counts each unordered pair twice; the 1/2 cancels that.
  return inter - lin;
}

double modulus_bound(const QuantileFunction& q1, const QuantileFunction& q2, const Kernel& kernel) {
  const double d = wasserstein(q1, q2, 2.0);
  const double w2 = 8.0 * kernel.big_phi(std::max(1.0, 0.5 * d)) * kernel.big_phi(0.5 * d) +
                    std::pow(kernel.big_phi(1.0) * d, 2);
  return std::sqrt(w2);
}

}  // namespace sticky

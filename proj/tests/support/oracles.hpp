#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <sticky/ensemble.hpp>
#include <sticky/kernel.hpp>

namespace oracle {

/// int_0^x phi by adaptive Gauss-Kronrod, split at the kink and on a
/// geometric grid; the power-law piece below 1e-6 is integrated analytically.
double big_phi_quadrature(const sticky::Kernel& k, double x);
/// int_0^x Phi by quadrature of the closed-form Phi.
double w_phi_quadrature(const sticky::Kernel& k, double x);

/// Weighted isotonic regression by accelerated dual projected gradient.
std::vector<double> isotonic_qp(std::span<const double> w, std::span<const double> v, double tol = 1e-13);

/// min over couplings of sum pi_ij |x_i - y_j|^p, by enumerating spanning-tree
/// bases of the transport polytope. Returns the p-th root.
double wasserstein_lp(std::span<const double> a, std::span<const double> x, std::span<const double> b,
                      std::span<const double> y, double p);

struct Particles {
  std::vector<double> masses;
  std::vector<double> positions;
  std::vector<double> velocities;
};

/// Masses uniform in [0.5, 1.5] normalised, sorted uniform positions in
/// [-spread, spread], uniform velocities in [-vmax, vmax].
Particles random_particles(std::mt19937_64& rng, std::size_t n, double spread = 1.0, double vmax = 1.0);

/// Positive masses that are multiples of 2^-bits and sum to exactly 1.
std::vector<double> dyadic_masses(std::mt19937_64& rng, std::size_t n, int bits = 20);

sticky::Ensemble make(const Particles& p, const sticky::Kernel& k);

}  // namespace oracle

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 6, 1e-14);
}

// Integrates f over [a, b] on a geometric grid starting at a (a > 0) plus
// any kink inside.
double integrate_split(const std::function<double(double)>& f, double a, double b, double kink) {
  std::vector<double> cuts{a};
  for (double c = std::max(a, 1e-12) * 8; c < b; c *= 8) cuts.push_back(c);
  if (kink > a && kink < b) cuts.push_back(kink);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += gk(f, cuts[i], cuts[i + 1]);
  return s;
}

}  // namespace

double big_phi_quadrature(const sticky::Kernel& k, double x) {
  const double s = std::abs(x);
  const double sign = x < 0 ? -1.0 : 1.0;
  if (s == 0.0) return 0.0;
  auto phi = [&](double r) { return k.phi(r); };
  double lo = 0.0, head = 0.0;
  if (k.family() == sticky::KernelFamily::PowerLaw) {
    lo = std::min(s, 1e-6);
    head = k.c() * std::pow(lo, 1.0 - k.beta()) / (1.0 - k.beta());
    if (lo == s) return sign * head;
  }
  if (lo == 0.0) {
    // Bounded kernels: the first piece down to zero is smooth.
    const double first = std::min(s, 1e-3);
    head = gk(phi, 0.0, first);
    lo = first;
    if (lo == s) return sign * head;
  }
  return sign * (head + integrate_split(phi, lo, s, k.kink()));
}

double w_phi_quadrature(const sticky::Kernel& k, double x) {
  const double s = std::abs(x);
  if (s == 0.0) return 0.0;
  // Phi itself is checked against quadrature of phi separately.
  auto big = [&](double r) { return k.big_phi(r); };
  const double first = std::min(s, 1e-3);
  double v = gk(big, 0.0, first);
  if (first < s) v += integrate_split(big, first, s, k.kink());
  return v;
}

std::vector<double> isotonic_qp(std::span<const double> w, std::span<const double> v, double tol) {
  const std::size_t n = v.size();
  if (n <= 1) return {v.begin(), v.end()};
  const std::size_t m = n - 1;
  // y(lambda)_i = v_i - (lambda_i - lambda_{i-1}) / (2 w_i)
  auto primal = [&](const std::vector<double>& lam) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double li = i < m ? lam[i] : 0.0;
      const double lp = i > 0 ? lam[i - 1] : 0.0;
      y[i] = v[i] - (li - lp) / (2.0 * w[i]);
    }
    return y;
  };
  double L = 0.0;
  for (std::size_t i = 0; i < m; ++i) L = std::max(L, 1.0 / w[i] + 1.0 / w[i + 1]);
  const double step = 1.0 / L;
  std::vector<double> lam(m, 0.0), prev = lam, z = lam;
  double t = 1.0;
  double g_prev = -std::numeric_limits<double>::infinity();
  auto dual = [&](const std::vector<double>& l) {
    const auto y = primal(l);
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += w[i] * (y[i] - v[i]) * (y[i] - v[i]);
    for (std::size_t i = 0; i < m; ++i) g += l[i] * (y[i] - y[i + 1]);
    return g;
  };
  for (int it = 0; it < 2'000'000; ++it) {
    const auto y = primal(z);
    for (std::size_t i = 0; i < m; ++i) lam[i] = std::max(0.0, z[i] + step * (y[i] - y[i + 1]));
    const double g = dual(lam);
    if (g < g_prev) {
      // Adaptive restart.
      t = 1.0;
      z = lam;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < m; ++i) z[i] = lam[i] + (t - 1.0) / tn * (lam[i] - prev[i]);
      t = tn;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) change = std::max(change, std::abs(lam[i] - prev[i]));
    prev = lam;
    g_prev = g;
    if (it > 10 && change < tol) break;
  }
  return primal(lam);
}

double wasserstein_lp(std::span<const double> a, std::span<const double> x, std::span<const double> b,
                      std::span<const double> y, double p) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t edges = n * m, basis = n + m - 1;
  std::vector<int> pick(edges, 0);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(basis), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<std::pair<std::size_t, std::size_t>> tree;
    for (std::size_t e = 0; e < edges; ++e) {
      if (pick[e]) tree.emplace_back(e / m, e % m);
    }
    // Leaf peeling: repeatedly find a row or column node with one unused edge.
    std::vector<double> supply(a.begin(), a.end()), demand(b.begin(), b.end());
    std::vector<double> flow(tree.size(), 0.0);
    std::vector<char> used(tree.size(), 0);
    bool ok = true;
    for (std::size_t round = 0; round < tree.size() && ok; ++round) {
      bool progressed = false;
      for (std::size_t node = 0; node < n + m && !progressed; ++node) {
        std::size_t count = 0, last = 0;
        for (std::size_t e = 0; e < tree.size(); ++e) {
          if (used[e]) continue;
          const bool touches = node < n ? tree[e].first == node : tree[e].second == node - n;
          if (touches) {
            ++count;
            last = e;
          }
        }
        if (count != 1) continue;
        const auto [i, j] = tree[last];
        const double f = node < n ? supply[i] : demand[j];
        flow[last] = f;
        supply[i] -= f;
        demand[j] -= f;
        used[last] = 1;
        progressed = true;
      }
      if (!progressed) ok = false;  // contains a cycle: not a basis
    }
    if (!ok) continue;
    double cost = 0.0;
    for (std::size_t e = 0; e < tree.size(); ++e) {
      if (flow[e] < -1e-13) {
        ok = false;
        break;
      }
      cost += std::max(0.0, flow[e]) * std::pow(std::abs(x[tree[e].first] - y[tree[e].second]), p);
    }
    for (double s : supply) ok = ok && std::abs(s) < 1e-12;
    for (double d : demand) ok = ok && std::abs(d) < 1e-12;
    if (ok) best = std::min(best, cost);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  if (!std::isfinite(best)) throw std::runtime_error("no feasible basis");
  return std::pow(best, 1.0 / p);
}

Particles random_particles(std::mt19937_64& rng, std::size_t n, double spread, double vmax) {
  std::uniform_real_distribution<double> um(0.5, 1.5), ux(-spread, spread), uv(-vmax, vmax);
  Particles p;
  p.masses.resize(n);
  for (auto& m : p.masses) m = um(rng);
  const double total = std::accumulate(p.masses.begin(), p.masses.end(), 0.0);
  for (auto& m : p.masses) m /= total;
  p.positions.resize(n);
  for (auto& x : p.positions) x = ux(rng);
  std::sort(p.positions.begin(), p.positions.end());
  p.velocities.resize(n);
  for (auto& v : p.velocities) v = uv(rng);
  return p;
}

std::vector<double> dyadic_masses(std::mt19937_64& rng, std::size_t n, int bits) {
  const long long total = 1LL << bits;
  std::uniform_int_distribution<long long> u(1, 3 * total / static_cast<long long>(2 * n));
  std::vector<long long> k(n);
  long long s = total;
  while (s >= total) {
    s = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      k[i] = u(rng);
      s += k[i];
    }
  }
  k[n - 1] = total - s;
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = std::ldexp(static_cast<double>(k[i]), -bits);
  return m;
}

sticky::Ensemble make(const Particles& p, const sticky::Kernel& k) {
  return sticky::Ensemble::create(p.masses, p.positions, p.velocities, k);
}

}  // namespace oracle

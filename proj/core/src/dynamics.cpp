#include "sticky/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sticky/error.hpp"

namespace sticky {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

constexpr int kSamples = 8;

// Dormand-Prince is used while h * rho stays inside its real stability interval.
constexpr double kExplicitStability = 3.0;
constexpr int kMaxRkcStages = 250;

int rkc_stages(double h, double rho) {
  const double s = 1.0 + std::floor(std::sqrt(1.0 + 1.54 * h * rho));
  return static_cast<int>(std::clamp(s, 2.0, static_cast<double>(kMaxRkcStages)));
}

// Longest step the stage cap can keep stable.
double rkc_max_step(double rho) {
  const double s = kMaxRkcStages;
  return (s - 1.0) * (s - 1.0) / (1.54 * rho);
}

double position_scale(std::span<const double> x) {
  double s = 1.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

struct HermiteGap {
  double g;
  double rate;
};

// Cubic Hermite interpolation of one gap over a step of length h.
HermiteGap hermite_gap(double g0, double d0, double g1, double d1, double h, double th) {
  const double t2 = th * th, t3 = t2 * th;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + th, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double p00 = 6 * t2 - 6 * th, p10 = 3 * t2 - 4 * th + 1, p01 = -6 * t2 + 6 * th, p11 = 3 * t2 - 2 * th;
  return {h00 * g0 + h10 * h * d0 + h01 * g1 + h11 * h * d1, (p00 * g0 + p01 * g1) / h + p10 * d0 + p11 * d1};
}

}  // namespace

void drift(std::span<const double> masses, std::span<const double> positions, std::span<const double> psi,
           const Kernel& kernel, std::span<double> out) {
  const std::size_t n = positions.size();
  std::copy(psi.begin(), psi.end(), out.begin());
  if (kernel.family() == KernelFamily::Zero) return;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = positions[i];
    const double mi = masses[i];
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = kernel.big_phi(xi - positions[j]);
      acc += masses[j] * f;
      out[j] += mi * f;
    }
    out[i] -= acc;
  }
}

std::vector<double> drift(const Ensemble& e, const Kernel& kernel) {
  std::vector<double> out(e.size());
  drift(e.masses(), e.positions(), e.natural_velocities(), kernel, out);
  return out;
}

Integrator::Integrator(Kernel kernel, Tolerances tol)
    : kernel_(kernel), tol_(tol), singular_(kernel.family() == KernelFamily::PowerLaw) {}

double Integrator::trial(std::span<const double> x0, std::span<const double> f0, double h,
                         std::span<const double> m, std::span<const double> psi) {
  const std::size_t n = x0.size();
  for (auto& k : k_) k.resize(n);
  y_.resize(n);
  x1_.resize(n);
  err_.resize(n);
  std::copy(f0.begin(), f0.end(), k_[0].begin());
  crossed_ = false;
  auto check_order = [&](std::span<const double> y) {
    if (!singular_) return;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (y[i + 1] < y[i]) crossed_ = true;
    }
  };
  auto stage = [&](int s, auto&& combo) {
    for (std::size_t i = 0; i < n; ++i) y_[i] = x0[i] + h * combo(i);
    check_order(y_);
    drift(m, y_, psi, kernel_, k_[s]);
  };
  const auto& k1 = k_[0];
  const auto& k2 = k_[1];
  const auto& k3 = k_[2];
  const auto& k4 = k_[3];
  const auto& k5 = k_[4];
  const auto& k6 = k_[5];
  const auto& k7 = k_[6];
  stage(1, [&](std::size_t i) { return a21 * k1[i]; });
  stage(2, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
  stage(3, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
  stage(4, [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
  stage(5, [&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
  for (std::size_t i = 0; i < n; ++i) {
    x1_[i] = x0[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  }
  check_order(x1_);
  drift(m, x1_, psi, kernel_, k_[6]);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol_.atol + tol_.rtol * std::max(std::abs(x0[i]), std::abs(x1_[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return err;
}

double Integrator::spectral_radius(std::span<const double> m, std::span<const double> x) const {
  if (kernel_.family() == KernelFamily::Zero) return 0.0;
  const std::size_t n = x.size();
  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = x[j] - x[i];
      if (r == 0.0 && singular_) return std::numeric_limits<double>::infinity();
      const double p = kernel_.phi(r);
      row[i] += m[j] * p;
      row[j] += m[i] * p;
    }
  }
  // The Jacobian is a mass-weighted Laplacian: |J_ii| equals the off-diagonal row sum.
  double rho = 0.0;
  for (double v : row) rho = std::max(rho, 2.0 * v);
  return rho;
}

double Integrator::trial_rkc(std::span<const double> x0, std::span<const double> f0, double h,
                             std::span<const double> m, std::span<const double> psi, double rho) {
  const std::size_t n = x0.size();
  y_.resize(n);
  y_prev_.resize(n);
  y_prev2_.resize(n);
  x1_.resize(n);
  k_[6].resize(n);
  crossed_ = false;
  auto check_order = [&](std::span<const double> y) {
    if (!singular_) return;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (y[i + 1] < y[i]) crossed_ = true;
    }
  };

  const int stages = rkc_stages(h, rho);
  const double s = stages;
  const double w0 = 1.0 + 2.0 / (13.0 * s * s);
  const double t1 = w0 * w0 - 1.0;
  const double t2 = std::sqrt(t1);
  const double arg = s * std::log(w0 + t2);
  const double w1 = std::sinh(arg) * t1 / (std::cosh(arg) * s * t2 - w0 * std::sinh(arg));
  double b_jm1 = 1.0 / (4.0 * w0 * w0), b_jm2 = b_jm1;
  double z_jm1 = w0, z_jm2 = 1.0, dz_jm1 = 1.0, dz_jm2 = 0.0, d2z_jm1 = 0.0, d2z_jm2 = 0.0;

  auto& f = k_[5];
  f.resize(n);
  std::copy(x0.begin(), x0.end(), y_prev2_.begin());
  const double mu1 = w1 * b_jm1;
  for (std::size_t i = 0; i < n; ++i) y_prev_[i] = x0[i] + h * mu1 * f0[i];
  check_order(y_prev_);
  for (int j = 2; j <= stages; ++j) {
    const double z = 2.0 * w0 * z_jm1 - z_jm2;
    const double dz = 2.0 * w0 * dz_jm1 - dz_jm2 + 2.0 * z_jm1;
    const double d2z = 2.0 * w0 * d2z_jm1 - d2z_jm2 + 4.0 * dz_jm1;
    const double b = d2z / (dz * dz);
    const double a_jm1 = 1.0 - z_jm1 * b_jm1;
    const double mu = 2.0 * w0 * b / b_jm1;
    const double nu = -b / b_jm2;
    const double mus = mu * w1 / w0;
    drift(m, y_prev_, psi, kernel_, f);
    for (std::size_t i = 0; i < n; ++i) {
      y_[i] = mu * y_prev_[i] + nu * y_prev2_[i] + (1.0 - mu - nu) * x0[i] + h * mus * (f[i] - a_jm1 * f0[i]);
    }
    check_order(y_);
    std::swap(y_prev2_, y_prev_);
    std::swap(y_prev_, y_);
    b_jm2 = b_jm1;
    b_jm1 = b;
    z_jm2 = z_jm1;
    z_jm1 = z;
    dz_jm2 = dz_jm1;
    dz_jm1 = dz;
    d2z_jm2 = d2z_jm1;
    d2z_jm1 = d2z;
  }
  std::copy(y_prev_.begin(), y_prev_.end(), x1_.begin());
  drift(m, x1_, psi, kernel_, k_[6]);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = 0.8 * (x0[i] - x1_[i]) + 0.4 * h * (f0[i] + k_[6][i]);
    const double sc = tol_.atol + tol_.rtol * std::max(std::abs(x0[i]), std::abs(x1_[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return err;
}

double Integrator::locate_contact(std::span<const double> x0, std::span<const double> f0,
                                  std::span<const double> x1, std::span<const double> f1, double h,
                                  double scale) const {
  const std::size_t n = x0.size();
  const double eps = tol_.contact * scale;
  auto contact_at = [&](double th) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto hg =
          hermite_gap(x0[i + 1] - x0[i], f0[i + 1] - f0[i], x1[i + 1] - x1[i], f1[i + 1] - f1[i], h, th);
      if (hg.g < 0.0 || (hg.g <= eps && hg.rate < 0.0)) return true;
    }
    return false;
  };
  auto contact_end = [&]() {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double g = x1[i + 1] - x1[i];
      if (g < 0.0 || (g <= eps && f1[i + 1] - f1[i] < 0.0)) return true;
    }
    return false;
  };
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= kSamples; ++k) {
    const double th = static_cast<double>(k) / kSamples;
    if (k == kSamples ? contact_end() : contact_at(th)) {
      hi = th;
      break;
    }
    lo = th;
  }
  if (hi < 0.0) return -1.0;
  const double tau = tol_.event * scale;
  while ((hi - lo) * h > tau) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (contact_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

StepResult Integrator::step(Ensemble& e, double t, double dt_max) {
  if (!(dt_max > 0.0)) throw InvalidArgument("step: dt_max must be positive");
  const std::size_t n = e.size();
  const auto m = e.masses();
  const auto psi = e.natural_velocities();
  const std::vector<double> x0(e.positions().begin(), e.positions().end());
  std::vector<double> f0;
  if (cache_x_ == x0 && cache_f_.size() == n) {
    f0 = cache_f_;
  } else {
    f0.resize(n);
    drift(m, x0, psi, kernel_, f0);
  }
  const double scale = position_scale(x0);

  if (h_ <= 0.0) {
    double fmax = 0.0;
    for (double f : f0) fmax = std::max(fmax, std::abs(f));
    h_ = fmax > 0.0 ? 0.01 * scale / fmax : dt_max;
  }

  const double rho = spectral_radius(m, x0);
  // With unbounded phi the approach to contact is tangential and the drift is
  // not Lipschitz there; a step longer than g / closing speed (half the time
  // to contact) can settle on a spurious fixed point instead of the contact.
  double h_contact = std::numeric_limits<double>::infinity();
  if (singular_) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double closing = f0[i] - f0[i + 1];
      if (closing > 0.0) h_contact = std::min(h_contact, (x0[i + 1] - x0[i]) / closing);
    }
  }
  const double h_floor = 1e-15 * std::max(1.0, std::abs(t));
  for (;;) {
    double h = std::min({h_, dt_max, h_contact});
    const bool stiff = rho * h > kExplicitStability;
    if (stiff) h = std::min(h, rkc_max_step(rho));
    // Error exponent: 1/(order + 1) of the lower-order member.
    const double expo = stiff ? 1.0 / 3.0 : 0.2;
    const double err = stiff ? trial_rkc(x0, f0, h, m, psi, rho) : trial(x0, f0, h, m, psi);
    if (crossed_ || !std::isfinite(err) || err > 1.0) {
      double fac = 0.2;
      if (crossed_) {
        fac = 0.5;
      } else if (std::isfinite(err)) {
        fac = std::max(0.2, 0.9 * std::pow(err, -expo));
      }
      h_ = h * fac;
      if (h_ < h_floor) {
        std::ostringstream os;
        os << "step size underflow at t=" << t << " (h=" << h_ << ", " << n << " clusters)";
        throw NumericalAbort(os.str());
      }
      continue;
    }
    const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -expo)));
    const std::vector<double> x1 = x1_;
    const std::vector<double> f1 = k_[6];
    const double th = locate_contact(x0, f0, x1, f1, h, scale);
    if (th < 0.0) {
      h_ = h < h_ ? std::max(h_, h * fac) : h * fac;
      e.set_positions(x1);
      e.set_velocities(f1);
      cache_x_ = x1;
      cache_f_ = f1;
      return {h, {}};
    }
    // Redo the step up to the contact with the same scheme.
    const double hs = th * h;
    if (stiff) {
      trial_rkc(x0, f0, hs, m, psi, rho);
    } else {
      trial(x0, f0, hs, m, psi);
    }
    e.set_positions(x1_);
    e.set_velocities(k_[6]);
    StepResult r{hs, resolve_contacts(e, t + hs)};
    if (r.events.empty()) {
      cache_x_.assign(x1_.begin(), x1_.end());
      cache_f_ = k_[6];
    } else {
      cache_x_.clear();
    }
    return r;
  }
}

std::vector<MergeEvent> Integrator::resolve_contacts(Ensemble& e, double t) {
  std::vector<MergeEvent> all;
  for (std::size_t round = 0; e.size() > 1; ++round) {
    if (round > e.original_size() + 1) throw NumericalAbort("contact cascade did not settle");
    const auto x = e.positions();
    const auto v = e.velocities();
    const auto m = e.masses();
    const std::size_t n = e.size();
    const double scale = position_scale(x);
    // Positions carry rounding of a few ulps of the scale, which the
    // localised contact cannot see past.
    const double eps = tol_.contact * scale + 16.0 * std::numeric_limits<double>::epsilon() * scale;
    const double tau = tol_.event * scale;

    std::vector<char> touching(n - 1, 0);
    bool any = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double g = x[i + 1] - x[i];
      const double closing = std::max(0.0, v[i] - v[i + 1]);
      if (g <= eps + 2.0 * tau * closing) {
        touching[i] = 1;
        any = true;
      }
    }
    if (!any) break;

    std::vector<IndexRange> blocks;
    for (std::size_t a = 0; a + 1 < n;) {
      if (!touching[a]) {
        ++a;
        continue;
      }
      std::size_t b = a;
      while (b + 1 < n && touching[b]) ++b;
      // Run of clusters a..b (inclusive).
      auto pooled = pava_blocks(m.subspan(a, b - a + 1), v.subspan(a, b - a + 1));
      // Overlapping neighbours always stick.
      std::vector<IndexRange> joined;
      for (const auto& r : pooled) {
        const IndexRange abs{a + r.begin, a + r.end};
        if (!joined.empty() && x[abs.begin] < x[abs.begin - 1]) {
          joined.back().end = abs.end;
        } else {
          joined.push_back(abs);
        }
      }
      for (const auto& r : joined) {
        if (r.size() > 1) blocks.push_back(r);
      }
      a = b + 1;
    }
    if (blocks.empty()) break;

    std::vector<MergeEvent> round_events;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      const IndexRange r = *it;
      MergeEvent ev;
      ev.time = t;
      ev.clusters = r;
      ev.originals = {e.offsets()[r.begin], e.offsets()[r.end]};
      double ms = 0.0, mx = 0.0, mv = 0.0;
      for (std::size_t c = r.begin; c < r.end; ++c) {
        ev.pre_masses.push_back(m[c]);
        ev.pre_velocities.push_back(v[c]);
        ms += m[c];
        mx += m[c] * x[c];
        mv += m[c] * v[c];
      }
      ev.position = std::clamp(mx / ms, std::min(x[r.begin], x[r.end - 1]), std::max(x[r.begin], x[r.end - 1]));
      ev.post_velocity = mv / ms;
      e.merge(r, ev.position, ev.post_velocity);
      ev.post_psi = e.natural_velocities()[r.begin];
      round_events.push_back(std::move(ev));
    }
    std::reverse(round_events.begin(), round_events.end());
    for (auto& ev : round_events) all.push_back(std::move(ev));
    e.set_velocities(drift(e, kernel_));
  }
  return all;
}

StepResult step(Ensemble& e, const Kernel& kernel, double t, double dt_max, const Tolerances& tol) {
  Integrator integ(kernel, tol);
  return integ.step(e, t, dt_max);
}

std::vector<double> snapshot_times(double t_end, double snapshot_dt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
  if (!(snapshot_dt > 0.0)) throw InvalidArgument("snapshot_dt must be positive");
  std::vector<double> ts{0.0};
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * snapshot_dt;
    if (t >= t_end * (1.0 - 1e-12)) break;
    ts.push_back(t);
  }
  ts.push_back(t_end);
  return ts;
}

namespace {

struct Sampler {
  std::vector<double> phi;  // per original cell
  double v2 = 0.0;

  void take(const Ensemble& e) {
    phi.resize(e.original_size());
    const auto off = e.offsets();
    const auto psi = e.natural_velocities();
    const auto v = e.velocities();
    for (std::size_t c = 0; c < e.size(); ++c) {
      const double conv = psi[c] - v[c];
      for (std::size_t i = off[c]; i < off[c + 1]; ++i) phi[i] = conv;
    }
    v2 = e.velocity_norm2();
  }
};

}  // namespace

SimulationRecord simulate(Ensemble initial, const Kernel& kernel, double t_end, double snapshot_dt,
                          const Tolerances& tol) {
  const auto times = snapshot_times(t_end, snapshot_dt);
  SimulationRecord rec;
  Integrator integ(kernel, tol);
  Ensemble e = std::move(initial);
  e.set_velocities(drift(e, kernel));
  for (auto& ev : integ.resolve_contacts(e, 0.0)) rec.events.push_back(std::move(ev));

  const std::size_t n0 = e.original_size();
  std::vector<double> acc_phi(n0, 0.0);
  double acc_v2 = 0.0;
  Sampler last;
  last.take(e);
  double t_last = 0.0;
  auto accumulate_to = [&](double ts) {
    const double dt = ts - t_last;
    for (std::size_t i = 0; i < n0; ++i) acc_phi[i] += dt * last.phi[i];
    acc_v2 += dt * last.v2;
    t_last = ts;
    last.take(e);
  };

  rec.times.push_back(0.0);
  rec.snapshots.push_back(e);
  rec.phi_integral.push_back(acc_phi);
  rec.v_norm2_integral.push_back(0.0);

  double t = 0.0;
  std::size_t stalled = 0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (t < target) {
      const double remaining = target - t;
      StepResult r = integ.step(e, t, remaining);
      if (++rec.steps > tol.max_steps) throw NumericalAbort("maximum number of steps exceeded");
      const double t_new = r.dt >= remaining ? target : std::min(target, t + r.dt);
      if (r.events.empty() && t_new - t <= 1e-14 * std::max(1.0, std::abs(t))) {
        if (++stalled > 1000) throw NumericalAbort("integrator stalled near a contact");
      } else {
        stalled = 0;
      }
      t = t_new;
      if (!r.events.empty()) {
        accumulate_to(t);
        for (auto& ev : r.events) rec.events.push_back(std::move(ev));
      }
    }
    accumulate_to(target);
    rec.times.push_back(target);
    rec.snapshots.push_back(e);
    rec.phi_integral.push_back(acc_phi);
    rec.v_norm2_integral.push_back(acc_v2);
  }
  return rec;
}

}  // namespace sticky

namespace sticky {

std::vector<Ensemble> evolve_to(Ensemble initial, const Kernel& kernel, std::span<const double> times,
                                const Tolerances& tol) {
  Integrator integ(kernel, tol);
  Ensemble e = std::move(initial);
  e.set_velocities(drift(e, kernel));
  integ.resolve_contacts(e, 0.0);
  std::vector<Ensemble> out;
  double t = 0.0;
  std::size_t steps = 0;
  for (double target : times) {
    if (target < t) throw InvalidArgument("evolve_to: times must be nondecreasing and nonnegative");
    while (t < target) {
      const double remaining = target - t;
      const StepResult r = integ.step(e, t, remaining);
      if (++steps > tol.max_steps) throw NumericalAbort("maximum number of steps exceeded");
      t = r.dt >= remaining ? target : std::min(target, t + r.dt);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace sticky

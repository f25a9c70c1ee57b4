#include "sticky/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sticky/error.hpp"

namespace sticky {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
  }
}

void require_same_length(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw InvalidArgument("masses, positions and velocities differ in length");
}

void require_positive_masses(std::span<const double> m) {
  for (double x : m) {
    if (!(x > 0.0)) throw InvalidArgument("masses must be positive");
  }
}

void require_sorted(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] < x[i - 1]) throw InvalidArgument("positions must be nondecreasing");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

QuantileFunction::QuantileFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("QuantileFunction: no cells");
  if (breakpoints_.size() + 1 != values_.size()) {
    throw InvalidArgument("QuantileFunction: need one fewer breakpoint than values");
  }
  double prev = 0.0;
  for (double b : breakpoints_) {
    if (!(b > prev) || !(b < 1.0)) throw InvalidArgument("QuantileFunction: breakpoints must increase inside (0,1)");
    prev = b;
  }
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] < values_[i - 1]) throw InvalidArgument("QuantileFunction: values must be nondecreasing");
  }
}

QuantileFunction QuantileFunction::from_cells(std::span<const double> masses, std::span<const double> values) {
  if (masses.size() != values.size()) throw InvalidArgument("QuantileFunction: masses and values differ in length");
  require_positive_masses(masses);
  double total = 0.0;
  for (double m : masses) total += m;
  std::vector<double> bp;
  bp.reserve(masses.size());
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < masses.size(); ++i) {
    c += masses[i];
    bp.push_back(c / total);
  }
  return QuantileFunction(std::move(bp), std::vector<double>(values.begin(), values.end()));
}

std::vector<double> QuantileFunction::cell_masses() const {
  std::vector<double> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = upper(i) - lower(i);
  return m;
}

std::size_t QuantileFunction::cell_at(double m) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), m);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

// ---------------------------------------------------------------------------

std::vector<double> natural_velocities(std::span<const double> masses, std::span<const double> positions,
                                       std::span<const double> velocities, const Kernel& kernel) {
  require_same_length(masses.size(), positions.size(), velocities.size());
  require_positive_masses(masses);
  const std::size_t n = masses.size();
  std::vector<double> psi(velocities.begin(), velocities.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = kernel.big_phi(positions[i] - positions[j]);
      psi[i] += masses[j] * f;
      psi[j] -= masses[i] * f;
    }
  }
  return psi;
}

std::vector<double> velocities_for_natural(std::span<const double> masses, std::span<const double> positions,
                                           std::span<const double> psi, const Kernel& kernel) {
  require_same_length(masses.size(), positions.size(), psi.size());
  const std::vector<double> zero(psi.size(), 0.0);
  const auto conv = sticky::natural_velocities(masses, positions, zero, kernel);
  std::vector<double> v(psi.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = psi[i] - conv[i];
  return v;
}

// ---------------------------------------------------------------------------

Ensemble Ensemble::create(std::span<const double> masses, std::span<const double> positions,
                          std::span<const double> velocities, const Kernel& kernel) {
  require_same_length(masses.size(), positions.size(), velocities.size());
  if (masses.empty()) throw InvalidArgument("ensemble needs at least one particle");
  require_finite(masses, "masses");
  require_finite(positions, "positions");
  require_finite(velocities, "velocities");
  require_positive_masses(masses);
  require_sorted(positions);
  double total = 0.0;
  for (double m : masses) total += m;
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("masses must sum to 1");

  const std::size_t n = masses.size();
  auto orig = std::make_shared<Originals>();
  orig->masses.assign(masses.begin(), masses.end());
  orig->positions.assign(positions.begin(), positions.end());
  orig->velocities.assign(velocities.begin(), velocities.end());

  Ensemble e;
  e.offsets_.push_back(0);
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || positions[i] != positions[i - 1]) e.offsets_.push_back(i);
  }

  // Coincident particles start as one cluster moving with the mean velocity.
  for (std::size_t c = 0; c + 1 < e.offsets_.size(); ++c) {
    const std::size_t b = e.offsets_[c], en = e.offsets_[c + 1];
    if (en - b < 2) continue;
    double ms = 0.0, p = 0.0;
    for (std::size_t i = b; i < en; ++i) {
      ms += masses[i];
      p += masses[i] * velocities[i];
    }
    std::fill(orig->velocities.begin() + static_cast<std::ptrdiff_t>(b),
              orig->velocities.begin() + static_cast<std::ptrdiff_t>(en), p / ms);
  }

  orig->psi = sticky::natural_velocities(orig->masses, orig->positions, orig->velocities, kernel);
  for (std::size_t c = 0; c + 1 < e.offsets_.size(); ++c) {
    const std::size_t b = e.offsets_[c], en = e.offsets_[c + 1];
    if (en - b < 2) continue;
    double ms = 0.0, p = 0.0;
    for (std::size_t i = b; i < en; ++i) {
      ms += masses[i];
      p += masses[i] * orig->psi[i];
    }
    std::fill(orig->psi.begin() + static_cast<std::ptrdiff_t>(b), orig->psi.begin() + static_cast<std::ptrdiff_t>(en),
              p / ms);
  }

  orig->cumulative.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) orig->cumulative[i + 1] = orig->cumulative[i] + masses[i];

  e.orig_ = std::move(orig);
  e.rebuild_cluster_aggregates();
  for (std::size_t c = 0; c < e.size(); ++c) {
    e.x_[c] = positions[e.offsets_[c]];
    e.v_[c] = e.orig_->velocities[e.offsets_[c]];
  }
  return e;
}

Ensemble Ensemble::restore(std::span<const double> original_masses, std::span<const double> original_positions,
                           std::span<const double> original_velocities,
                           std::span<const double> original_natural_velocities, std::span<const std::size_t> offsets,
                           std::span<const double> positions, std::span<const double> velocities) {
  const std::size_t n = original_masses.size();
  require_same_length(n, original_positions.size(), original_velocities.size());
  if (original_natural_velocities.size() != n) throw InvalidArgument("natural velocities differ in length");
  require_positive_masses(original_masses);
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != n) {
    throw InvalidArgument("cluster offsets must run from 0 to the number of originals");
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] <= offsets[i - 1]) throw InvalidArgument("cluster offsets must increase strictly");
  }
  if (positions.size() + 1 != offsets.size() || velocities.size() + 1 != offsets.size()) {
    throw InvalidArgument("cluster data does not match the offsets");
  }
  require_sorted(positions);

  auto orig = std::make_shared<Originals>();
  orig->masses.assign(original_masses.begin(), original_masses.end());
  orig->positions.assign(original_positions.begin(), original_positions.end());
  orig->velocities.assign(original_velocities.begin(), original_velocities.end());
  orig->psi.assign(original_natural_velocities.begin(), original_natural_velocities.end());
  orig->cumulative.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) orig->cumulative[i + 1] = orig->cumulative[i] + original_masses[i];

  Ensemble e;
  e.orig_ = std::move(orig);
  e.offsets_.assign(offsets.begin(), offsets.end());
  e.rebuild_cluster_aggregates();
  e.x_.assign(positions.begin(), positions.end());
  e.v_.assign(velocities.begin(), velocities.end());
  return e;
}

void Ensemble::rebuild_cluster_aggregates() {
  const std::size_t nc = offsets_.size() - 1;
  m_.assign(nc, 0.0);
  psi_.assign(nc, 0.0);
  x_.resize(nc);
  v_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double ms = 0.0, p = 0.0;
    for (std::size_t i = offsets_[c]; i < offsets_[c + 1]; ++i) {
      ms += orig_->masses[i];
      p += orig_->masses[i] * orig_->psi[i];
    }
    m_[c] = ms;
    psi_[c] = offsets_[c + 1] - offsets_[c] == 1 ? orig_->psi[offsets_[c]] : p / ms;
  }
}

std::vector<std::size_t> Ensemble::lineage() const {
  std::vector<std::size_t> l(original_size());
  for (std::size_t c = 0; c < size(); ++c) {
    for (std::size_t i = offsets_[c]; i < offsets_[c + 1]; ++i) l[i] = c;
  }
  return l;
}

std::vector<double> Ensemble::positions_by_original() const {
  std::vector<double> out(original_size());
  for (std::size_t c = 0; c < size(); ++c) {
    for (std::size_t i = offsets_[c]; i < offsets_[c + 1]; ++i) out[i] = x_[c];
  }
  return out;
}

std::vector<double> Ensemble::velocities_by_original() const {
  std::vector<double> out(original_size());
  for (std::size_t c = 0; c < size(); ++c) {
    for (std::size_t i = offsets_[c]; i < offsets_[c + 1]; ++i) out[i] = v_[c];
  }
  return out;
}

double Ensemble::total_mass() const noexcept {
  double s = 0.0;
  for (double m : m_) s += m;
  return s;
}

double Ensemble::momentum() const noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < size(); ++c) s += m_[c] * v_[c];
  return s;
}

double Ensemble::velocity_norm2() const noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < size(); ++c) s += m_[c] * v_[c] * v_[c];
  return s;
}

void Ensemble::set_positions(std::span<const double> x) {
  if (x.size() != size()) throw InvalidArgument("set_positions: size mismatch");
  std::copy(x.begin(), x.end(), x_.begin());
}

void Ensemble::set_velocities(std::span<const double> v) {
  if (v.size() != size()) throw InvalidArgument("set_velocities: size mismatch");
  std::copy(v.begin(), v.end(), v_.begin());
}

void Ensemble::merge(IndexRange r, double position, double velocity) {
  if (r.end > size() || r.size() < 2) throw InvalidArgument("merge: need at least two clusters in range");
  const auto b = static_cast<std::ptrdiff_t>(r.begin);
  const auto e = static_cast<std::ptrdiff_t>(r.end);
  offsets_.erase(offsets_.begin() + b + 1, offsets_.begin() + e);
  double ms = 0.0, p = 0.0;
  for (std::size_t i = offsets_[r.begin]; i < offsets_[r.begin + 1]; ++i) {
    ms += orig_->masses[i];
    p += orig_->masses[i] * orig_->psi[i];
  }
  m_[r.begin] = ms;
  psi_[r.begin] = p / ms;
  x_[r.begin] = position;
  v_[r.begin] = velocity;
  m_.erase(m_.begin() + b + 1, m_.begin() + e);
  psi_.erase(psi_.begin() + b + 1, psi_.begin() + e);
  x_.erase(x_.begin() + b + 1, x_.begin() + e);
  v_.erase(v_.begin() + b + 1, v_.begin() + e);
}

// ---------------------------------------------------------------------------

QuantileFunction to_quantile(const Ensemble& e) {
  const auto cum = e.cumulative_mass();
  const double total = cum.back();
  std::vector<double> bp;
  bp.reserve(e.size());
  for (std::size_t c = 1; c < e.size(); ++c) bp.push_back(cum[e.offsets()[c]] / total);
  const auto x = e.positions();
  return QuantileFunction(std::move(bp), std::vector<double>(x.begin(), x.end()));
}

QuantileFunction to_quantile_original(const Ensemble& e) {
  const auto cum = e.cumulative_mass();
  const double total = cum.back();
  std::vector<double> bp;
  bp.reserve(e.original_size());
  for (std::size_t i = 1; i < e.original_size(); ++i) bp.push_back(cum[i] / total);
  return QuantileFunction(std::move(bp), e.positions_by_original());
}

double convolve_Phi(const Ensemble& e, const Kernel& kernel, double at) {
  double s = 0.0;
  const auto m = e.masses();
  const auto x = e.positions();
  for (std::size_t j = 0; j < e.size(); ++j) s += m[j] * kernel.big_phi(at - x[j]);
  return s;
}

}  // namespace sticky

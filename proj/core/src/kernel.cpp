#include "sticky/kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sticky/error.hpp"

namespace sticky {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// s + expm1(-s) for s >= 0 without cancellation near the origin.
double x_plus_expm1_neg(double s) {
  if (s < 0.05) {
    // s^2/2 - s^3/6 + s^4/24 - ...
    double term = s * s / 2.0;
    double sum = 0.0;
    for (int k = 2; k < 14; ++k) {
      sum += term;
      term *= -s / (k + 1);
    }
    return sum;
  }
  return s + std::expm1(-s);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string("kernel parameter '") + what + "' must be positive and finite");
  }
}

}  // namespace

Kernel::Kernel(KernelFamily f, double p0, double p1, double p2) : family_(f), p0_(p0), p1_(p1), p2_(p2) {
  if (f == KernelFamily::PowerLaw) {
    scale_ = p0 / (1.0 - p1);
    phi_R_ = scale_ * std::pow(p2, 1.0 - p1);
    q_ = p0 * std::pow(p2, -p1);
  }
}

Kernel Kernel::zero() { return Kernel(KernelFamily::Zero, 0.0, 0.0, 0.0); }

Kernel Kernel::all_to_all(double K) {
  require_positive(K, "K");
  return Kernel(KernelFamily::AllToAll, K, 0.0, 0.0);
}

Kernel Kernel::power_law(double c, double beta, double R) {
  require_positive(c, "c");
  require_positive(R, "R");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("kernel parameter 'beta' must lie in (0, 1)");
  }
  return Kernel(KernelFamily::PowerLaw, c, beta, R);
}

Kernel Kernel::exponential(double a) {
  require_positive(a, "a");
  return Kernel(KernelFamily::Exponential, a, 0.0, 0.0);
}

Kernel Kernel::compact_bump(double radius, double height) {
  require_positive(radius, "radius");
  if (!(height >= 0.0) || !std::isfinite(height)) {
    throw InvalidArgument("kernel parameter 'height' must be nonnegative and finite");
  }
  return Kernel(KernelFamily::CompactBump, radius, height, 0.0);
}

std::string Kernel::name() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::Zero: os << "zero"; break;
    case KernelFamily::AllToAll: os << "all_to_all(K=" << p0_ << ")"; break;
    case KernelFamily::PowerLaw: os << "power_law(c=" << p0_ << ", beta=" << p1_ << ", R=" << p2_ << ")"; break;
    case KernelFamily::Exponential: os << "exponential(a=" << p0_ << ")"; break;
    case KernelFamily::CompactBump: os << "compact_bump(radius=" << p0_ << ", height=" << p1_ << ")"; break;
  }
  return os.str();
}

double Kernel::phi(double r) const {
  const double s = std::abs(r);
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::AllToAll: return p0_;
    case KernelFamily::PowerLaw:
      if (s == 0.0) throw SingularEvaluation("power-law kernel is singular at r = 0");
      if (s <= p2_) return p0_ * (p1_ == 0.5 ? 1.0 / std::sqrt(s) : std::pow(s, -p1_));
      return q_ * std::exp(p2_ - s);
    case KernelFamily::Exponential: return p0_ * std::exp(-s);
    case KernelFamily::CompactBump: return s <= p0_ ? p1_ : 0.0;
  }
  return 0.0;
}

double Kernel::w_phi_abs(double s) const noexcept {
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::AllToAll: return 0.5 * p0_ * s * s;
    case KernelFamily::PowerLaw: {
      const double c = p0_, beta = p1_, R = p2_;
      if (s <= R) return c * std::pow(s, 2.0 - beta) / ((1.0 - beta) * (2.0 - beta));
      const double w_R = c * std::pow(R, 2.0 - beta) / ((1.0 - beta) * (2.0 - beta));
      const double phi_R = c * std::pow(R, 1.0 - beta) / (1.0 - beta);
      const double q = c * std::pow(R, -beta);
      const double u = s - R;
      return w_R + phi_R * u + q * x_plus_expm1_neg(u);
    }
    case KernelFamily::Exponential: return p0_ * x_plus_expm1_neg(s);
    case KernelFamily::CompactBump: {
      const double h = p1_, rho = p0_;
      if (s <= rho) return 0.5 * h * s * s;
      return 0.5 * h * rho * rho + h * rho * (s - rho);
    }
  }
  return 0.0;
}

double Kernel::w_phi(double x) const { return w_phi_abs(std::abs(x)); }

double Kernel::sup_big_phi() const noexcept {
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::AllToAll: return kInf;
    case KernelFamily::PowerLaw:
      return p0_ * std::pow(p2_, 1.0 - p1_) / (1.0 - p1_) + p0_ * std::pow(p2_, -p1_);
    case KernelFamily::Exponential: return p0_;
    case KernelFamily::CompactBump: return p1_ * p0_;
  }
  return 0.0;
}

bool Kernel::fat_tailed() const noexcept { return family_ == KernelFamily::AllToAll; }

bool Kernel::reciprocal_phi_integrable_at_zero() const noexcept {
  // Bounded phi gives Phi(x) <= phi(0) x, so 1/Phi is not integrable.
  return family_ == KernelFamily::PowerLaw;
}

double Kernel::kink() const noexcept {
  switch (family_) {
    case KernelFamily::PowerLaw: return p2_;
    case KernelFamily::CompactBump: return p0_;
    default: return 0.0;
  }
}

double Kernel::inv_big_phi(double y) const {
  if (std::isnan(y)) throw InvalidArgument("inv_big_phi: NaN argument");
  if (y < 0.0) return -inv_big_phi(-y);
  if (y >= sup_big_phi()) {
    std::ostringstream os;
    os << "inv_big_phi: " << y << " is outside the range of Phi for " << name() << " (sup " << sup_big_phi() << ")";
    throw RangeError(os.str());
  }
  switch (family_) {
    case KernelFamily::Zero: break;  // unreachable: sup is 0
    case KernelFamily::AllToAll: return y / p0_;
    case KernelFamily::PowerLaw: {
      const double c = p0_, beta = p1_, R = p2_;
      const double phi_R = c * std::pow(R, 1.0 - beta) / (1.0 - beta);
      if (y <= phi_R) return std::pow((1.0 - beta) * y / c, 1.0 / (1.0 - beta));
      const double q = c * std::pow(R, -beta);
      return R - std::log1p(-(y - phi_R) / q);
    }
    case KernelFamily::Exponential: return -std::log1p(-y / p0_);
    case KernelFamily::CompactBump: return y / p1_;
  }
  return 0.0;
}

}  // namespace sticky

#pragma once

#include <cmath>
#include <string>

namespace sticky {

enum class KernelFamily { Zero, AllToAll, PowerLaw, Exponential, CompactBump };

/// Communication protocol phi together with its primitive Phi, the
/// potential W (primitive of Phi) and the inverse of Phi on [0, sup Phi).
///
/// Families and their parameters:
///   Zero                      phi = 0
///   AllToAll(K)               phi = K
///   PowerLaw(c, beta, R)      phi = c r^-beta on (0, R], c R^-beta e^-(r-R) beyond
///   Exponential(a)            phi = a e^-|r|
///   CompactBump(radius, h)    phi = h 1{|r| <= radius}
///
/// Every quantity is closed-form. Kernel values are immutable.
class Kernel {
 public:
  static Kernel zero();
  static Kernel all_to_all(double K);
  static Kernel power_law(double c, double beta, double R);
  static Kernel exponential(double a);
  static Kernel compact_bump(double radius, double height);

  KernelFamily family() const noexcept { return family_; }
  std::string name() const;

  /// Parameter accessors; meaning depends on the family (see above).
  double K() const noexcept { return p0_; }
  double c() const noexcept { return p0_; }
  double beta() const noexcept { return p1_; }
  double R() const noexcept { return p2_; }
  double a() const noexcept { return p0_; }
  double radius() const noexcept { return p0_; }
  double height() const noexcept { return p1_; }

  /// phi(|r|). Throws SingularEvaluation for PowerLaw at r == 0.
  double phi(double r) const;
  /// Odd primitive, Phi(0) = 0.
  double big_phi(double x) const noexcept {
    return x < 0.0 ? -big_phi_abs(-x) : big_phi_abs(x);
  }
  /// Even convex primitive of Phi, W(0) = 0.
  double w_phi(double x) const;
  /// x with Phi(x) = y, extended oddly to y < 0.
  /// Throws RangeError when |y| >= sup Phi.
  double inv_big_phi(double y) const;

  /// lim_{x -> inf} Phi(x); +inf for fat tails.
  double sup_big_phi() const noexcept;
  /// ||phi||_L1(R) = 2 sup Phi; +inf for fat tails.
  double l1_norm() const noexcept { return 2.0 * sup_big_phi(); }
  /// True when Phi is unbounded (phi not integrable at infinity).
  bool fat_tailed() const noexcept;
  /// True iff int_0^1 dx / Phi(x) < inf. False for the zero kernel.
  bool reciprocal_phi_integrable_at_zero() const noexcept;

  /// Location r > 0 where phi is not smooth, or 0 when there is none.
  double kink() const noexcept;

 private:
  Kernel(KernelFamily f, double p0, double p1, double p2);

  // |x| >= 0 versions.
  // Inline: this is the inner loop of the drift.
  double big_phi_abs(double s) const noexcept {
    switch (family_) {
      case KernelFamily::Zero: return 0.0;
      case KernelFamily::AllToAll: return p0_ * s;
      case KernelFamily::PowerLaw:
        if (s <= p2_) return scale_ * (p1_ == 0.5 ? std::sqrt(s) : std::pow(s, 1.0 - p1_));
        // Phi(R) + q (1 - e^-(s-R)); the cancellation is absolute and far below Phi(R).
        return (phi_R_ + q_) - q_ * std::exp(p2_ - s);
      case KernelFamily::Exponential: return -p0_ * std::expm1(-s);
      case KernelFamily::CompactBump: return p1_ * (s < p0_ ? s : p0_);
    }
    return 0.0;
  }
  double w_phi_abs(double s) const noexcept;

  KernelFamily family_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  double p2_ = 0.0;
  // PowerLaw constants: c / (1 - beta), Phi(R) and phi(R).
  double scale_ = 0.0;
  double phi_R_ = 0.0;
  double q_ = 0.0;
};

}  // namespace sticky

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gradsync {

enum class PotentialFamily { Quartic, ShiftedQuadratic, Custom };

const char* to_string(PotentialFamily family);

/// A radius in [0, inf]. The infinite value is a marker, not a large float,
/// so that u(inf) = inf branches are exact.
class ExtendedRadius {
 public:
  constexpr ExtendedRadius(double r) : value_(r), infinite_(false) {}  // NOLINT implicit
  static constexpr ExtendedRadius infinity() { return ExtendedRadius(); }

  constexpr bool is_infinite() const { return infinite_; }
  /// Finite value; +inf as a double when infinite.
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

 private:
  constexpr ExtendedRadius() : value_(0.0), infinite_(true) {}
  double value_;
  bool infinite_;
};

/// Radial profile u(s), s = |x|^2, and the potential U(x) = u(|x|^2).
///
/// Every family is a polynomial in s, so u' and u'' are evaluated exactly
/// from precomputed coefficient vectors.
///   Quartic{a}:          u(s) = a (s - 1)^2
///   ShiftedQuadratic{a}: u(s) = a s          (U(x) = a |x|^2; no minimum at R* = 1)
///   Custom{c0, c1, ...}: u(s) = c0 + c1 s + c2 s^2 + ...
///
/// Immutable after construction and safe to share between threads.
class RadialPotential {
 public:
  static RadialPotential quartic(double a = 0.5);
  static RadialPotential shifted_quadratic(double a);
  static RadialPotential custom(std::vector<double> coefficients);

  PotentialFamily family() const { return family_; }
  /// Family parameter a; NaN for Custom.
  double a() const { return a_; }
  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double r_star() const { return 1.0; }

  double u(double s) const { return horner(c_, s); }
  double du(double s) const { return horner(dc_, s); }
  double d2u(double s) const { return horner(d2c_, s); }

  double U(std::span<const double> x) const { return u(norm_sq(x)); }

  /// grad U(x) = 2 u'(|x|^2) x, written into `out` (same length as x).
  void grad_U(std::span<const double> x, std::span<double> out) const {
    const double g = 2.0 * du(norm_sq(x));
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g * x[i];
  }

  std::string describe() const;

  static double norm_sq(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  }

 private:
  RadialPotential(PotentialFamily family, double a, std::vector<double> c);

  static double horner(const std::vector<double>& c, double s) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
    return acc;
  }

  PotentialFamily family_;
  double a_;
  std::vector<double> c_;
  std::vector<double> dc_;
  std::vector<double> d2c_;
};

double eval_u(const RadialPotential& p, double s);
std::vector<double> grad_U(const RadialPotential& p, std::span<const double> x);

/// V(r1, r2, r3) = 2 min{ u(r1^2) - u(min{r2^2, 1}), u(r3^2) - u(max{r2^2, 1}) }.
/// Requires 0 <= r1 < r2 < r3 and r1 < 1 < r3; throws PreconditionError otherwise.
double quasi_potential(const RadialPotential& p, double r1, double r2, ExtendedRadius r3);

struct ContractionCertificate {
  double radius;  // the flow maps all of R^d into the closed ball of this radius...
  double time;    // ...within this time.
};

struct NotContracting {
  std::string reason;
};

using ContractionResult = std::variant<ContractionCertificate, NotContracting>;

/// Decides whether the tail integral of |grad U|^{-1} converges. For a
/// polynomial u of degree n in s, |grad U| ~ r^{2n-1}, so the integral is
/// finite iff n >= 2 with a positive leading coefficient.
ContractionResult strong_contraction_radius(const RadialPotential& p, double margin = 0.5);

/// Time for the noiseless radial flow to bring |x| from infinity down to
/// `radius`: int_radius^inf dr / (2 r u'(r^2)). Requires u' > 0 on [radius^2, inf).
double contraction_time(const RadialPotential& p, double radius);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::optional<double> witness;  // offending s on failure
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  double one_sided_lipschitz = 0.0;  // sampled constant L with <x-y, -gradU(x)+gradU(y)> <= L|x-y|^2

  bool all_passed() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Sampled checks of the standing assumptions on [0, s_max]: convexity,
/// unique minimum at s = 1, one-sided Lipschitz drift, and strong contraction.
ValidationReport validate(const RadialPotential& p, double s_max = 16.0, int samples = 16001);

}  // namespace gradsync

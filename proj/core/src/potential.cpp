#include "gradsync/potential.hpp"

#include <algorithm>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "gradsync/error.hpp"

namespace gradsync {

namespace {

std::vector<double> derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

double leading(const std::vector<double>& c) { return c.back(); }

}  // namespace

const char* to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::Quartic:
      return "quartic";
    case PotentialFamily::ShiftedQuadratic:
      return "shifted_quadratic";
    case PotentialFamily::Custom:
      return "custom";
  }
  return "unknown";
}

RadialPotential::RadialPotential(PotentialFamily family, double a, std::vector<double> c)
    : family_(family), a_(a), c_(std::move(c)) {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  if (c_.empty()) c_.push_back(0.0);
  dc_ = derivative(c_);
  d2c_ = derivative(dc_);
}

RadialPotential RadialPotential::quartic(double a) {
  if (!(a > 0.0)) throw PreconditionError("potential", "Quartic requires a > 0");
  return RadialPotential(PotentialFamily::Quartic, a, {a, -2.0 * a, a});
}

RadialPotential RadialPotential::shifted_quadratic(double a) {
  if (!(a > 0.0)) throw PreconditionError("potential", "ShiftedQuadratic requires a > 0");
  return RadialPotential(PotentialFamily::ShiftedQuadratic, a, {0.0, a});
}

RadialPotential RadialPotential::custom(std::vector<double> coefficients) {
  if (coefficients.empty())
    throw PreconditionError("potential", "Custom requires at least one coefficient");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw PreconditionError("potential", "non-finite coefficient");
  return RadialPotential(PotentialFamily::Custom, std::numeric_limits<double>::quiet_NaN(),
                         std::move(coefficients));
}

std::string RadialPotential::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  if (family_ == PotentialFamily::Custom) {
    os << "{";
    for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
    os << "}";
  } else {
    os << "{a=" << a_ << "}";
  }
  return os.str();
}

double eval_u(const RadialPotential& p, double s) {
  if (s < 0.0) throw PreconditionError("potential", "eval_u requires s >= 0");
  return p.u(s);
}

std::vector<double> grad_U(const RadialPotential& p, std::span<const double> x) {
  if (x.empty()) throw PreconditionError("potential", "grad_U requires d >= 1");
  std::vector<double> out(x.size());
  p.grad_U(x, out);
  return out;
}

double quasi_potential(const RadialPotential& p, double r1, double r2, ExtendedRadius r3) {
  if (!(r1 >= 0.0)) throw PreconditionError("potential", "quasi_potential requires 0 <= r1");
  if (!(r1 < r2)) throw PreconditionError("potential", "quasi_potential requires r1 < r2");
  if (!(r2 < r3.value())) throw PreconditionError("potential", "quasi_potential requires r2 < r3");
  if (!(r1 < 1.0)) throw PreconditionError("potential", "quasi_potential requires r1 < 1");
  if (!(1.0 < r3.value())) throw PreconditionError("potential", "quasi_potential requires 1 < r3");

  const double s2 = r2 * r2;
  const double inner = p.u(r1 * r1) - p.u(std::min(s2, 1.0));
  if (r3.is_infinite()) return 2.0 * inner;
  const double outer = p.u(r3.value() * r3.value()) - p.u(std::max(s2, 1.0));
  return 2.0 * std::min(inner, outer);
}

double contraction_time(const RadialPotential& p, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("potential", "contraction_time requires radius > 0");
  if (p.degree() < 2 || leading(p.coefficients()) <= 0.0)
    throw PreconditionError("potential", "contraction_time requires a strongly contracting potential");
  const double s0 = radius * radius;
  for (int k = 0; k <= 4000; ++k) {
    const double s = s0 * std::pow(10.0, k / 1000.0);
    if (!(p.du(s) > 0.0))
      throw PreconditionError("potential", "contraction_time requires u' > 0 beyond the radius");
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  auto integrand = [&p](double r) { return 1.0 / (2.0 * r * p.du(r * r)); };
  return integrator.integrate(integrand, radius, std::numeric_limits<double>::infinity());
}

ContractionResult strong_contraction_radius(const RadialPotential& p, double margin) {
  if (p.degree() <= 1) {
    return NotContracting{
        "u has degree <= 1 in s: |grad U| grows at most linearly and the tail integral diverges"};
  }
  if (leading(p.coefficients()) <= 0.0) {
    return NotContracting{"leading coefficient of u is not positive: drift does not point inward at infinity"};
  }
  double radius = p.r_star() * (1.0 + margin);
  auto positive_beyond = [&p](double r) {
    const double s0 = r * r;
    for (int k = 0; k <= 4000; ++k)
      if (!(p.du(s0 * std::pow(10.0, k / 1000.0)) > 0.0)) return false;
    return true;
  };
  int guard = 0;
  while (!positive_beyond(radius)) {
    radius *= 1.5;
    if (++guard > 60) return NotContracting{"u' does not become positive"};
  }
  return ContractionCertificate{radius, contraction_time(p, radius)};
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const RadialPotential& p, double s_max, int samples) {
  if (samples < 3) samples = 3;
  ValidationReport report;
  const double ds = s_max / (samples - 1);
  const double scale = std::max(1.0, std::abs(p.d2u(1.0)));

  ValidationCheck smooth{"smoothness", true, std::nullopt, "polynomial in s: C^infinity"};
  report.checks.push_back(smooth);

  ValidationCheck convex{"convexity", true, std::nullopt, "u''(s) >= 0 on sampled [0, s_max]"};
  for (int i = 0; i < samples; ++i) {
    const double s = i * ds;
    if (p.d2u(s) < -1e-12 * scale) {
      convex.passed = false;
      convex.witness = s;
      convex.detail = "u''(s) < 0";
      break;
    }
  }
  report.checks.push_back(convex);

  ValidationCheck minimum{"unique_minimum", true, std::nullopt, "u'(1) = 0, u' < 0 on [0,1), u' > 0 on (1, s_max]"};
  if (std::abs(p.du(1.0)) > 1e-12 * scale) {
    minimum.passed = false;
    minimum.witness = 1.0;
    minimum.detail = "u'(1) != 0";
  } else {
    for (int i = 0; i < samples; ++i) {
      const double s = i * ds;
      if (std::abs(s - 1.0) < 0.5 * ds) continue;
      const double d = p.du(s);
      const bool ok = s < 1.0 ? d < 0.0 : d > 0.0;
      if (!ok) {
        minimum.passed = false;
        minimum.witness = s;
        minimum.detail = s < 1.0 ? "u'(s) >= 0 below the minimum" : "u'(s) <= 0 above the minimum";
        break;
      }
    }
  }
  report.checks.push_back(minimum);

  // Eigenvalues of Hess U are 2u' (tangential) and 2u' + 4 s u'' (radial).
  ValidationCheck osl{"one_sided_lipschitz", true, std::nullopt, ""};
  double lip = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = i * ds;
    const double lo = std::min(2.0 * p.du(s), 2.0 * p.du(s) + 4.0 * s * p.d2u(s));
    lip = std::max(lip, -lo);
  }
  report.one_sided_lipschitz = lip;
  if (p.degree() >= 1 && leading(p.coefficients()) < 0.0) {
    osl.passed = false;
    osl.witness = s_max;
    osl.detail = "negative leading coefficient: -Hess U unbounded above";
  } else {
    std::ostringstream os;
    os << "sampled L = " << lip;
    osl.detail = os.str();
  }
  report.checks.push_back(osl);

  ValidationCheck contracting{"strong_contraction", true, std::nullopt, ""};
  const auto c = strong_contraction_radius(p);
  if (const auto* nc = std::get_if<NotContracting>(&c)) {
    contracting.passed = false;
    contracting.detail = nc->reason;
  } else {
    const auto& cert = std::get<ContractionCertificate>(c);
    std::ostringstream os;
    os << "radius " << cert.radius << " reached within t = " << cert.time;
    contracting.detail = os.str();
  }
  report.checks.push_back(contracting);
  return report;
}

}  // namespace gradsync

#include "coalflow/csbp_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "coalflow/error.hpp"
#include "format.hpp"
#include "coalflow/laplace.hpp"

namespace coalflow {

namespace {

using detail::fmt;

void require_time(double t) {
  if (!(t >= 0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

}  // namespace

double ut_ode(const BranchingMechanism& mech, double t, double q, const OdeOptions& opts) {
  require_time(t);
  if (!(q >= 0)) throw DomainError("ut: q must be >= 0");
  if (q == 0 || t == 0) return q;

  // Dormand-Prince 5(4) tableau.
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto f = [&mech](double u) { return u > 0 ? -psi_eval(mech, u) : 0.0; };

  double u = q, s = 0;
  double k1 = f(u);
  double h = std::min(t, 0.01 * u / std::max(std::abs(k1), 1e-300));
  long steps = 0;
  while (s < t) {
    if (++steps > opts.max_steps) throw NumericalFailure("ut_ode: step limit exceeded");
    if (s + h > t) h = t - s;
    const double k2 = f(u + h * a21 * k1);
    const double k3 = f(u + h * (a31 * k1 + a32 * k2));
    const double k4 = f(u + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double un = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(un);
    const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(u), std::abs(un));
    const double ratio = err / scale;
    const bool invalid = !(un > 0) || un > u || !std::isfinite(un);
    if (invalid || ratio > 1) {
      h *= invalid ? 0.25 : std::max(0.1, 0.9 * std::pow(ratio, -0.2));
      if (h < 1e-300) throw NumericalFailure("ut_ode: step size underflow");
      continue;
    }
    s += h;
    u = un;
    k1 = k7;
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(ratio, 1e-10), -0.2)));
  }
  return u;
}

double ut(const BranchingMechanism& mech, double t, double q) {
  require_time(t);
  if (!(q >= 0)) throw DomainError("ut: q must be >= 0");
  if (q == 0 || t == 0) return q;
  switch (mech.kind()) {
    case BranchingMechanism::Kind::Feller: return q / (1 + mech.beta() * q * t);
    case BranchingMechanism::Kind::Stable: {
      const double g = mech.gamma();
      return std::pow(std::pow(q, 1 - g) + std::tgamma(2 - g) * t, 1 / (1 - g));
    }
    case BranchingMechanism::Kind::Generic: return ut_ode(mech, t, q);
  }
  return q;
}

std::complex<double> ut_complex(const BranchingMechanism& mech, double t, std::complex<double> s) {
  switch (mech.kind()) {
    case BranchingMechanism::Kind::Feller: return s / (1.0 + mech.beta() * t * s);
    case BranchingMechanism::Kind::Stable: {
      const double g = mech.gamma();
      return std::pow(std::pow(s, 1 - g) + std::tgamma(2 - g) * t, 1 / (1 - g));
    }
    case BranchingMechanism::Kind::Generic: break;
  }
  throw UnsupportedFamily("ut_complex: closed-form continuation exists for Feller and stable mechanisms only");
}

std::string TotalMass::str() const { return infinite ? "+inf" : fmt(value); }

double levy_total_mass_extrapolated(const BranchingMechanism& mech, double t, int first_exponent, int last_exponent) {
  if (last_exponent - first_exponent < 2) throw DomainError("extrapolation grid needs at least three points");
  std::vector<double> seq;
  for (int k = first_exponent; k <= last_exponent; ++k) seq.push_back(ut(mech, t, std::pow(10.0, k)));
  // Repeated Aitken delta-squared.
  while (seq.size() >= 3) {
    std::vector<double> next;
    for (std::size_t i = 0; i + 2 < seq.size(); ++i) {
      const double d1 = seq[i + 1] - seq[i], d2 = seq[i + 2] - seq[i + 1];
      const double den = d2 - d1;
      if (std::abs(den) <= 1e-14 * std::abs(seq[i + 2]) || std::abs(d2) <= 1e-15 * std::abs(seq[i + 2])) {
        next.push_back(seq[i + 2]);
      } else {
        next.push_back(seq[i + 2] - d2 * d2 / den);
      }
    }
    seq = std::move(next);
  }
  return seq.back();
}

TotalMass levy_total_mass(const BranchingMechanism& mech, double t, const TotalMassOptions& opts) {
  if (!(t > 0)) throw DomainError("levy_total_mass: t must be > 0");
  switch (mech.kind()) {
    case BranchingMechanism::Kind::Feller: return {false, 1 / (mech.beta() * t)};
    case BranchingMechanism::Kind::Stable: {
      const double g = mech.gamma();
      return {false, std::pow(std::tgamma(2 - g) * t, 1 / (1 - g))};
    }
    case BranchingMechanism::Kind::Generic: break;
  }
  const auto ext = extinction_check(mech);
  if (ext.verdict == ExtinctionVerdict::NotExtinct) return {true, 0};
  if (ext.verdict == ExtinctionVerdict::Inconclusive && !opts.assume_extinct) {
    throw InconclusiveVerdict("levy_total_mass: extinction verdict inconclusive (fitted exponent " +
                              fmt(ext.growth.exponent) + "); set assume_extinct to proceed");
  }
  return {false, levy_total_mass_extrapolated(mech, t, opts.first_exponent, opts.last_exponent)};
}

double levy_cdf_talbot(const BranchingMechanism& mech, double t, double x, int talbot_nodes) {
  if (!(t > 0)) throw DomainError("levy_cdf: t must be > 0");
  if (!(x > 0)) throw DomainError("levy_cdf: x must be > 0");
  ComplexFn F;
  switch (mech.kind()) {
    case BranchingMechanism::Kind::Feller: {
      const double bt = mech.beta() * t;
      F = [bt](std::complex<double> s) { return 1.0 / (s * bt * (1.0 + bt * s)); };
      break;
    }
    case BranchingMechanism::Kind::Stable: {
      const double g = mech.gamma(), ct = std::tgamma(2 - g) * t;
      const double m = std::pow(ct, 1 / (1 - g));
      // m - u(s) = -m expm1(-log1p(z)/(g-1)), z = s^{1-g}/(C t).
      F = [g, ct, m](std::complex<double> s) {
        const std::complex<double> z = std::pow(s, 1 - g) / ct;
        return -m * cexpm1(-clog1p(z) / (g - 1)) / s;
      };
      break;
    }
    case BranchingMechanism::Kind::Generic:
      throw UnsupportedFamily("levy_cdf: Laplace inversion needs a Feller or stable mechanism");
  }
  return talbot_invert(F, x, talbot_nodes);
}

double levy_cdf(const BranchingMechanism& mech, double t, double x, int talbot_nodes) {
  if (!(t > 0)) throw DomainError("levy_cdf: t must be > 0");
  if (!(x > 0)) throw DomainError("levy_cdf: x must be > 0");
  switch (mech.kind()) {
    case BranchingMechanism::Kind::Feller: {
      const double bt = mech.beta() * t;
      return -std::expm1(-x / bt) / bt;
    }
    case BranchingMechanism::Kind::Stable: {
      const double v = levy_cdf_talbot(mech, t, x, talbot_nodes);
      const double check = levy_cdf_talbot(mech, t, x, talbot_nodes + 8);
      if (std::abs(v - check) > 1e-7) {
        throw NumericalFailure("levy_cdf: Talbot inversion not converged at x = " + fmt(x) + " (M=" +
                               std::to_string(talbot_nodes) + ": " + fmt(v) + ", M+8: " + fmt(check) + ")");
      }
      return std::clamp(check, 0.0, levy_total_mass(mech, t).value);
    }
    case BranchingMechanism::Kind::Generic: break;
  }
  if (extinction_check(mech).verdict == ExtinctionVerdict::NotExtinct) {
    throw UnsupportedFamily("levy_cdf: lambda_t has infinite mass for a non-extinct mechanism");
  }
  throw UnsupportedFamily("levy_cdf: generic mechanisms have no closed-form continuation; use levy_cdf_mc_estimate");
}

double lambda1_laplace_stable(double gamma, double q) {
  if (!(gamma > 1 && gamma < 2)) throw DomainError("lambda1_laplace_stable: gamma must lie in ]1,2[");
  if (!(q >= 0)) throw DomainError("lambda1_laplace_stable: q must be >= 0");
  if (q == 0) return 0;
  if (std::isinf(q)) return std::pow(std::tgamma(2 - gamma), 1 / (1 - gamma));
  return std::pow(std::tgamma(2 - gamma) + std::pow(q, 1 - gamma), 1 / (1 - gamma));
}

double g_scaling(const LambdaMeasure& lam, double eps) {
  if (!(eps > 0 && eps <= 1)) throw DomainError("g_scaling: eps must lie in ]0,1]");
  if (lam.is_kingman()) return eps;
  if (!lam.regular_variation_index()) {
    throw DomainError("g_scaling: Lambda is not regularly varying with index in ]1,2[");
  }
  const double tail = nu_tail(lam, eps);
  if (!(tail > 0)) throw DomainError("g_scaling: nu([eps,1]) = 0");
  return 1 / (eps * tail);
}

double feller_levy_density(double t, double x) { return feller_levy_density(0.5, t, x); }

double feller_levy_density(double beta, double t, double x) {
  if (!(t > 0) || !(beta > 0)) throw DomainError("feller_levy_density: t and beta must be > 0");
  if (!(x > 0)) throw DomainError("feller_levy_density: x must be > 0");
  const double bt = beta * t;
  return std::exp(-x / bt) / (bt * bt);
}

double LevyMeasureTable::cdf_at(double y) const {
  if (x.empty() || y <= x.front()) return (x.empty() || y < x.front()) ? 0.0 : cdf.front();
  if (y >= x.back()) return cdf.back();
  const auto it = std::upper_bound(x.begin(), x.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (y - x[i - 1]) / (x[i] - x[i - 1]);
  return cdf[i - 1] + w * (cdf[i] - cdf[i - 1]);
}

LevyMeasureTable build_levy_table(const BranchingMechanism& mech, double t, const std::vector<double>& xs) {
  LevyMeasureTable tab;
  tab.mech_spec = mech.spec();
  tab.t = t;
  tab.total_mass = levy_total_mass(mech, t);
  tab.x = xs;
  std::sort(tab.x.begin(), tab.x.end());
  tab.cdf.reserve(xs.size());
  double prev = 0;
  for (double x : tab.x) {
    const double v = std::max(prev, levy_cdf(mech, t, x));
    tab.cdf.push_back(v);
    prev = v;
  }
  return tab;
}

void write_levy_table_csv(const LevyMeasureTable& table, std::ostream& os) {
  os.precision(17);
  os << "# mech=" << table.mech_spec << "\n";
  os << "# t=" << table.t << "\n";
  os << "# total_mass=" << table.total_mass.str() << "\n";
  os << "# drift=" << table.drift << "\n";
  os << "x,cdf_value\n";
  for (std::size_t i = 0; i < table.x.size(); ++i) os << table.x[i] << "," << table.cdf[i] << "\n";
}

}  // namespace coalflow

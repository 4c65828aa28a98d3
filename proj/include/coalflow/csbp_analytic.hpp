#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "coalflow/measures.hpp"

namespace coalflow {

/// Tolerances for the explicit Runge-Kutta solver of du/dt = -Psi(u).
struct OdeOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  long max_steps = 1000000;
};

/// u_t(q). Closed forms for Feller and stable mechanisms, ODE otherwise.
double ut(const BranchingMechanism& mech, double t, double q);

/// u_t(q) from the ODE regardless of closed forms (Dormand-Prince 5(4),
/// steps rejected when u would turn negative or increase).
double ut_ode(const BranchingMechanism& mech, double t, double q, const OdeOptions& opts = {});

/// u_t on complex arguments for Feller and stable mechanisms (principal branches).
std::complex<double> ut_complex(const BranchingMechanism& mech, double t, std::complex<double> s);

/// Total mass of lambda_t; `infinite` replaces a floating-point infinity.
struct TotalMass {
  bool infinite = false;
  double value = 0;
  std::string str() const;
};

struct TotalMassOptions {
  /// Treat an inconclusive extinction verdict as extinct.
  bool assume_extinct = false;
  /// Exponents k of the extrapolation grid q = 10^k.
  int first_exponent = 2;
  int last_exponent = 9;
};

/// lim_{q->inf} u_t(q). Closed forms for Feller and stable; otherwise
/// repeated Aitken acceleration over u_t(10^k).
TotalMass levy_total_mass(const BranchingMechanism& mech, double t, const TotalMassOptions& opts = {});

/// The extrapolated limit used for generic mechanisms, exposed for checks.
double levy_total_mass_extrapolated(const BranchingMechanism& mech, double t, int first_exponent = 2,
                                    int last_exponent = 9);

/// lambda_t(]0,x[). Feller: closed form; stable: Talbot inversion of
/// (m - u_t(s))/s. Other mechanisms throw UnsupportedFamily (see
/// levy_cdf_mc_estimate in csbp_sim.hpp).
double levy_cdf(const BranchingMechanism& mech, double t, double x, int talbot_nodes = 32);

/// Talbot inversion for Feller or stable mechanisms, without the closed
/// Feller shortcut and without the convergence cross-check.
double levy_cdf_talbot(const BranchingMechanism& mech, double t, double x, int talbot_nodes = 32);

/// int (1 - e^{-qr}) lambda_1(dr) = (Gamma(2-gamma) + q^{1-gamma})^{1/(1-gamma)}.
double lambda1_laplace_stable(double gamma, double q);

/// g(eps) = 1/(eps nu([eps,1])). Kingman returns eps.
double g_scaling(const LambdaMeasure& lam, double eps);

/// Density of lambda_t for Psi(q) = q^2/2: 4 t^-2 e^{-2x/t}.
double feller_levy_density(double t, double x);
/// Density of lambda_t for Psi(q) = beta q^2.
double feller_levy_density(double beta, double t, double x);

/// lambda_t tabulated on a grid of sizes.
struct LevyMeasureTable {
  std::string mech_spec;
  double t = 0;
  TotalMass total_mass;
  double drift = 0;
  std::vector<double> x;
  std::vector<double> cdf;

  /// Linear interpolation of the tabulated CDF (0 below the grid, last value above).
  double cdf_at(double y) const;
};

LevyMeasureTable build_levy_table(const BranchingMechanism& mech, double t, const std::vector<double>& xs);
void write_levy_table_csv(const LevyMeasureTable& table, std::ostream& os);

}  // namespace coalflow

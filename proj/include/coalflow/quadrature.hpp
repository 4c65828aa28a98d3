#pragma once

#include <functional>
#include <vector>

namespace coalflow::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (15/31) on a finite or infinite interval.
/// Throws NumericalFailure if the error estimate exceeds max(abs_tol, rel_tol*L1).
double integrate(const Integrand& f, double a, double b, double rel_tol = 1e-11, double abs_tol = 0.0);

/// Tanh-sinh rule; tolerates integrable endpoint singularities and never
/// evaluates exactly at the endpoints.
double integrate_singular(const Integrand& f, double a, double b, double rel_tol = 1e-11, double abs_tol = 0.0);

/// Sums tanh-sinh integrals over consecutive pieces of `points`.
double integrate_pieces(const Integrand& f, const std::vector<double>& points, double rel_tol = 1e-11);

/// Breakpoints a = p0 < ... < pn = b placed geometrically (factor `ratio`)
/// around `scale`, for integrands whose structure lives near `scale`.
std::vector<double> geometric_breaks(double a, double b, double scale, double ratio = 8.0);

/// Integral over [a, b] (0 < a < b) computed in the variable s = log x.
double integrate_log(const Integrand& f, double a, double b, double rel_tol = 1e-11);

}  // namespace coalflow::quad

#pragma once

#include <complex>
#include <functional>

namespace coalflow {

using ComplexFn = std::function<std::complex<double>(std::complex<double>)>;

/// Fixed-Talbot inversion of the Laplace transform F at x > 0 using M nodes.
/// F must be analytic off the closed negative real axis.
double talbot_invert(const ComplexFn& F, double x, int M = 32);

/// log(1+z) and exp(w)-1 on complex arguments, accurate for small |z|, |w|.
std::complex<double> clog1p(std::complex<double> z);
std::complex<double> cexpm1(std::complex<double> w);

}  // namespace coalflow

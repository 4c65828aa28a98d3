#include "coalflow/laplace.hpp"

#include <cmath>

#include "coalflow/error.hpp"

namespace coalflow {

std::complex<double> clog1p(std::complex<double> z) {
  if (std::abs(z) < 0.1) {
    std::complex<double> term = z, sum = z;
    for (int k = 2; k < 40; ++k) {
      term *= -z;
      const std::complex<double> add = term / static_cast<double>(k);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::log(1.0 + z);
}

std::complex<double> cexpm1(std::complex<double> w) {
  if (std::abs(w) < 0.1) {
    std::complex<double> term = w, sum = w;
    for (int k = 2; k < 40; ++k) {
      term *= w / static_cast<double>(k);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(w) - 1.0;
}

double talbot_invert(const ComplexFn& F, double x, int M) {
  if (!(x > 0)) throw DomainError("talbot_invert: x must be > 0");
  if (M < 4) throw DomainError("talbot_invert: need at least 4 nodes");
  const double r = 2.0 * M / (5.0 * x);
  double sum = 0.5 * std::real(F({r, 0.0})) * std::exp(r * x);
  for (int k = 1; k < M; ++k) {
    const double theta = k * M_PI / M;
    const double cot = std::cos(theta) / std::sin(theta);
    const std::complex<double> s{r * theta * cot, r * theta};
    const double sigma = theta + (theta * cot - 1.0) * cot;
    sum += std::real(std::exp(x * s) * F(s) * std::complex<double>(1.0, sigma));
  }
  const double v = r / M * sum;
  if (!std::isfinite(v)) throw NumericalFailure("talbot_invert: non-finite result");
  return v;
}

}  // namespace coalflow

#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

namespace coalflow::detail {

inline bool is_nonpositive_integer(double x) { return x <= 0 && x == std::round(x); }

/// Beta function continued to negative arguments; 0 when x+y is a pole of
/// Gamma and NaN when x or y is.
inline double beta_cont(double x, double y) {
  if (is_nonpositive_integer(x) || is_nonpositive_integer(y)) return std::numeric_limits<double>::quiet_NaN();
  if (is_nonpositive_integer(x + y)) return 0.0;
  if (y > 20 && x + y > 0) return std::tgamma(x) * boost::math::tgamma_delta_ratio(y, x);
  if (x > 20 && x + y > 0) return std::tgamma(y) * boost::math::tgamma_delta_ratio(x, y);
  return std::tgamma(x) * std::tgamma(y) / std::tgamma(x + y);
}

/// log B(x, y) for x, y > 0, accurate when one argument is large.
inline double log_beta(double x, double y) {
  if (x > y) std::swap(x, y);
  if (y > 20) {
    const double r = boost::math::tgamma_delta_ratio(y, x);
    if (r > 0 && std::isfinite(r)) return std::lgamma(x) + std::log(r);
  }
  return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

/// log C(n, k).
inline double log_choose(double n, double k) {
  if (k < 30) {
    double s = 0;
    for (int j = 0; j < static_cast<int>(k); ++j) s += std::log((n - j) / (j + 1));
    return s;
  }
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

}  // namespace coalflow::detail

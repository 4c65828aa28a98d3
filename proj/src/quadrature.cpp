#include "coalflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "coalflow/error.hpp"

namespace coalflow::quad {

namespace {

void check(double err, double l1, double rel_tol, double abs_tol, const char* who) {
  // The rules stop at rel_tol when they can; this only flags gross failures.
  const double allowed = std::max(abs_tol, std::sqrt(rel_tol) * l1) + 1e3 * std::numeric_limits<double>::min();
  if (!(err <= allowed)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: error estimate %.3g exceeds tolerance (L1 = %.3g)", who, err, l1);
    throw NumericalFailure(buf);
  }
}

boost::math::quadrature::tanh_sinh<double>& ts_rule() {
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  return rule;
}

}  // namespace

double integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
  if (a == b) return 0.0;
  double err = 0, l1 = 0;
  double v = 0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (std::isfinite(a) && std::isfinite(b)) {
    const double w = b - a;
    auto unit = [&](double u) { return f(a + w * u) * w; };
    v = GK::integrate(unit, 0.0, 1.0, 20, rel_tol, &err, &l1);
  } else {
    v = GK::integrate(f, a, b, 20, rel_tol, &err, &l1);
  }
  if (!std::isfinite(v)) throw NumericalFailure("gauss_kronrod: non-finite result");
  check(err, l1, rel_tol, abs_tol, "gauss_kronrod");
  return v;
}

double integrate_singular(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
  if (a == b) return 0.0;
  double err = 0, l1 = 0;
  std::size_t levels = 0;
  // Abscissae can round onto a singular endpoint; such points carry no weight.
  auto guarded = [&f](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double v = 0;
  if (std::isfinite(a) && std::isfinite(b)) {
    // Boost's error estimate is not scale-free on tiny intervals; map to [0,1].
    const double w = b - a;
    auto unit = [&](double u) { return guarded(u < 0.5 ? a + w * u : b - w * (1 - u)) * w; };
    v = ts_rule().integrate(unit, 0.0, 1.0, rel_tol, &err, &l1, &levels);
  } else {
    v = ts_rule().integrate(guarded, a, b, rel_tol, &err, &l1, &levels);
  }
  if (!std::isfinite(v)) throw NumericalFailure("tanh_sinh: non-finite result");
  check(err, l1, rel_tol, abs_tol, "tanh_sinh");
  return v;
}

double integrate_pieces(const Integrand& f, const std::vector<double>& points, double rel_tol) {
  double sum = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    if (points[i] == 0 && points[i + 1] < 0.5) {
      // Power singularities at the origin become exponential tails in log x.
      auto g = [&f](double s) {
        const double x = std::exp(s);
        return x > 0 ? f(x) * x : 0.0;
      };
      sum += integrate_singular(g, -std::numeric_limits<double>::infinity(), std::log(points[i + 1]), rel_tol);
    } else {
      sum += integrate_singular(f, points[i], points[i + 1], rel_tol);
    }
  }
  return sum;
}

std::vector<double> geometric_breaks(double a, double b, double scale, double ratio) {
  std::vector<double> pts{a};
  if (scale > a && scale < b) {
    std::vector<double> below, above;
    for (double s = scale / ratio; s > a && below.size() < 12; s /= ratio) below.push_back(s);
    for (double s = scale * ratio; s < b && above.size() < 40; s *= ratio) above.push_back(s);
    pts.insert(pts.end(), below.rbegin(), below.rend());
    pts.push_back(scale);
    pts.insert(pts.end(), above.begin(), above.end());
  } else if (scale <= a && std::isfinite(b)) {
    for (double s = std::max(a, scale) * ratio; s < b && pts.size() < 40; s *= ratio) {
      if (s > a) pts.push_back(s);
    }
  }
  pts.push_back(b);
  return pts;
}

double integrate_log(const Integrand& f, double a, double b, double rel_tol) {
  if (!(a > 0) || !(b > a)) throw DomainError("integrate_log: need 0 < a < b");
  auto g = [&](double s) {
    const double x = std::exp(s);
    return f(x) * x;
  };
  return integrate_singular(g, std::log(a), std::log(b), rel_tol);
}

}  // namespace coalflow::quad

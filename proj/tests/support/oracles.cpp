#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

LambdaDensity beta_lambda(double a, double c) {
  const double norm = std::exp(std::lgamma(a + c) - std::lgamma(a) - std::lgamma(c));
  return {[=](double x) { return norm * std::pow(x, a - 1) * std::pow(1 - x, c - 1); }, 0.0};
}

double lambda_bk(const LambdaDensity& lam, int b, int k) {
  double v = (k == 2) ? lam.kingman : 0.0;
  if (lam.density) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double x) { return std::pow(x, k - 2) * std::pow(1 - x, b - k) * lam.density(x); };
    v += ts.integrate(f, 0.0, 1.0, 1e-13);
  }
  return v;
}

std::vector<std::vector<double>> block_generator(const LambdaDensity& lam, int n) {
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (int b = 2; b <= n; ++b) {
    double out = 0;
    for (int k = 2; k <= b; ++k) {
      // choose(b, k) via lgamma, kept separate from the library's recursions
      const double choose = std::round(std::exp(std::lgamma(b + 1.0) - std::lgamma(k + 1.0) - std::lgamma(b - k + 1.0)));
      const double r = choose * lambda_bk(lam, b, k);
      q[b - 1][b - k] += r;
      out += r;
    }
    q[b - 1][b - 1] -= out;
  }
  return q;
}

std::vector<double> block_count_law(const LambdaDensity& lam, int n, double t) {
  const auto q = block_generator(lam, n);
  double rate = 0;
  for (int i = 0; i < n; ++i) rate = std::max(rate, -q[i][i]);
  std::vector<double> p(n, 0.0), term(n, 0.0);
  term[n - 1] = 1;
  if (rate == 0) return term;
  // P = e^{-rt} sum_j (rt)^j/j! M^j, M = I + Q/r
  double weight = std::exp(-rate * t);
  for (int j = 0; j < 10000; ++j) {
    for (int i = 0; i < n; ++i) p[i] += weight * term[i];
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (term[i] == 0) continue;
      next[i] += term[i];
      for (int k = 0; k < n; ++k) next[k] += term[i] * q[i][k] / rate;
    }
    term = next;
    weight *= rate * t / (j + 1);
    if (j > rate * t && weight < 1e-18) break;
  }
  return p;
}

Weighted stable_cluster_weighted(double alpha, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  // Chambers-Mallows-Stuck, totally skewed, scaled so that E exp(-s S) = exp(-s^alpha)
  const double pi = std::numbers::pi;
  const double v = pi * (unif(gen) - 0.5), e = expo(gen);
  const double b = pi / 2;
  const double s = std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1 / alpha) *
                   std::pow(std::cos(v - alpha * (v + b)) / e, (1 - alpha) / alpha);
  // Tilting W^alpha ~ Gamma(1+1/alpha) by 1/W gives an exponential; only S keeps a weight.
  return {std::pow(expo(gen), 1 / alpha) * s, 1 / s};
}

double stable_cluster_half(std::mt19937_64& gen) {
  std::exponential_distribution<double> expo(1.0);
  std::gamma_distribution<double> gam(1.5, 1.0);
  const double e = expo(gen);
  return e * e / (4 * gam(gen));
}

std::vector<double> stable_cluster_cdf(double gamma, double t, const std::vector<double>& xs, std::size_t samples,
                                       std::uint64_t seed) {
  const double alpha = gamma - 1;
  const double m = std::pow(std::tgamma(2 - gamma) * t, 1 / (1 - gamma));
  std::mt19937_64 gen(seed);
  std::vector<double> hit(xs.size(), 0.0);
  double total = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Weighted w = gamma == 1.5 ? Weighted{stable_cluster_half(gen), 1.0} : stable_cluster_weighted(alpha, gen);
    const double x = w.value / m;
    total += w.weight;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (x < xs[j]) hit[j] += w.weight;
    }
  }
  for (auto& h : hit) h /= total;
  return hit;
}

double chi2_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Lambda(dx) as a plain density on ]0,1[ plus an optional atom at 0 (Kingman part).
struct LambdaDensity {
  std::function<double(double)> density;
  double kingman = 0;
};

LambdaDensity beta_lambda(double a, double c);

/// lambda_{b,k} = int x^{k-2} (1-x)^{b-k} Lambda(dx), by tanh-sinh quadrature.
double lambda_bk(const LambdaDensity& lam, int b, int k);

/// Generator of the block-counting process on {1..n}; q[i][j] is the rate i+1 -> j+1.
std::vector<std::vector<double>> block_generator(const LambdaDensity& lam, int n);

/// Law of the block count at time t from n blocks, by uniformization.
std::vector<double> block_count_law(const LambdaDensity& lam, int n, double t);

/// Weighted stable-cluster sample. The rescaled cluster law m*X is the 1/y tilt of y = W*S with
/// W^alpha ~ Gamma(1+1/alpha) and S standard positive alpha-stable (Chambers-Mallows-Stuck).
/// Returns (Exp^{1/alpha} * S, 1/S).
struct Weighted {
  double value, weight;
};
Weighted stable_cluster_weighted(double alpha, std::mt19937_64& gen);

/// Exact unweighted draw of m*X for gamma = 3/2: S = 1/(4G), G ~ Gamma(1/2), so the 1/S tilt
/// turns G into Gamma(3/2) and m*X = E^2 / (4 G').
double stable_cluster_half(std::mt19937_64& gen);

/// Normalized cluster-size CDF lambda_t(]0,x[)/m estimated from `samples` draws
/// (unweighted for gamma = 3/2, weighted otherwise).
std::vector<double> stable_cluster_cdf(double gamma, double t, const std::vector<double>& xs, std::size_t samples,
                                       std::uint64_t seed);

/// P[chi^2_df <= x] upper quantile helper: returns the 1-alpha quantile.
double chi2_quantile(double df, double p);

}  // namespace oracle

#include "coalflow/rng.hpp"

#include <cmath>
#include <random>

namespace coalflow {

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    w = mix64(x);
  }
}

Rng Rng::stream(std::uint64_t master, std::uint64_t stream) {
  return Rng(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

double Rng::exponential() { return -std::log(uniform()); }

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0)) return 0;
  if (mean < 30) {
    // Inversion by sequential search.
    double p = std::exp(-mean), cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(*this);
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> d(shape, 1.0);
  return d(*this);
}

}  // namespace coalflow

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coalflow/csbp_analytic.hpp"
#include "coalflow/csbp_sim.hpp"
#include "coalflow/error.hpp"
#include "oracles.hpp"

using namespace coalflow;

TEST_CASE("truncated stable jumps: rate, drift and sizes") {
  const TruncatedJumps tj(JumpMeasure::stable(1.5), 0.01);
  CHECK(tj.rate() == doctest::Approx(std::pow(0.01, -1.5)));
  CHECK(tj.drift() == doctest::Approx(3 / std::sqrt(0.01)));
  Rng rng(5);
  double above = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double r = tj.sample(rng);
    REQUIRE(r > 0.01);
    above += r > 0.04 ? 1 : 0;
  }
  // P[r > 4 delta] = 4^{-1.5}
  CHECK(above / n == doctest::Approx(0.125).epsilon(0.03));
}

TEST_CASE("flow paths are ordered and reproducible") {
  const auto m = BranchingMechanism::stable(1.5);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a = Rng::stream(1, s), b = Rng::stream(1, s);
    const auto fa = simulate_csbp_flow(m, {0.2, 0.5, 1.0}, 1.0, 1e-2, a);
    const auto fb = simulate_csbp_flow(m, {0.2, 0.5, 1.0}, 1.0, 1e-2, b);
    CHECK(fa.values == fb.values);
    CHECK(std::is_sorted(fa.values.begin(), fa.values.end()));
  }
  Rng r(1);
  CHECK_THROWS_AS(simulate_csbp_flow(m, {1.0, 0.5}, 1.0, 1e-2, r), DomainError);
}

TEST_CASE("flow of a finite jump measure keeps its mean") {
  const auto m = BranchingMechanism::jumps(JumpMeasure::atoms({{1.0, 1.0}}));
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    Rng r = Rng::stream(2, i);
    const double z = simulate_csbp_flow(m, {1.0}, 1.0, 1e-3, r).values[0];
    s += z;
    s2 += z * z;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("exact Feller sampler matches the Laplace transform") {
  Rng rng(11);
  const int n = 100000;
  double lt = 0;
  for (int i = 0; i < n; ++i) lt += std::exp(-2.0 * feller_exact_sample(0.5, 1.0, 1.5, rng));
  const double ref = std::exp(-1.5 * ut(BranchingMechanism::feller(0.5), 1.0, 2.0));
  CHECK(lt / n == doctest::Approx(ref).epsilon(0.01));
}

TEST_CASE("stable cluster sampler agrees with an independent weighted oracle") {
  const double g = 1.3, t = 0.8;
  const std::vector<double> xs{0.05, 0.5, 2.0};
  const auto ref = oracle::stable_cluster_cdf(g, t, xs, 400000, 17);
  Rng rng(4);
  const int n = 100000;
  std::vector<double> v(n);
  for (auto& x : v) x = stable_cluster_sample(g, t, rng);
  std::sort(v.begin(), v.end());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double emp = double(std::lower_bound(v.begin(), v.end(), xs[j]) - v.begin()) / n;
    CHECK(emp == doctest::Approx(ref[j]).epsilon(0.03));
  }
}

TEST_CASE("truncation bias bound is zero without small jumps") {
  const auto m = BranchingMechanism::jumps(JumpMeasure::atoms({{1.0, 1.0}}));
  CHECK(truncation_bias_bound(m, 0.5, 1.0, 1.0) == 0.0);
  CHECK(truncation_bias_bound(BranchingMechanism::stable(1.5), 1e-3, 1.0, 1.0) > 0.0);
}

TEST_CASE("trajectory recorder writes one row per event") {
  const auto m = BranchingMechanism::jumps(JumpMeasure::atoms({{0.5, 2.0}}));
  TrajectoryRecorder rec;
  const FlowObserver obs = rec.observer();
  FlowOptions opt;
  opt.observer = &obs;
  Rng r(8);
  const auto st = simulate_csbp_flow(m, {1.0, 2.0}, 1.0, 0.1, r, opt);
  CHECK(rec.size() == st.events);
  std::ostringstream os;
  rec.write_csv(os);
  CHECK(os.str().rfind("time,Z1,Z2\n", 0) == 0);
}

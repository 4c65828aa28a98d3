#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "coalflow/coalescent.hpp"
#include "coalflow/error.hpp"
#include "oracles.hpp"

using namespace coalflow;

TEST_CASE("merger rates") {
  CHECK(merger_rate(LambdaMeasure::kingman(), 5, 2) == doctest::Approx(10.0));
  CHECK(merger_rate(LambdaMeasure::kingman(), 5, 3) == 0.0);
  CHECK(merger_rate(LambdaMeasure::beta(1, 1), 5, 3) == doctest::Approx(10.0 / 12));
  CHECK(total_rate(LambdaMeasure::beta(1, 1), 5) == doctest::Approx(4.0));
  CHECK(total_rate(LambdaMeasure::beta(0.5, 1.5), 50) == doctest::Approx(259.9915087981173).epsilon(1e-9));
  CHECK(merger_rate(LambdaMeasure::beta(0.5, 1.5), 10, 3) == doctest::Approx(2.618408203125).epsilon(1e-10));
}

TEST_CASE("near-integer Beta parameters fall back consistently") {
  const auto lam = LambdaMeasure::beta(2.0004, 1.3);
  const auto ref = oracle::beta_lambda(2.0004, 1.3);
  for (int k : {2, 5, 20}) {
    const double choose = std::round(std::exp(std::lgamma(21.0) - std::lgamma(k + 1.0) - std::lgamma(21.0 - k)));
    CHECK(merger_rate(lam, 20, k) == doctest::Approx(choose * oracle::lambda_bk(ref, 20, k)).epsilon(1e-7));
  }
}

TEST_CASE("jump sizes follow the merger rates") {
  const auto lam = LambdaMeasure::atoms({{0.3, 0.5}, {0.9, 0.2}});
  JumpSizeSampler sampler(lam);
  Rng rng(6);
  const std::uint64_t b = 8;
  std::vector<double> counts(b + 1, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[sampler.sample(b, rng)] += 1;
  const double total = total_rate(lam, b);
  for (std::uint64_t k = 2; k <= b; ++k) {
    const double p = merger_rate(lam, b, k) / total;
    CHECK(std::abs(counts[k] / n - p) <= 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
  }
}

TEST_CASE("block counts from few singletons match the matrix exponential") {
  const int n = 4;
  const double t = 0.6;
  const auto law = oracle::block_count_law(oracle::beta_lambda(1, 1), n, t);
  std::vector<double> freq(n, 0);
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) {
    Rng r = Rng::stream(3, i);
    freq[block_count_at(LambdaMeasure::beta(1, 1), n, t, r) - 1] += 1.0 / reps;
  }
  double tv = 0;
  for (int i = 0; i < n; ++i) tv += 0.5 * std::abs(freq[i] - law[i]);
  CHECK(tv < 0.015);
}

TEST_CASE("simulation conserves mass and echoes the initial state at t = 0") {
  Rng r(1);
  const auto st0 = simulate_to(LambdaMeasure::beta(0.5, 1.5), BlockState::singletons(10), 0.0, r);
  CHECK(st0.block_count() == 10);
  const auto st = simulate_to(LambdaMeasure::beta(0.5, 1.5), BlockState::singletons(1000), 0.5, r);
  CHECK(std::accumulate(st.sizes.begin(), st.sizes.end(), std::uint64_t{0}) == 1000);
  CHECK(st.block_count() < 1000);
  const auto em = frequencies(st);
  CHECK(em.total() == doctest::Approx(static_cast<double>(st.block_count())));
}

TEST_CASE("event log") {
  EventLog log;
  const MergeObserver obs = log.observer();
  Rng r(2);
  const auto st = simulate_to(LambdaMeasure::kingman(), BlockState::singletons(20), 10.0, r, &obs);
  std::ostringstream os;
  log.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("time,b_before,k\n", 0) == 0);
  const auto lines = std::count(s.begin(), s.end(), '\n');
  CHECK(static_cast<std::size_t>(lines - 1) == 20 - st.block_count());
}

TEST_CASE("dual representation of the Fleming-Viot marginal") {
  // every block colours independently with probability y: E = y
  Rng r(9);
  double s = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto st = simulate_to(LambdaMeasure::beta(1, 1), BlockState::singletons(30), 1.0, r);
    s += fv_marginal_via_dual(st, 0.3, r);
  }
  CHECK(s / n == doctest::Approx(0.3).epsilon(0.02));
}

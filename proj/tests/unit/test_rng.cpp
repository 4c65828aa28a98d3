#include <doctest.h>

#include <cmath>
#include <set>

#include "coalflow/experiments.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/rng.hpp"

using namespace coalflow;

TEST_CASE("streams are reproducible and distinct") {
  Rng a = Rng::stream(42, 7), b = Rng::stream(42, 7), c = Rng::stream(42, 8);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
}

TEST_CASE("sub_seed separates labels") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t l = 0; l < 100; ++l) seen.insert(sub_seed(1, l));
  CHECK(seen.size() == 100);
  CHECK(sub_seed(5, 3) == sub_seed(5, 3));
}

TEST_CASE("uniform stays inside the open unit interval") {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0);
    REQUIRE(u < 1);
  }
}

TEST_CASE("distribution means") {
  Rng r(3);
  const int n = 200000;
  double e = 0, p = 0, g = 0;
  for (int i = 0; i < n; ++i) {
    e += r.exponential();
    p += static_cast<double>(r.poisson(3.5));
    g += r.gamma(0.7);
  }
  CHECK(e / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(p / n == doctest::Approx(3.5).epsilon(0.01));
  CHECK(g / n == doctest::Approx(0.7).epsilon(0.015));
}

TEST_CASE("replica_map output does not depend on the thread count") {
  auto f = [](std::size_t i) {
    Rng r = Rng::stream(9, i);
    return r.uniform();
  };
  CHECK(replica_map(50, 1, f) == replica_map(50, 4, f));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coalflow/error.hpp"
#include "coalflow/fleming_viot.hpp"

using namespace coalflow;

TEST_CASE("flow values stay ordered in [0,1] with fixed endpoints") {
  const auto nu = FiniteNu::atoms({{0.5, 1.0}, {0.2, 2.0}});
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng r = Rng::stream(4, s);
    const auto st = simulate_fv_flow(nu, {0.0, 0.1, 0.4, 0.9, 1.0}, 2.0, r);
    CHECK(std::is_sorted(st.values.begin(), st.values.end()));
    CHECK(st.values.front() == 0.0);
    CHECK(st.values.back() == 1.0);
  }
}

TEST_CASE("one-point marginal is a martingale") {
  const auto nu = FiniteNu::atoms({{0.5, 1.0}});
  const int n = 40000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    Rng r = Rng::stream(5, i);
    const double v = simulate_fv_flow(nu, {0.3}, 1.0, r).values[0];
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.3) <= 3 * se);
}

TEST_CASE("advancing in two steps is a valid flow") {
  const auto nu = FiniteNu::atoms({{0.4, 1.5}});
  Rng r(3);
  FvFlowState st = simulate_fv_flow(nu, {0.2, 0.7}, 0.5, r);
  advance_fv_flow(nu, st, 0.5, r);
  CHECK(st.clock == doctest::Approx(1.0));
  CHECK(st.values[0] <= st.values[1]);
}

TEST_CASE("nu from Lambda") {
  const auto nu = FiniteNu::from_lambda(LambdaMeasure::nu_atoms({{0.5, 2.0}}));
  CHECK(nu.total() == doctest::Approx(2.0));
  CHECK_THROWS_AS(FiniteNu::from_lambda(LambdaMeasure::kingman()), DomainError);
  CHECK_THROWS_AS(FiniteNu::from_lambda(LambdaMeasure::beta(0.5, 1.5)), DomainError);
  const auto dens = FiniteNu::from_lambda(LambdaMeasure::beta(3, 1));
  // nu = x^-2 * 3 x^2 dx on ]0,1]
  CHECK(dens.total() == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("large-population images") {
  const JumpMeasure pi = JumpMeasure::atoms({{1.0, 1.0}, {2.0, 0.5}});
  const FiniteNu tilde = largepop_nu_tilde(4.0, pi);
  CHECK(tilde.total() == doctest::Approx(1.5));
  const auto atoms = tilde.atom_list();
  CHECK(atoms[0].position == doctest::Approx(0.25));
  const JumpMeasure back = largepop_nu(4.0, tilde);
  CHECK(back.tail(1.5) == doctest::Approx(0.5));
  const auto h = assumption_h_report(4.0, tilde, pi);
  CHECK(h.cdf_gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(largepop_nu_tilde(1.0, pi), DomainError);
}

TEST_CASE("rescaled flow lives on [0,a]") {
  const FiniteNu tilde = largepop_nu_tilde(5.0, JumpMeasure::atoms({{1.0, 1.0}}));
  Rng r(2);
  const auto st = rescale_largepop(5.0, tilde, {1.0, 2.5}, 1.0, r);
  CHECK(st.values[0] >= 0);
  CHECK(st.values[1] <= 5.0);
  CHECK(st.values[0] <= st.values[1]);
}

TEST_CASE("snapshot CSV") {
  const auto nu = FiniteNu::atoms({{0.5, 3.0}});
  FvSnapshotRecorder rec({0.2, 0.6});
  const FvObserver obs = rec.observer();
  Rng r(1);
  const auto st = simulate_fv_flow(nu, {0.2, 0.6}, 1.0, r, &obs);
  CHECK(rec.size() == st.events);
  std::ostringstream os;
  rec.write_csv(os);
  CHECK(os.str().rfind("time,x1,x2,F1,F2\n", 0) == 0);
}

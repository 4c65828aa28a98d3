#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "coalflow/csbp_analytic.hpp"
#include "coalflow/error.hpp"

using namespace coalflow;

TEST_CASE("cumulant semigroup closed forms") {
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(ut(BranchingMechanism::stable(1.5), 1, 1) == doctest::Approx(1 / ((1 + sqrt_pi) * (1 + sqrt_pi))).epsilon(1e-14));
  CHECK(ut(BranchingMechanism::stable(1.2), 0.5, 3) == doctest::Approx(0.19632529502101002).epsilon(1e-12));
  CHECK(ut(BranchingMechanism::feller(2), 0.5, 3) == doctest::Approx(3 / (1 + 2 * 3 * 0.5)));
}

TEST_CASE("ODE agrees with the closed forms") {
  for (double g : {1.2, 1.8}) {
    const auto m = BranchingMechanism::stable(g);
    CHECK(ut_ode(m, 0.7, 4) == doctest::Approx(ut(m, 0.7, 4)).epsilon(1e-9));
  }
  const auto f = BranchingMechanism::feller(0.5);
  CHECK(ut_ode(f, 2, 10) == doctest::Approx(ut(f, 2, 10)).epsilon(1e-10));
}

TEST_CASE("total mass") {
  CHECK(levy_total_mass(BranchingMechanism::stable(1.5), 2).value == doctest::Approx(0.07957747154594767));
  CHECK(levy_total_mass(BranchingMechanism::feller(0.5), 1).value == doctest::Approx(2.0));
  CHECK(levy_total_mass(BranchingMechanism::jumps(JumpMeasure::atoms({{1, 1}})), 1).infinite);
}

TEST_CASE("Levy measure distribution function") {
  // Feller beta = 1/2: (2/t)(1 - e^{-2x/t})
  CHECK(levy_cdf(BranchingMechanism::feller(0.5), 1, 1) == doctest::Approx(1.7293294335267746).epsilon(1e-12));
  CHECK(levy_cdf_talbot(BranchingMechanism::feller(0.5), 1, 1) == doctest::Approx(1.7293294335267746).epsilon(1e-9));
  const auto s = BranchingMechanism::stable(1.5);
  CHECK(levy_cdf(s, 1, 1) == doctest::Approx(0.21660934270479878).epsilon(1e-8));
  CHECK(levy_cdf(s, 1, 0.1) == doctest::Approx(0.10249207400968131).epsilon(1e-8));
  CHECK(levy_cdf(s, 1, 1e4) == doctest::Approx(1 / std::numbers::pi).epsilon(1e-5));
  CHECK_THROWS_AS(levy_cdf(s, 1, 0), DomainError);
  CHECK_THROWS_AS(levy_cdf(BranchingMechanism::jumps(JumpMeasure::atoms({{1, 1}})), 1, 1), UnsupportedFamily);
}

TEST_CASE("small-time scaling") {
  CHECK(g_scaling(LambdaMeasure::beta(0.5, 1.5), 0.01) == doctest::Approx(0.2391984406816876).epsilon(1e-8));
  CHECK(g_scaling(LambdaMeasure::kingman(), 0.01) == doctest::Approx(0.01));
}

TEST_CASE("Levy table CSV") {
  const auto tab = build_levy_table(BranchingMechanism::stable(1.5), 1, {0.5, 1, 2});
  CHECK(tab.cdf_at(1) == doctest::Approx(levy_cdf(BranchingMechanism::stable(1.5), 1, 1)));
  std::ostringstream os;
  write_levy_table_csv(tab, os);
  CHECK(os.str().find("x,cdf_value\n") != std::string::npos);
  CHECK(os.str().rfind("# mech=stable:1.5", 0) == 0);
}

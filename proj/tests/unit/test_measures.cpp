#include <doctest.h>

#include <cmath>

#include "coalflow/error.hpp"
#include "coalflow/measures.hpp"
#include "oracles.hpp"

using namespace coalflow;

// Reference values below were computed with mpmath (60 digits) from the defining integrals.

TEST_CASE("psi of the stable mechanism matches its defining integral") {
  const auto m = BranchingMechanism::stable(1.5);
  CHECK(psi_eval(m, 2.0) == doctest::Approx(10.026513098524002).epsilon(1e-10));
  CHECK(psi_eval(m, 0.0) == 0.0);
}

TEST_CASE("psi of Feller and atoms") {
  CHECK(psi_eval(BranchingMechanism::feller(0.5), 3.0) == doctest::Approx(4.5));
  const auto a = BranchingMechanism::jumps(JumpMeasure::atoms({{2.0, 0.5}}));
  CHECK(psi_eval(a, 1.0) == doctest::Approx(0.5 * (std::exp(-2.0) - 1 + 2.0)));
  CHECK(psi_prime(a, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("psi derivatives by finite differences") {
  const auto m = BranchingMechanism::stable(1.3);
  const double q = 0.7, h = 1e-4;
  const double fd = (psi_eval(m, q + h) - psi_eval(m, q - h)) / (2 * h);
  CHECK(psi_prime(m, q) == doctest::Approx(fd).epsilon(1e-7));
  const double fd2 = (psi_eval(m, q + h) - 2 * psi_eval(m, q) + psi_eval(m, q - h)) / (h * h);
  CHECK(psi_derivative(m, 2, q) == doctest::Approx(fd2).epsilon(1e-5));
}

TEST_CASE("nu tail and phi of Beta(0.5,1.5)") {
  const auto lam = LambdaMeasure::beta(0.5, 1.5);
  CHECK(nu_tail(lam, 1e-3) == doctest::Approx(13400.99657678176).epsilon(1e-9));
  CHECK(phi_eval(lam, 100) == doctest::Approx(1310.139237448072).epsilon(1e-8));
  CHECK(lam.regular_variation_index().value() == doctest::Approx(1.5));
}

TEST_CASE("binomial moments against quadrature") {
  const auto lam = LambdaMeasure::beta(0.5, 1.5);
  const auto ref = oracle::beta_lambda(0.5, 1.5);
  for (int b : {3, 10, 40}) {
    for (int k : {2, 3, b}) {
      CHECK(binom_moment(lam, b, k) == doctest::Approx(oracle::lambda_bk(ref, b, k)).epsilon(1e-8));
    }
  }
}

TEST_CASE("extinction and coming-down verdicts") {
  CHECK(extinction_check(BranchingMechanism::stable(1.5)).verdict == ExtinctionVerdict::Extinct);
  CHECK(extinction_check(BranchingMechanism::feller(1)).verdict == ExtinctionVerdict::Extinct);
  CHECK(extinction_check(BranchingMechanism::jumps(JumpMeasure::atoms({{1, 1}}))).verdict ==
        ExtinctionVerdict::NotExtinct);
  CHECK(cdi_check(LambdaMeasure::beta(0.5, 1.5)).verdict == CdiVerdict::ComesDown);
  CHECK(cdi_check(LambdaMeasure::beta(1, 1)).verdict == CdiVerdict::DoesNotComeDown);
  CHECK(cdi_check(LambdaMeasure::kingman()).verdict == CdiVerdict::ComesDown);
}

TEST_CASE("invalid measures") {
  CHECK_THROWS_AS(JumpMeasure::stable(1.0), DomainError);
  CHECK_THROWS_AS(JumpMeasure::atoms({{-1, 1}}), DomainError);
  CHECK_THROWS_AS(LambdaMeasure::beta(0, 1), DomainError);
  CHECK_THROWS_AS(LambdaMeasure::atoms({{1.5, 1}}), DomainError);
}

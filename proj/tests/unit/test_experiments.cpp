#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "coalflow/error.hpp"
#include "coalflow/experiments.hpp"

using namespace coalflow;

TEST_CASE("gate rules") {
  ExperimentReport rep;
  rep.abs_gap("a", 1.05, 1.0, "closed-form", 0.1);
  rep.at_most("b", 0.2, 0.1, "closed-form");
  rep.at_least("c", 0.5, 0.4, "closed-form");
  rep.info("d", 3.0);
  CHECK(rep.find("a")->pass);
  CHECK_FALSE(rep.find("b")->pass);
  CHECK(rep.find("c")->pass);
  CHECK_FALSE(rep.pass);
  CHECK(rep.find("a")->gap() == doctest::Approx(0.05));
}

TEST_CASE("JSON report schema") {
  ExperimentReport rep;
  rep.id = "demo";
  rep.param("gamma", 1.5);
  rep.info("nan", std::numeric_limits<double>::quiet_NaN());
  rep.abs_gap("inf", std::numeric_limits<double>::infinity(), 1.0, "closed-form", 1.0);
  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["experiment"] == "demo");
  CHECK(j["parameters"]["gamma"] == "1.5");
  CHECK(j["statistics"][0]["value"].is_null());
  CHECK(j["statistics"][1]["value"] == "+inf");
  CHECK(j["pass"] == false);
  CHECK_FALSE(j.contains("wall_time_s"));
  CHECK(nlohmann::json::parse(report_json(rep, true)).contains("wall_time_s"));
  CHECK(report_text(rep).find("FAIL") != std::string::npos);
}

TEST_CASE("conditioned Poisson counts") {
  Rng rng(2);
  for (double mean : {1e-6, 0.3, 4.0, 50.0}) {
    double s = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto k = poisson_at_least(mean, 2, rng);
      REQUIRE(k >= 2);
      s += static_cast<double>(k);
    }
    // E[N | N >= 2] = (mean - mean e^{-mean}) / (1 - e^{-mean} - mean e^{-mean})
    const double p2 = -std::expm1(-mean) - mean * std::exp(-mean);
    const double ref = mean < 1e-3 ? 2.0 : (mean * -std::expm1(-mean)) / p2;
    CHECK(s / n == doctest::Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("Poisson sums from atoms") {
  const auto mu = PoissonIntensity::from_atoms({{1.0, 0.5}, {2.0, 0.25}});
  CHECK(mu.mass == doctest::Approx(0.75));
  Rng rng(1);
  double s = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) s += poisson_sum_sample(mu, rng);
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("coagulation residuals with closed forms") {
  const auto r1 = smolu_residual(BranchingMechanism::stable(1.5), 1, TestFunction::exponential(1),
                                 SmoluMethod::ExactExponential);
  CHECK(r1.pass);
  const auto r2 = smolu_residual(BranchingMechanism::feller(0.5), 1, TestFunction::hat(0.5, 1.5),
                                 SmoluMethod::FellerQuadrature);
  CHECK(r2.pass);
  CHECK_THROWS_AS(smolu_residual(BranchingMechanism::stable(1.5), 1, TestFunction::hat(0.5, 1.5),
                                 SmoluMethod::FellerQuadrature),
                  UnsupportedFamily);
  CHECK(smolu_series_check(BranchingMechanism::feller(0.5), 1, TestFunction::hat(0.5, 1.5)).pass);
}

TEST_CASE("Poisson-sum residual for the stable mechanism") {
  SmoluOptions o;
  o.samples_per_node = 1000;
  const auto r = smolu_residual(BranchingMechanism::stable(1.5), 1, TestFunction::hat(0.5, 1.5),
                                SmoluMethod::McPoisson, o);
  CHECK(r.pass);
}

TEST_CASE("rates and criteria experiments") {
  CHECK(rate_asymptotics_check(RatesConfig{}).pass);
  CHECK(cdi_equivalence_run(CdiConfig{}).pass);
}

TEST_CASE("large-population marginals at a small replica count") {
  LargepopConfig c;
  c.replicas = 20000;
  const auto rep = largepop_marginal_run(c);
  CHECK(rep.find("a=50 q=1 Laplace transform") != nullptr);
  CHECK(rep.find("a=50 q=1 Laplace transform")->pass);
  CHECK(rep.raw_rows.size() == 2 * c.replicas);
}

TEST_CASE("experiment guards") {
  SmalltimeConfig s;
  s.n = 1000;
  CHECK_THROWS_AS(smalltime_blocks_run(s), DomainError);
  HydroConfig h;
  h.x_lo = 0;
  CHECK_THROWS_AS(hydrodynamic_run(h), DomainError);
}

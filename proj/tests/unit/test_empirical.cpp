#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coalflow/empirical.hpp"

using namespace coalflow;

TEST_CASE("empirical distribution function") {
  EmpiricalMeasure e;
  e.add(2.0, 1.0);
  e.add(1.0, 0.5);
  e.add(2.0, 0.25);
  CHECK(e.total() == doctest::Approx(1.75));
  CHECK(e.cdf_below(2.0) == doctest::Approx(0.5));
  CHECK(e.cdf_through(2.0) == doctest::Approx(1.75));
  CHECK(e.cdf_below(0.5) == 0.0);
  const auto r = e.rescaled(2.0, 0.5);
  CHECK(r.cdf_through(2.0) == doctest::Approx(0.25));
}

TEST_CASE("window distance is the exact supremum") {
  EmpiricalMeasure e;
  e.add(1.0, 1.0);
  const CdfFn ref = [](double x) { return std::min(x / 2, 1.0); };
  // just below 1 the gap is 0.5, at 1 it is 0.5
  CHECK(kolmogorov_distance_window(e, ref, 0.5, 1.5) == doctest::Approx(0.5));
  CHECK(kolmogorov_distance_window(e, ref, 1.5, 2.0) == doctest::Approx(0.25));
}

TEST_CASE("CSV output") {
  EmpiricalMeasure e;
  e.add(0.25, 1.0);
  std::ostringstream os;
  e.write_csv(os);
  CHECK(os.str() == "frequency,weight\n0.25,1\n");
}

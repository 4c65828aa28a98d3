#include <doctest.h>

#include "coalflow/error.hpp"
#include "coalflow/spec_parse.hpp"

using namespace coalflow;

TEST_CASE("mechanism specs round-trip") {
  for (const char* s : {"feller:0.5", "stable:1.5", "atoms:1@1", "atoms:0.5@2,1@0.25"}) {
    const auto m = parse_mechanism(s);
    CHECK(parse_mechanism(m.spec()).spec() == m.spec());
  }
  CHECK(parse_mechanism("stable:1.5").kind() == BranchingMechanism::Kind::Stable);
  CHECK(parse_mechanism("feller:2").beta() == 2.0);
  CHECK(parse_mechanism("feller:1+atoms:1@1").kind() == BranchingMechanism::Kind::Generic);
}

TEST_CASE("lambda specs") {
  CHECK(parse_lambda("kingman").is_kingman());
  CHECK(parse_lambda("bs").total_mass() == doctest::Approx(1.0));
  CHECK(parse_lambda("beta:0.5,1.5,2").total_mass() == doctest::Approx(2.0));
  // nu-atoms weights are nu weights: Lambda mass = x^2 w
  CHECK(parse_lambda("nu-atoms:0.5@1").total_mass() == doctest::Approx(0.25));
  CHECK(parse_lambda("atoms:0.5@0.25").total_mass() == doctest::Approx(0.25));
}

TEST_CASE("malformed specs are rejected") {
  CHECK_THROWS_AS(parse_mechanism("gauss:1"), DomainError);
  CHECK_THROWS_AS(parse_mechanism("stable:x"), DomainError);
  CHECK_THROWS_AS(parse_mechanism("stable:2.5"), DomainError);
  CHECK_THROWS_AS(parse_mechanism("stable:1.5+atoms:1@1"), DomainError);
  CHECK_THROWS_AS(parse_lambda("beta:1"), DomainError);
  CHECK_THROWS_AS(parse_lambda("atoms:0.5"), DomainError);
  CHECK_THROWS_AS(parse_atoms(""), DomainError);
}

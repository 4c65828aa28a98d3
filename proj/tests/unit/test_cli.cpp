#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "coalflow/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = coalflow::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("ut prints the closed form") {
  const auto r = run({"ut", "--mech", "stable:1.5", "--t", "1", "--q", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.130098\n");
}

TEST_CASE("psi table formats") {
  CHECK(run({"psi", "--mech", "feller:0.5", "--q", "1,2", "--format", "csv"}).out == "q,psi\n1,0.5\n2,2\n");
  CHECK(run({"psi", "--mech", "feller:0.5", "--q", "1", "--format", "json"}).out.find("\"schema_version\": 1") !=
        std::string::npos);
}

TEST_CASE("coalescent at time zero echoes the initial state") {
  const auto r = run({"simulate-coalescent", "--lambda", "beta:0.5,1.5", "--n", "10", "--t", "0"});
  CHECK(r.code == 0);
  std::string expect = "frequency,weight\n";
  for (int i = 0; i < 10; ++i) expect += "0.1,1\n";
  CHECK(r.out == expect);
}

TEST_CASE("configuration errors exit with 2 and name the field") {
  auto r = run({"ut", "--mech", "stable:3", "--t", "1", "--q", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--mech") != std::string::npos);
  r = run({"ut", "--mech", "stable:1.5", "--t", "-1", "--q", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--t") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"levy-cdf", "--mech", "atoms:1@1", "--x", "1"}).code == 2);
  CHECK(run({"experiment", "smalltime", "--n", "100"}).code == 2);
  CHECK(run({"simulate-fv", "--nu", "atoms:0.5@1", "--lambda", "bs", "--points", "0.5"}).code == 2);
}

TEST_CASE("help exits with 0 and lists units") {
  const auto r = run({"experiment", "hydro", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("time units") != std::string::npos);
}

TEST_CASE("config file values yield to flags") {
  const std::string path = "coalflow_test_config.cfg";
  {
    std::ofstream f(path);
    f << "# rates\nmech = stable:1.5\nt = 1\nq = 2\n";
  }
  CHECK(run({"ut", "--config", path}).out == run({"ut", "--mech", "stable:1.5", "--t", "1", "--q", "2"}).out);
  CHECK(run({"ut", "--config", path, "--q", "1"}).out == "0.130098\n");
  std::remove(path.c_str());
}

TEST_CASE("simulations do not depend on the thread count") {
  const std::vector<std::string> base{"simulate-csbp", "--mech", "stable:1.5", "--points", "0.5,1", "--delta", "0.01",
                                      "--replicas", "16", "--seed", "77"};
  auto a = base, b = base;
  a.insert(a.end(), {"--threads", "1"});
  b.insert(b.end(), {"--threads", "4"});
  CHECK(run(a).out == run(b).out);
}

TEST_CASE("failed gates exit with 1 after writing the report") {
  const auto r = run({"experiment", "smolu", "--method", "exact-exponential", "--mech", "stable:1.5", "--tolerance",
                      "1e-20", "--format", "json"});
  CHECK(r.code == 1);
  CHECK(r.out.find("\"pass\": false") != std::string::npos);
}

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "coalflow/csbp_analytic.hpp"
#include "coalflow/empirical.hpp"
#include "coalflow/measures.hpp"
#include "coalflow/rng.hpp"

namespace coalflow {

inline constexpr int kReportSchemaVersion = 1;

/// How a statistic is judged.
enum class Rule {
  AbsGap,  // |value - reference| <= tolerance
  AtMost,  // value <= reference + tolerance
  AtLeast, // value >= reference - tolerance
  Info,    // reported only
};

/// One reported number, its reference and (if gated) its verdict.
struct Statistic {
  std::string name;
  double value = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
  std::string provenance;  // closed-form | quadrature | oracle-MC
  Rule rule = Rule::Info;
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;

  double gap() const;
};

struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::size_t replicas = 0;
  std::vector<Statistic> statistics;
  bool pass = true;
  double wall_time = 0;
  std::vector<std::string> raw_columns;
  std::vector<std::vector<double>> raw_rows;

  void param(const std::string& key, const std::string& value) { parameters.emplace_back(key, value); }
  void param(const std::string& key, double value);
  /// Adds a statistic, evaluating its rule.
  const Statistic& add(Statistic s);
  void info(const std::string& name, double value, double se = std::numeric_limits<double>::quiet_NaN());
  void abs_gap(const std::string& name, double value, double reference, const std::string& provenance,
               double tolerance, double se = std::numeric_limits<double>::quiet_NaN());
  void at_most(const std::string& name, double value, double bound, const std::string& provenance,
               double tolerance = 0, double se = std::numeric_limits<double>::quiet_NaN());
  void at_least(const std::string& name, double value, double bound, const std::string& provenance,
                double tolerance = 0, double se = std::numeric_limits<double>::quiet_NaN());
  const Statistic* find(const std::string& name) const;
};

/// JSON with a `schema_version` field; infinities are written as strings.
/// Wall time is included only when `timing` is set.
std::string report_json(const ExperimentReport& rep, bool timing = false);
/// Aligned text table.
std::string report_text(const ExperimentReport& rep, bool timing = false);
/// Per-replica statistics (raw_columns / raw_rows) as CSV.
void write_raw_csv(const ExperimentReport& rep, std::ostream& os);

/// Derived seed for a labelled sub-experiment.
std::uint64_t sub_seed(std::uint64_t master, std::uint64_t label);

// ---------------------------------------------------------------------------
// Poisson sums

/// Finite intensity measure for Poisson sums: total mass and a sampler of
/// the normalized law.
struct PoissonIntensity {
  double mass = 0;
  std::function<double(Rng&)> draw;

  static PoissonIntensity from_atoms(const std::vector<Atom>& atoms);
  /// Law read off a tabulated CDF (linear interpolation between grid
  /// points), optionally truncated to [0, x_max].
  static PoissonIntensity from_table(const LevyMeasureTable& table,
                                     double x_max = std::numeric_limits<double>::infinity());
};

struct PoissonSumOptions {
  /// Condition the atom count N on N >= min_count.
  std::uint64_t min_count = 0;
  /// Stop adding atoms once the partial sum exceeds this value (the return
  /// value is then only known to exceed it).
  double stop_above = std::numeric_limits<double>::infinity();
};

/// Poisson variate with the given mean conditioned on being >= min_count.
std::uint64_t poisson_at_least(double mean, std::uint64_t min_count, Rng& rng);

/// Sum of the atoms of a Poisson random measure with intensity mu.
double poisson_sum_sample(const PoissonIntensity& mu, Rng& rng, const PoissonSumOptions& opts = {});

// ---------------------------------------------------------------------------
// Coagulation-equation residuals

enum class SmoluMethod { ExactExponential, FellerQuadrature, McPoisson };

/// Test function: exponential f(x) = 1 - e^{-qx} or a hat on [lo, hi].
struct TestFunction {
  enum class Kind { Exponential, Hat } kind = Kind::Exponential;
  double q = 1, lo = 0.5, hi = 1.5;

  double operator()(double x) const;
  double sup_norm() const { return 1.0; }
  std::string describe() const;
  static TestFunction exponential(double q) { return {Kind::Exponential, q, 0, 0}; }
  static TestFunction hat(double lo, double hi) { return {Kind::Hat, 1, lo, hi}; }
};

struct SmoluOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t samples_per_node = 4000;
  double tolerance = std::numeric_limits<double>::quiet_NaN();  // method default when NaN
};

/// Residual of the coagulation equation at time t for the given test function.
ExperimentReport smolu_residual(const BranchingMechanism& mech, double t, const TestFunction& f, SmoluMethod method,
                                const SmoluOptions& opts = {});

/// Truncated series check for a Feller mechanism: terms k <= 4 by grid
/// convolution, k in [5, k_max] bounded by the series tail.
ExperimentReport smolu_series_check(const BranchingMechanism& mech, double t, const TestFunction& f, int k_max = 12);

/// The full coagulation-equation battery.
ExperimentReport smolu_run(const SmoluOptions& opts = {});

// ---------------------------------------------------------------------------
// Limit-theorem experiments

struct LargepopConfig {
  std::vector<Atom> pi_atoms{{1.0, 1.0}};
  std::vector<double> a_list{5, 50};
  double x = 1, t = 1;
  std::vector<double> q_list{1};
  std::size_t replicas = 100000;
  double slack = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};
ExperimentReport largepop_marginal_run(const LargepopConfig& cfg);

struct HydroConfig {
  double gamma = 1.5;
  std::vector<double> a_list{50, 100};
  double t = 0.5;
  std::uint64_t n = 200000;
  std::size_t replicas = 20;
  double x_lo = 0.1, x_hi = 5;
  double tolerance = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};
ExperimentReport hydrodynamic_run(const HydroConfig& cfg);

struct SmalltimeConfig {
  double gamma = 1.5;
  std::vector<double> eps_list{0.02, 0.01};
  std::uint64_t n = 200000;
  std::vector<double> x_grid;  // defaults to 60 log-spaced points on [0.05, 5]
  std::size_t replicas = 50;
  double mass_tolerance = 0.1;  // relative
  double cdf_tolerance = 0.08;
  bool kingman_control = true;
  double kingman_eps = 1e-3;
  std::uint64_t kingman_n = 100000;
  std::vector<double> kingman_x_grid;  // defaults to 40 log-spaced points on [0.5, 5]
  std::size_t kingman_replicas = 50;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};
ExperimentReport smalltime_blocks_run(const SmalltimeConfig& cfg);

struct RatesConfig {
  double gamma = 1.5;
  std::vector<double> b_list{1e3, 1e4, 1e5};
  int k_terms = 200;
  int k_ratio_max = 6;
  double ratio_tolerance = 0.02;
  double series_tolerance = 1e-6;
};
ExperimentReport rate_asymptotics_check(const RatesConfig& cfg);

struct CdiConfig {
  std::vector<double> gammas{1.2, 1.5, 1.8};
  /// Extra Lambda specs expected to fail both criteria.
  std::vector<std::string> negative_specs{"beta:1,1", "nu-atoms:0.5@1", "atoms:0.3@0.5,0.8@0.5"};
};
ExperimentReport cdi_equivalence_run(const CdiConfig& cfg);

}  // namespace coalflow

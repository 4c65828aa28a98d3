#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "coalflow/measures.hpp"
#include "coalflow/rng.hpp"

namespace coalflow {

/// Tracked CSBP flow coordinates Z(t, x_1) <= ... <= Z(t, x_p).
struct FlowState {
  std::vector<double> points;
  std::vector<double> values;
  double clock = 0;
  double delta = 0;
  std::uint64_t events = 0;
};

/// pi restricted to ]delta, inf[: total rate m_delta, compensator drift
/// c_delta and a sampler for r ~ pi|_{]delta,inf[} / m_delta.
class TruncatedJumps {
 public:
  TruncatedJumps(const JumpMeasure& pi, double delta);

  double rate() const { return rate_; }
  double drift() const { return drift_; }
  double sample(Rng& rng) const;

 private:
  JumpMeasure::Family family_;
  double gamma_ = 0, delta_ = 0, rate_ = 0, drift_ = 0;
  std::vector<double> positions_, cumulative_;  // atoms, or density grid edges and CDF
};

/// Called after every jump with the event time and the coordinate values.
using FlowObserver = std::function<void(double, const std::vector<double>&)>;

struct FlowOptions {
  /// Verify Z^i <= Z^j after every event; a violation throws NumericalFailure.
  bool check_monotone = true;
  const FlowObserver* observer = nullptr;
};

/// Exact simulation of the delta-truncated flow for a jump-only mechanism.
/// Between jumps every coordinate decays like e^{-c_delta t}; jumps arrive
/// at rate Z^p m_delta, and a jump r is added to the coordinates with
/// Z^i >= u, u uniform on [0, Z^p].
FlowState simulate_csbp_flow(const BranchingMechanism& mech, std::vector<double> points, double t_end, double delta,
                             Rng& rng, const FlowOptions& opts = {});

/// Exact draw of Z(t) from Z(0) = x for Psi(q) = q^2/2.
double feller_exact_sample(double t, double x, Rng& rng);
/// Same for Psi(q) = beta q^2: Poisson(x/(beta t)) exponential clusters of mean beta t.
double feller_exact_sample(double beta, double t, double x, Rng& rng);

/// Exact draw from lambda_t / lambda_t(]0,inf[) for the stable mechanism:
/// X = m_t^-1 E^{1/alpha} S', alpha = gamma - 1, E exponential and S' a
/// positive alpha-stable variable size-biased by 1/S (Kanter's
/// representation with rejection).
double stable_cluster_sample(double gamma, double t, Rng& rng);

/// Upper bound on |u^delta_t(q) - u_t(q)| for the delta-truncated mechanism.
/// With K = (1/2) int_{r<=delta} r^2 pi(dr), |Psi_delta - Psi|(v) <= K v^2 and
/// u^delta >= u, which gives
///   0 <= u^delta_t - u_t <= K int_0^t min(q, u_s + K q^2 s)^2 ds <= K q^2 t.
double truncation_bias_bound(const BranchingMechanism& mech, double delta, double q, double t);

/// Monte Carlo estimate of lambda_t(]z_floor, x[) from clusters of
/// Z(t, x0)/x0 for small x0. Flagged as an estimate: it is the fallback
/// for mechanisms without a closed-form continuation.
struct LevyCdfEstimate {
  std::vector<double> x;
  std::vector<double> cdf;
  std::vector<double> se;
  double x0 = 0, delta = 0, z_floor = 0;
  std::size_t replicas = 0;
  bool estimate = true;
};

LevyCdfEstimate levy_cdf_mc_estimate(const BranchingMechanism& mech, double t, const std::vector<double>& xs,
                                     double x0, double delta, std::size_t replicas, std::uint64_t seed,
                                     unsigned threads = 1);

/// Records (time, Z^1..Z^p) rows at jump times.
class TrajectoryRecorder {
 public:
  FlowObserver observer();
  void write_csv(std::ostream& os) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::pair<double, std::vector<double>>> rows_;
};

}  // namespace coalflow

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "coalflow/measures.hpp"
#include "coalflow/rng.hpp"

namespace coalflow {

/// Finite measure nu on ]0,1] driving the Fleming-Viot flow.
class FiniteNu {
 public:
  /// Point masses (nu weights) at positions in ]0,1].
  static FiniteNu atoms(std::vector<Atom> atoms);
  /// Density on ]lo,hi[ within ]0,1]; must integrate to a finite value.
  static FiniteNu density(std::function<double(double)> rho, double lo, double hi, std::string label);
  /// nu = x^-2 Lambda when that measure is finite. Infinite nu throws
  /// DomainError: such flows are sampled through the dual coalescent
  /// (fv_marginal_via_dual).
  static FiniteNu from_lambda(const LambdaMeasure& lam);

  double total() const { return total_; }
  bool is_atoms() const { return !positions_.empty() && grid_.empty(); }
  const std::vector<Atom>& atom_list() const { return atoms_; }
  /// Draw from nu / |nu|.
  double sample(Rng& rng) const;
  std::string describe() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> positions_, cumulative_;  // atoms: positions and cumulative weights
  std::vector<double> grid_, grid_cdf_;         // density: cell edges and normalized CDF
  double total_ = 0;
  std::string label_;
};

/// Tracked values F(x_1) <= ... <= F(x_p).
struct FvFlowState {
  std::vector<double> points;
  std::vector<double> values;
  double clock = 0;
  double nu_total = 0;
  std::uint64_t events = 0;
};

/// Called after every event with the event time and the tracked values.
using FvObserver = std::function<void(double, const std::vector<double>&)>;

/// Exact event simulation: at rate |nu| draw xi ~ nu/|nu| and U uniform,
/// then F <- xi 1{U <= F} + F (1 - xi) at every tracked point. Ordering is
/// asserted after each event.
FvFlowState simulate_fv_flow(const FiniteNu& nu, std::vector<double> points, double t_end, Rng& rng,
                             const FvObserver* observer = nullptr);

/// Continues `state` by `dt` with the same update rule.
void advance_fv_flow(const FiniteNu& nu, FvFlowState& state, double dt, Rng& rng,
                     const FvObserver* observer = nullptr);

/// F^(a)_t(x) = a F~_{at}(x/a) at tracked points in [0,a].
FvFlowState rescale_largepop(double a, const FiniteNu& nu_tilde, const std::vector<double>& points, double t_end,
                             Rng& rng);

/// nu~^(a): image of a finite jump measure pi under r -> r/a (requires a >= max atom).
FiniteNu largepop_nu_tilde(double a, const JumpMeasure& pi);

/// nu^(a): image of nu~ under r -> a r, as a jump measure on ]0,a].
JumpMeasure largepop_nu(double a, const FiniteNu& nu_tilde);

/// Comparison of (r ^ r^2) nu^(a)(dr) with (r ^ r^2) pi(dr).
struct AssumptionHReport {
  double a = 0;
  double mass_a = 0;   // int (r ^ r^2) nu^(a)(dr)
  double mass_pi = 0;  // int (r ^ r^2) pi(dr)
  double cdf_gap = 0;  // sup_x of the gap between the two weighted distribution functions
};

AssumptionHReport assumption_h_report(double a, const FiniteNu& nu_tilde, const JumpMeasure& pi);

/// Records rows (time, x_1..x_p, F(x_1)..F(x_p)).
class FvSnapshotRecorder {
 public:
  explicit FvSnapshotRecorder(std::vector<double> points) : points_(std::move(points)) {}
  FvObserver observer();
  void record(double time, const std::vector<double>& values) { rows_.emplace_back(time, values); }
  void write_csv(std::ostream& os) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<double> points_;
  std::vector<std::pair<double, std::vector<double>>> rows_;
};

}  // namespace coalflow

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coalflow {

/// Point mass `weight` at `position`.
struct Atom {
  double position;
  double weight;
};

/// Jump measure pi on ]0,inf[ with the integrability condition
/// int (r ^ r^2) pi(dr) < inf.
class JumpMeasure {
 public:
  enum class Family { Stable, Atoms, Density };

  /// pi(]a,inf[) = a^-gamma, gamma in ]1,2[.
  static JumpMeasure stable(double gamma);
  /// Finite sum of point masses.
  static JumpMeasure atoms(std::vector<Atom> atoms);
  /// Density `rho` on ]lo,hi[; hi may be +inf. Integrability is checked by
  /// quadrature at construction.
  static JumpMeasure density(std::function<double(double)> rho, double lo, double hi, std::string label);

  Family family() const { return family_; }
  double gamma() const;
  const std::vector<Atom>& atoms() const { return atoms_; }
  double density_at(double r) const;
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  const std::string& label() const { return label_; }

  /// pi(]delta,inf[).
  double tail(double delta) const;
  /// int_{r>delta} r pi(dr).
  double first_moment_above(double delta) const;
  /// int_{r<=delta} r^2 pi(dr).
  double second_moment_below(double delta) const;
  /// int (r ^ r^2) pi(dr).
  double small_large_moment() const;
  /// int g(r) pi(dr) for g = O(r^2) at 0 and O(r) at inf. `scale` hints
  /// where g changes behavior (used to place quadrature breakpoints).
  double integrate(const std::function<double(double)>& g, double scale) const;

  std::string describe() const;

 private:
  Family family_ = Family::Atoms;
  double gamma_ = 0;
  std::vector<Atom> atoms_;
  std::shared_ptr<const std::function<double(double)>> rho_;
  double lo_ = 0, hi_ = 0;
  std::string label_;
};

/// Critical branching mechanism Psi(q) = beta q^2 + int (e^{-rq} - 1 + rq) pi(dr).
class BranchingMechanism {
 public:
  enum class Kind { Feller, Stable, Generic };

  BranchingMechanism(double beta, std::optional<JumpMeasure> pi);
  static BranchingMechanism feller(double beta) { return {beta, std::nullopt}; }
  static BranchingMechanism stable(double gamma) { return {0.0, JumpMeasure::stable(gamma)}; }
  static BranchingMechanism jumps(JumpMeasure pi) { return {0.0, std::move(pi)}; }

  double beta() const { return beta_; }
  const std::optional<JumpMeasure>& pi() const { return pi_; }
  Kind kind() const { return kind_; }
  double gamma() const { return pi_->gamma(); }

  /// Compact `family:params` form, parseable by parse_mechanism.
  std::string spec() const;

 private:
  double beta_;
  std::optional<JumpMeasure> pi_;
  Kind kind_;
};

/// Finite measure Lambda on [0,1]; nu(dx) = x^-2 Lambda(dx) away from 0.
class LambdaMeasure {
 public:
  enum class Family { Kingman, Beta, Atoms, Density };

  static LambdaMeasure kingman();
  /// mass * Beta(a,c) density on ]0,1[.
  static LambdaMeasure beta(double a, double c, double mass = 1.0);
  /// Lambda atoms; nu has mass w/x^2 at x.
  static LambdaMeasure atoms(std::vector<Atom> lambda_atoms);
  /// Lambda given through nu atoms (weights are nu-masses).
  static LambdaMeasure nu_atoms(const std::vector<Atom>& nu_atoms);
  /// Lambda density on ]0,1[.
  static LambdaMeasure density(std::function<double(double)> lambda_density, std::string label);

  Family family() const { return family_; }
  bool is_kingman() const { return family_ == Family::Kingman; }
  double a() const { return a_; }
  double c() const { return c_; }
  double mass() const { return mass_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double density_at(double x) const;
  const std::string& label() const { return label_; }

  double total_mass() const;
  /// gamma when nu([eps,1]) is regularly varying with index -gamma, gamma in ]1,2[.
  std::optional<double> regular_variation_index() const;
  /// nu restricted to ]0,1] as a jump measure. Throws for Kingman.
  JumpMeasure nu_as_jump_measure() const;
  /// int g(x) nu(dx) over ]0,1]; `scale` as in JumpMeasure::integrate.
  double integrate_nu(const std::function<double(double)>& g, double scale) const;

  std::string spec() const;

 private:
  Family family_ = Family::Kingman;
  double a_ = 0, c_ = 0, mass_ = 1;
  std::vector<Atom> atoms_;
  std::shared_ptr<const std::function<double(double)>> density_;
  std::string label_;
};

/// e^{-z} - 1 + z without cancellation.
double em1p(double z);
/// q x - 1 + (1-x)^q without cancellation, x in [0,1], q >= 1.
double binom_defect(double q, double x);
/// P[Bin(b,x) >= 2].
double binom_ge2(std::uint64_t b, double x);

double psi_eval(const BranchingMechanism& mech, double q);
/// Psi'(q).
double psi_prime(const BranchingMechanism& mech, double q);
/// k-th derivative, k >= 2, q > 0.
double psi_derivative(const BranchingMechanism& mech, int k, double q);

double phi_eval(const LambdaMeasure& lam, double q);
/// nu([eps,1]).
double nu_tail(const LambdaMeasure& lam, double eps);
/// int x^{k-2} (1-x)^{b-k} Lambda(dx).
double binom_moment(const LambdaMeasure& lam, std::uint64_t b, std::uint64_t k);

enum class Verdict { Converges, Diverges, Inconclusive };

/// Diagnostics of a growth test for int^inf dq / F(q).
struct GrowthReport {
  Verdict verdict = Verdict::Inconclusive;
  double exponent = 0;       // power-law exponent fitted on [Q/10, Q]
  double power_rms = 0;      // log-residual of a power fit over [Q/1e4, Q]
  double log_model_rms = 0;  // relative residual of F(q) ~ q (A + B log q)
  bool log_corrected = false;
  double integral = 0;       // int_{q0}^{Q} dq / F(q)
  double tail = 0;           // extrapolated tail beyond Q (inf if divergent)
  double q_max = 1e8;
};

/// Power-law growth test for int_{q0}^inf dq / F(q).
GrowthReport growth_test(const std::function<double(double)>& F, double q0, double q_max = 1e8);

enum class ExtinctionVerdict { Extinct, NotExtinct, Inconclusive };
enum class CdiVerdict { ComesDown, DoesNotComeDown, Inconclusive };

struct ExtinctionReport {
  ExtinctionVerdict verdict;
  GrowthReport growth;
};

struct CdiReport {
  CdiVerdict verdict;
  GrowthReport growth;
  bool kingman_special = false;
  double ratio_min = 0;  // min of Phi/Psi on [2,1e6], Psi built with pi = nu
  double ratio_max = 0;
};

ExtinctionReport extinction_check(const BranchingMechanism& mech);
CdiReport cdi_check(const LambdaMeasure& lam);

std::string to_string(ExtinctionVerdict v);
std::string to_string(CdiVerdict v);

}  // namespace coalflow

#include "coalflow/csbp_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "coalflow/csbp_analytic.hpp"
#include "coalflow/error.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/quadrature.hpp"
#include "format.hpp"

namespace coalflow {

using detail::fmt;

TruncatedJumps::TruncatedJumps(const JumpMeasure& pi, double delta) : family_(pi.family()), delta_(delta) {
  if (!(delta > 0)) throw DomainError("truncation level delta must be > 0");
  switch (family_) {
    case JumpMeasure::Family::Stable: {
      gamma_ = pi.gamma();
      rate_ = pi.tail(delta);
      if (!(rate_ <= 1e12)) throw DomainError("delta " + fmt(delta) + " too small: m_delta = delta^-gamma overflows the event budget");
      drift_ = pi.first_moment_above(delta);
      break;
    }
    case JumpMeasure::Family::Atoms: {
      double cum = 0;
      for (const auto& a : pi.atoms()) {
        if (a.position > delta) {
          cum += a.weight;
          positions_.push_back(a.position);
          cumulative_.push_back(cum);
          drift_ += a.weight * a.position;
        }
      }
      rate_ = cum;
      break;
    }
    case JumpMeasure::Family::Density: {
      rate_ = pi.tail(delta);
      drift_ = pi.first_moment_above(delta);
      if (!(rate_ > 0)) break;
      // Inverse-CDF table on a log grid; cells hold 1/4096 of the log range.
      const double lo = std::max(delta, pi.lower());
      double hi = pi.upper();
      if (!std::isfinite(hi)) {
        hi = lo * 2;
        while (pi.tail(hi) > 1e-12 * rate_) hi *= 2;
      }
      constexpr int cells = 4096;
      double cum = 0;
      positions_.push_back(lo);
      cumulative_.push_back(0);
      for (int i = 1; i <= cells; ++i) {
        const double a = positions_.back(), b = lo * std::pow(hi / lo, static_cast<double>(i) / cells);
        cum += quad::integrate_singular([&pi](double r) { return pi.density_at(r); }, a, b, 1e-10);
        positions_.push_back(b);
        cumulative_.push_back(cum);
      }
      for (auto& c : cumulative_) c /= cum;
      break;
    }
  }
}

double TruncatedJumps::sample(Rng& rng) const {
  switch (family_) {
    case JumpMeasure::Family::Stable: return delta_ * std::exp(-std::log(rng.uniform()) / gamma_);
    case JumpMeasure::Family::Atoms: {
      if (positions_.size() == 1) return positions_[0];
      const double u = rng.uniform() * rate_;
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      return positions_[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), positions_.size() - 1)];
    }
    case JumpMeasure::Family::Density: {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), 1, positions_.size() - 1);
      const double w = (u - cumulative_[i - 1]) / std::max(cumulative_[i] - cumulative_[i - 1], 1e-300);
      return positions_[i - 1] * std::pow(positions_[i] / positions_[i - 1], std::clamp(w, 0.0, 1.0));
    }
  }
  return 0;
}

FlowState simulate_csbp_flow(const BranchingMechanism& mech, std::vector<double> points, double t_end, double delta,
                             Rng& rng, const FlowOptions& opts) {
  if (mech.beta() != 0 || !mech.pi()) {
    throw DomainError("simulate_csbp_flow: jump-only mechanisms (beta = 0); use feller_exact_sample for Feller");
  }
  if (!(t_end > 0) || !std::isfinite(t_end)) throw DomainError("simulate_csbp_flow: t_end must be > 0");
  if (points.empty()) throw DomainError("simulate_csbp_flow: no tracked points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0)) throw DomainError("simulate_csbp_flow: initial masses must be >= 0");
    if (i && points[i] < points[i - 1]) throw DomainError("simulate_csbp_flow: points must be ordered");
  }
  const TruncatedJumps jumps(*mech.pi(), delta);
  const double m = jumps.rate(), c = jumps.drift();

  FlowState st;
  st.points = points;
  st.values = std::move(points);
  st.delta = delta;
  auto& z = st.values;
  const std::size_t p = z.size();

  double t = 0;
  while (t < t_end) {
    // Decay factors stay representable within a chunk.
    double span = t_end - t;
    if (c * span > 600) span = 600 / c;
    const double chunk_end = t + span;
    if (m == 0 || z.back() <= 0) {
      const double f = std::exp(-c * span);
      for (auto& v : z) v *= f;
      t = chunk_end;
      continue;
    }
    double budget = std::exp(-c * span);  // decay still allowed before chunk_end
    double elapsed_log = 0;
    for (;;) {
      const double top = z.back();
      if (!(top > 0)) {
        for (auto& v : z) v *= budget;
        break;
      }
      const double e = rng.exponential();
      double event_time;
      if (c > 0) {
        // int_0^s top m e^{-c v} dv = e  <=>  e^{-c s} = 1 - c e / (top m).
        const double rho = 1 - c * e / (top * m);
        if (rho <= budget) {
          for (auto& v : z) v *= budget;
          break;
        }
        for (auto& v : z) v *= rho;
        budget /= rho;
        if (opts.observer) {
          elapsed_log -= std::log(rho);
          event_time = t + elapsed_log / c;
        } else {
          event_time = 0;
        }
      } else {
        const double s = e / (top * m);
        if (t + elapsed_log + s >= chunk_end) break;
        elapsed_log += s;
        event_time = t + elapsed_log;
      }
      const double r = jumps.sample(rng);
      const double u = rng.uniform() * z.back();
      for (std::size_t i = p; i-- > 0;) {
        if (z[i] < u) break;
        z[i] += r;
      }
      ++st.events;
      if (opts.check_monotone) {
        for (std::size_t i = 1; i < p; ++i) {
          if (z[i] < z[i - 1]) throw NumericalFailure("simulate_csbp_flow: flow ordering violated");
        }
      }
      if (opts.observer) (*opts.observer)(event_time, z);
    }
    t = chunk_end;
  }
  st.clock = t_end;
  return st;
}

double feller_exact_sample(double beta, double t, double x, Rng& rng) {
  if (!(t > 0) || !(beta > 0)) throw DomainError("feller_exact_sample: t and beta must be > 0");
  if (!(x >= 0)) throw DomainError("feller_exact_sample: x must be >= 0");
  if (x == 0) return 0;
  const double bt = beta * t;
  const std::uint64_t n = rng.poisson(x / bt);
  if (n == 0) return 0;
  return bt * rng.gamma(static_cast<double>(n));
}

double feller_exact_sample(double t, double x, Rng& rng) { return feller_exact_sample(0.5, t, x, rng); }

double stable_cluster_sample(double gamma, double t, Rng& rng) {
  if (!(gamma > 1 && gamma < 2)) throw DomainError("stable_cluster_sample: gamma must lie in ]1,2[");
  if (!(t > 0)) throw DomainError("stable_cluster_sample: t must be > 0");
  const double alpha = gamma - 1, expo = (1 - alpha) / alpha;
  auto kanter = [alpha](double u) {
    return std::pow(std::sin(alpha * u), alpha / (1 - alpha)) * std::sin((1 - alpha) * u) /
           std::pow(std::sin(u), 1 / (1 - alpha));
  };
  const double a_min = std::pow(alpha, alpha / (1 - alpha)) * (1 - alpha);
  double a;
  for (;;) {
    a = kanter(M_PI * rng.uniform());
    if (rng.uniform() <= std::pow(a_min / a, expo)) break;
  }
  const double s_tilted = std::pow(a / rng.gamma(1 / alpha), expo);
  const double m = std::pow(std::tgamma(2 - gamma) * t, 1 / (1 - gamma));
  return std::pow(rng.exponential(), 1 / alpha) * s_tilted / m;
}

double truncation_bias_bound(const BranchingMechanism& mech, double delta, double q, double t) {
  if (!(delta > 0)) throw DomainError("truncation_bias_bound: delta must be > 0");
  if (!(q >= 0) || !(t >= 0)) throw DomainError("truncation_bias_bound: q and t must be >= 0");
  if (!mech.pi() || q == 0 || t == 0) return 0;
  const double k = 0.5 * mech.pi()->second_moment_below(delta);
  if (k == 0) return 0;
  const double crude = k * q * q * t;
  auto f = [&](double s) {
    const double v = std::min(q, ut(mech, s, q) + k * q * q * s);
    return v * v;
  };
  const double refined = k * quad::integrate(f, 0, t, 1e-8);
  return std::min(crude, refined);
}

LevyCdfEstimate levy_cdf_mc_estimate(const BranchingMechanism& mech, double t, const std::vector<double>& xs,
                                     double x0, double delta, std::size_t replicas, std::uint64_t seed,
                                     unsigned threads) {
  if (!(x0 > 0)) throw DomainError("levy_cdf_mc_estimate: x0 must be > 0");
  if (replicas < 2) throw DomainError("levy_cdf_mc_estimate: need at least two replicas");
  if (extinction_check(mech).verdict != ExtinctionVerdict::Extinct) {
    throw UnsupportedFamily("levy_cdf: mechanism does not satisfy the extinction condition, so lambda_t is not finite");
  }
  LevyCdfEstimate est;
  est.x = xs;
  std::sort(est.x.begin(), est.x.end());
  est.x0 = x0;
  est.delta = delta;
  est.z_floor = x0;
  est.replicas = replicas;
  const auto z = replica_map(replicas, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    return simulate_csbp_flow(mech, {x0}, t, delta, rng).values[0];
  });
  const double n = static_cast<double>(replicas);
  for (double x : est.x) {
    double hits = 0;
    for (double v : z) hits += (v > est.z_floor && v < x) ? 1 : 0;
    const double p = hits / n;
    est.cdf.push_back(p / x0);
    est.se.push_back(std::sqrt(p * (1 - p) / n) / x0);
  }
  return est;
}

FlowObserver TrajectoryRecorder::observer() {
  return [this](double time, const std::vector<double>& values) { rows_.emplace_back(time, values); };
}

void TrajectoryRecorder::write_csv(std::ostream& os) const {
  const std::size_t p = rows_.empty() ? 0 : rows_.front().second.size();
  os << "time";
  for (std::size_t i = 1; i <= p; ++i) os << ",Z" << i;
  os << "\n";
  for (const auto& [time, values] : rows_) {
    os << fmt(time);
    for (double v : values) os << "," << fmt(v);
    os << "\n";
  }
}

}  // namespace coalflow

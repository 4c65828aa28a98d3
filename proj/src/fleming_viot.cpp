#include "coalflow/fleming_viot.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "coalflow/error.hpp"
#include "coalflow/quadrature.hpp"
#include "format.hpp"
#include "special.hpp"

namespace coalflow {

using detail::fmt;

namespace {

const char* kInfiniteNu =
    "nu is infinite; the flow cannot be simulated event by event. Use the dual coalescent "
    "(simulate-coalescent / fv_marginal_via_dual) instead";

}  // namespace

FiniteNu FiniteNu::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("FiniteNu: no atoms");
  FiniteNu nu;
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.position < r.position; });
  double cum = 0;
  for (const auto& a : atoms) {
    if (!(a.position > 0 && a.position <= 1)) throw DomainError("FiniteNu: atom positions must lie in ]0,1]");
    if (!(a.weight >= 0) || !std::isfinite(a.weight)) throw DomainError("FiniteNu: atom weights must be finite and >= 0");
    cum += a.weight;
    nu.positions_.push_back(a.position);
    nu.cumulative_.push_back(cum);
  }
  if (!(cum > 0)) throw DomainError("FiniteNu: zero total mass");
  nu.total_ = cum;
  nu.atoms_ = std::move(atoms);
  nu.label_ = "atoms";
  return nu;
}

FiniteNu FiniteNu::density(std::function<double(double)> rho, double lo, double hi, std::string label) {
  if (!(lo >= 0 && lo < hi && hi <= 1)) throw DomainError("FiniteNu: density support must lie in ]0,1]");
  FiniteNu nu;
  constexpr int cells = 4096;
  nu.grid_.push_back(lo);
  nu.grid_cdf_.push_back(0);
  double cum = 0;
  for (int i = 1; i <= cells; ++i) {
    const double a = nu.grid_.back(), b = lo + (hi - lo) * i / cells;
    const double piece = quad::integrate_singular(rho, a, b, 1e-10);
    if (!std::isfinite(piece)) throw DomainError(kInfiniteNu);
    cum += piece;
    nu.grid_.push_back(b);
    nu.grid_cdf_.push_back(cum);
  }
  if (!(cum > 0) || !std::isfinite(cum)) throw DomainError(kInfiniteNu);
  for (auto& c : nu.grid_cdf_) c /= cum;
  nu.total_ = cum;
  nu.label_ = std::move(label);
  return nu;
}

FiniteNu FiniteNu::from_lambda(const LambdaMeasure& lam) {
  switch (lam.family()) {
    case LambdaMeasure::Family::Kingman: throw DomainError(kInfiniteNu);
    case LambdaMeasure::Family::Atoms: {
      std::vector<Atom> atoms;
      for (const auto& a : lam.atoms()) {
        if (a.position <= 0) throw DomainError(kInfiniteNu);
        atoms.push_back({a.position, a.weight / (a.position * a.position)});
      }
      return FiniteNu::atoms(std::move(atoms));
    }
    case LambdaMeasure::Family::Beta: {
      if (!(lam.a() > 2)) throw DomainError(kInfiniteNu);
      const double a = lam.a(), c = lam.c(), scale = lam.mass() / std::exp(detail::log_beta(a, c));
      return density([=](double x) { return scale * std::pow(x, a - 3) * std::pow(1 - x, c - 1); }, 0, 1,
                     "nu(" + lam.spec() + ")");
    }
    case LambdaMeasure::Family::Density: {
      const LambdaMeasure copy = lam;
      const double near0 = copy.integrate_nu([](double) { return 1.0; }, 0.5);
      if (!std::isfinite(near0)) throw DomainError(kInfiniteNu);
      return density([copy](double x) { return copy.density_at(x) / (x * x); }, 0, 1, "nu(" + lam.spec() + ")");
    }
  }
  throw DomainError(kInfiniteNu);
}

double FiniteNu::sample(Rng& rng) const {
  if (!grid_.empty()) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(grid_cdf_.begin(), grid_cdf_.end(), u);
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - grid_cdf_.begin()), 1, grid_.size() - 1);
    const double w = (u - grid_cdf_[i - 1]) / std::max(grid_cdf_[i] - grid_cdf_[i - 1], 1e-300);
    return grid_[i - 1] + (grid_[i] - grid_[i - 1]) * std::clamp(w, 0.0, 1.0);
  }
  if (positions_.size() == 1) return positions_[0];
  const double u = rng.uniform() * total_;
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  return positions_[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), positions_.size() - 1)];
}

std::string FiniteNu::describe() const {
  if (!grid_.empty()) return label_;
  std::string s = "atoms:";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) s += ",";
    s += fmt(atoms_[i].position) + "@" + fmt(atoms_[i].weight);
  }
  return s;
}

// ---------------------------------------------------------------------------

void advance_fv_flow(const FiniteNu& nu, FvFlowState& st, double dt, Rng& rng, const FvObserver* observer) {
  if (!(dt >= 0) || !std::isfinite(dt)) throw DomainError("simulate_fv_flow: time span must be finite and >= 0");
  const double t_end = st.clock + dt;
  auto& f = st.values;
  const double rate = nu.total();
  for (;;) {
    const double next = st.clock + rng.exponential() / rate;
    if (next > t_end) break;
    st.clock = next;
    const double xi = nu.sample(rng);
    const double u = rng.uniform();
    for (auto& v : f) v = (u <= v) ? v + xi * (1 - v) : v - xi * v;
    ++st.events;
    for (std::size_t i = 1; i < f.size(); ++i) {
      if (f[i] < f[i - 1]) throw NumericalFailure("simulate_fv_flow: flow ordering violated");
    }
    if (observer) (*observer)(st.clock, f);
  }
  st.clock = t_end;
}

FvFlowState simulate_fv_flow(const FiniteNu& nu, std::vector<double> points, double t_end, Rng& rng,
                             const FvObserver* observer) {
  if (points.empty()) throw DomainError("simulate_fv_flow: no tracked points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0 && points[i] <= 1)) throw DomainError("simulate_fv_flow: tracked points must lie in [0,1]");
    if (i && points[i] < points[i - 1]) throw DomainError("simulate_fv_flow: tracked points must be ordered");
  }
  FvFlowState st;
  st.points = points;
  st.values = std::move(points);
  st.nu_total = nu.total();
  advance_fv_flow(nu, st, t_end, rng, observer);
  return st;
}

FvFlowState rescale_largepop(double a, const FiniteNu& nu_tilde, const std::vector<double>& points, double t_end,
                             Rng& rng) {
  if (!(a > 0)) throw DomainError("rescale_largepop: a must be > 0");
  std::vector<double> scaled;
  scaled.reserve(points.size());
  for (double x : points) {
    if (!(x >= 0 && x <= a)) throw DomainError("rescale_largepop: tracked points must lie in [0,a]");
    scaled.push_back(x / a);
  }
  FvFlowState st = simulate_fv_flow(nu_tilde, std::move(scaled), a * t_end, rng);
  st.points = points;
  for (auto& v : st.values) v *= a;
  st.clock = t_end;
  return st;
}

FiniteNu largepop_nu_tilde(double a, const JumpMeasure& pi) {
  if (pi.family() != JumpMeasure::Family::Atoms) throw UnsupportedFamily("largepop: pi must be a finite atom measure");
  std::vector<Atom> atoms;
  for (const auto& at : pi.atoms()) {
    if (at.position > a) throw DomainError("largepop: a must be >= every atom of pi");
    atoms.push_back({at.position / a, at.weight});
  }
  return FiniteNu::atoms(std::move(atoms));
}

JumpMeasure largepop_nu(double a, const FiniteNu& nu_tilde) {
  if (!nu_tilde.is_atoms()) throw UnsupportedFamily("largepop_nu: atom measures only");
  std::vector<Atom> atoms;
  for (const auto& at : nu_tilde.atom_list()) atoms.push_back({a * at.position, at.weight});
  return JumpMeasure::atoms(std::move(atoms));
}

AssumptionHReport assumption_h_report(double a, const FiniteNu& nu_tilde, const JumpMeasure& pi) {
  const JumpMeasure nu_a = largepop_nu(a, nu_tilde);
  if (pi.family() != JumpMeasure::Family::Atoms) throw UnsupportedFamily("assumption_h_report: atom measures only");
  auto weight = [](double r) { return std::min(r, r * r); };
  AssumptionHReport rep;
  rep.a = a;
  std::vector<std::pair<double, double>> signed_mass;
  for (const auto& at : nu_a.atoms()) {
    rep.mass_a += weight(at.position) * at.weight;
    signed_mass.emplace_back(at.position, weight(at.position) * at.weight);
  }
  for (const auto& at : pi.atoms()) {
    rep.mass_pi += weight(at.position) * at.weight;
    signed_mass.emplace_back(at.position, -weight(at.position) * at.weight);
  }
  std::sort(signed_mass.begin(), signed_mass.end());
  double run = 0;
  for (std::size_t i = 0; i < signed_mass.size(); ++i) {
    run += signed_mass[i].second;
    if (i + 1 == signed_mass.size() || signed_mass[i + 1].first != signed_mass[i].first) {
      rep.cdf_gap = std::max(rep.cdf_gap, std::abs(run));
    }
  }
  return rep;
}

FvObserver FvSnapshotRecorder::observer() {
  return [this](double time, const std::vector<double>& values) { record(time, values); };
}

void FvSnapshotRecorder::write_csv(std::ostream& os) const {
  os << "time";
  for (std::size_t i = 1; i <= points_.size(); ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= points_.size(); ++i) os << ",F" << i;
  os << "\n";
  for (const auto& [time, values] : rows_) {
    os << fmt(time);
    for (double x : points_) os << "," << fmt(x);
    for (double v : values) os << "," << fmt(v);
    os << "\n";
  }
}

}  // namespace coalflow

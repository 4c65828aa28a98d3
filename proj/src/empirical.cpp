#include "coalflow/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "coalflow/error.hpp"
#include "format.hpp"

namespace coalflow {

EmpiricalMeasure::EmpiricalMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)), sorted_(false) {
  for (const auto& a : atoms_) {
    if (!(a.position > 0)) throw DomainError("empirical measure: positions must be > 0");
    if (!(a.weight >= 0)) throw DomainError("empirical measure: weights must be >= 0");
  }
}

void EmpiricalMeasure::add(double position, double weight) {
  if (!(position > 0)) throw DomainError("empirical measure: positions must be > 0");
  if (!(weight >= 0)) throw DomainError("empirical measure: weights must be >= 0");
  atoms_.push_back({position, weight});
  sorted_ = false;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& other, double factor) {
  for (const auto& a : other.atoms_) atoms_.push_back({a.position, a.weight * factor});
  sorted_ = false;
}

EmpiricalMeasure EmpiricalMeasure::rescaled(double scale, double weight_factor) const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back({a.position * scale, a.weight * weight_factor});
  return EmpiricalMeasure(std::move(out));
}

void EmpiricalMeasure::ensure_sorted() const {
  if (sorted_) return;
  std::stable_sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
  prefix_.assign(atoms_.size() + 1, 0.0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) prefix_[i + 1] = prefix_[i] + atoms_[i].weight;
  sorted_ = true;
}

const std::vector<Atom>& EmpiricalMeasure::atoms() const {
  ensure_sorted();
  return atoms_;
}

double EmpiricalMeasure::total() const {
  ensure_sorted();
  return prefix_.empty() ? 0.0 : prefix_.back();
}

double EmpiricalMeasure::cdf_below(double x) const {
  ensure_sorted();
  if (atoms_.empty()) return 0;
  const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x, [](const Atom& a, double v) { return a.position < v; });
  return prefix_[static_cast<std::size_t>(it - atoms_.begin())];
}

double EmpiricalMeasure::cdf_through(double x) const {
  ensure_sorted();
  if (atoms_.empty()) return 0;
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x, [](double v, const Atom& a) { return v < a.position; });
  return prefix_[static_cast<std::size_t>(it - atoms_.begin())];
}

void EmpiricalMeasure::write_csv(std::ostream& os) const {
  os << "frequency,weight\n";
  for (const auto& a : atoms()) os << detail::fmt(a.position) << "," << detail::fmt(a.weight) << "\n";
}

double kolmogorov_distance(const EmpiricalMeasure& emp, const CdfFn& ref_cdf, double ref_sup) {
  if (emp.empty()) return ref_sup;
  const auto& atoms = emp.atoms();
  double d = 0, below = 0;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double x = atoms[i].position;
    double w = 0;
    while (i < atoms.size() && atoms[i].position == x) w += atoms[i++].weight;
    const double r = ref_cdf(x);
    // Just below x the empirical CDF is `below`; just above it is below + w.
    d = std::max({d, std::abs(below - r), std::abs(below + w - r)});
    below += w;
  }
  d = std::max(d, std::abs(below - ref_sup));
  return d;
}

double kolmogorov_distance_window(const EmpiricalMeasure& emp, const CdfFn& ref_cdf, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("kolmogorov window must satisfy lo < hi");
  double d = std::max(std::abs(emp.cdf_below(lo) - ref_cdf(lo)), std::abs(emp.cdf_through(hi) - ref_cdf(hi)));
  d = std::max(d, std::abs(emp.cdf_below(hi) - ref_cdf(hi)));
  const auto& atoms = emp.atoms();
  auto it = std::lower_bound(atoms.begin(), atoms.end(), lo, [](const Atom& a, double v) { return a.position < v; });
  double below = emp.cdf_below(lo);
  while (it != atoms.end() && it->position <= hi) {
    const double x = it->position;
    double w = 0;
    while (it != atoms.end() && it->position == x) w += (it++)->weight;
    const double r = ref_cdf(x);
    d = std::max({d, std::abs(below - r), std::abs(below + w - r)});
    below += w;
  }
  return d;
}

}  // namespace coalflow

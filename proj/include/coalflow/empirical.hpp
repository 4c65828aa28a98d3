#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "coalflow/measures.hpp"

namespace coalflow {

/// Weighted atoms on ]0,inf[ with CDF queries.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<Atom> atoms);

  void add(double position, double weight = 1.0);
  /// Adds all atoms of `other`, scaling weights by `factor`.
  void merge(const EmpiricalMeasure& other, double factor = 1.0);
  /// Image under x -> scale*x with weights multiplied by `weight_factor`.
  EmpiricalMeasure rescaled(double scale, double weight_factor) const;

  const std::vector<Atom>& atoms() const;
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total() const;

  /// mu(]0,x[).
  double cdf_below(double x) const;
  /// mu(]0,x]).
  double cdf_through(double x) const;

  void write_csv(std::ostream& os) const;

 private:
  void ensure_sorted() const;
  mutable std::vector<Atom> atoms_;
  mutable std::vector<double> prefix_;
  mutable bool sorted_ = true;
};

using CdfFn = std::function<double(double)>;

/// sup_x |mu(]0,x[) - ref(x)| over x > 0, evaluated at atom positions from
/// both sides. An empty measure returns `ref_sup` (the supremum of ref).
double kolmogorov_distance(const EmpiricalMeasure& emp, const CdfFn& ref_cdf, double ref_sup);

/// Same supremum restricted to x in [lo, hi] (ref must be continuous there).
double kolmogorov_distance_window(const EmpiricalMeasure& emp, const CdfFn& ref_cdf, double lo, double hi);

}  // namespace coalflow

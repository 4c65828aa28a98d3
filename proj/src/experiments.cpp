#include "coalflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "coalflow/coalescent.hpp"
#include "coalflow/csbp_analytic.hpp"
#include "coalflow/error.hpp"
#include "coalflow/fleming_viot.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/spec_parse.hpp"
#include "format.hpp"

namespace coalflow {

using detail::fmt;

double Statistic::gap() const {
  switch (rule) {
    case Rule::AbsGap: return std::abs(value - reference);
    case Rule::AtMost: return value - reference;
    case Rule::AtLeast: return reference - value;
    case Rule::Info: break;
  }
  return std::isnan(reference) ? std::numeric_limits<double>::quiet_NaN() : std::abs(value - reference);
}

void ExperimentReport::param(const std::string& key, double value) { param(key, fmt(value)); }

const Statistic& ExperimentReport::add(Statistic s) {
  switch (s.rule) {
    case Rule::AbsGap:
    case Rule::AtMost:
    case Rule::AtLeast: s.pass = s.gap() <= s.tolerance; break;
    case Rule::Info: s.pass = true; break;
  }
  pass = pass && s.pass;
  statistics.push_back(std::move(s));
  return statistics.back();
}

void ExperimentReport::info(const std::string& name, double value, double se) {
  Statistic s;
  s.name = name;
  s.value = value;
  s.se = se;
  add(std::move(s));
}

void ExperimentReport::abs_gap(const std::string& name, double value, double reference, const std::string& provenance,
                               double tolerance, double se) {
  add({name, value, se, reference, provenance, Rule::AbsGap, tolerance});
}

void ExperimentReport::at_most(const std::string& name, double value, double bound, const std::string& provenance,
                               double tolerance, double se) {
  add({name, value, se, bound, provenance, Rule::AtMost, tolerance});
}

void ExperimentReport::at_least(const std::string& name, double value, double bound, const std::string& provenance,
                                double tolerance, double se) {
  add({name, value, se, bound, provenance, Rule::AtLeast, tolerance});
}

const Statistic* ExperimentReport::find(const std::string& name) const {
  for (const auto& s : statistics) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t label) {
  return mix64(master ^ mix64(label + 0x2545f4914f6cdd1dULL));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (n - 1) / n);
  return r;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string tag(const char* key, double v) { return std::string(key) + "=" + fmt(v); }

}  // namespace

// ---------------------------------------------------------------------------

PoissonIntensity PoissonIntensity::from_atoms(const std::vector<Atom>& atoms) {
  PoissonIntensity mu;
  std::vector<double> pos, cum;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0) || !(a.position > 0)) throw DomainError("poisson intensity: atoms need position > 0, weight >= 0");
    if (a.weight == 0) continue;
    mu.mass += a.weight;
    pos.push_back(a.position);
    cum.push_back(mu.mass);
  }
  const double total = mu.mass;
  mu.draw = [pos, cum, total](Rng& rng) {
    const double u = rng.uniform() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    return pos[std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), pos.size() - 1)];
  };
  return mu;
}

PoissonIntensity PoissonIntensity::from_table(const LevyMeasureTable& table, double x_max) {
  if (table.x.empty()) throw DomainError("poisson intensity: empty table");
  std::vector<double> xs{0.0}, cs{0.0};
  for (std::size_t i = 0; i < table.x.size() && table.x[i] <= x_max; ++i) {
    if (table.x[i] <= xs.back()) continue;
    xs.push_back(table.x[i]);
    cs.push_back(std::max(table.cdf[i], cs.back()));
  }
  if (std::isfinite(x_max) && x_max > xs.back()) {
    xs.push_back(x_max);
    cs.push_back(std::max(table.cdf_at(x_max), cs.back()));
  }
  PoissonIntensity mu;
  mu.mass = cs.back();
  const double total = mu.mass;
  mu.draw = [xs, cs, total](Rng& rng) {
    const double u = rng.uniform() * total;
    const auto it = std::lower_bound(cs.begin(), cs.end(), u);
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cs.begin()), 1, cs.size() - 1);
    const double w = (u - cs[i - 1]) / std::max(cs[i] - cs[i - 1], 1e-300);
    return xs[i - 1] + (xs[i] - xs[i - 1]) * std::clamp(w, 0.0, 1.0);
  };
  return mu;
}

std::uint64_t poisson_at_least(double mean, std::uint64_t min_count, Rng& rng) {
  if (!(mean >= 0)) throw DomainError("poisson_at_least: mean must be >= 0");
  if (min_count == 0) return rng.poisson(mean);
  if (mean == 0) throw DomainError("poisson_at_least: zero mean cannot reach the minimum count");
  const double k0 = static_cast<double>(min_count);
  if (mean > k0 + 4) {
    for (;;) {
      const std::uint64_t n = rng.poisson(mean);
      if (n >= min_count) return n;
    }
  }
  // Inversion over k >= min_count with terms mean^k / k! scaled at k0.
  double term = 1, tail = 0;
  for (double k = k0; term > 1e-17 * tail || k < k0 + 2; ++k) {
    tail += term;
    term *= mean / (k + 1);
  }
  double v = rng.uniform() * tail;
  term = 1;
  std::uint64_t k = min_count;
  while (v > term) {
    v -= term;
    term *= mean / static_cast<double>(k + 1);
    ++k;
    if (term == 0) break;
  }
  return k;
}

double poisson_sum_sample(const PoissonIntensity& mu, Rng& rng, const PoissonSumOptions& opts) {
  if (mu.mass == 0) {
    if (opts.min_count > 0) throw DomainError("poisson_sum_sample: zero intensity cannot reach the minimum count");
    return 0;
  }
  const std::uint64_t n = poisson_at_least(mu.mass, opts.min_count, rng);
  double s = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    s += mu.draw(rng);
    if (s > opts.stop_above) break;
  }
  return s;
}

// ---------------------------------------------------------------------------

ExperimentReport largepop_marginal_run(const LargepopConfig& cfg) {
  const auto start = Clock::now();
  if (cfg.pi_atoms.empty()) throw DomainError("largepop: pi must be a finite atom measure");
  if (cfg.a_list.empty()) throw DomainError("largepop: empty a-list");
  for (std::size_t i = 1; i < cfg.a_list.size(); ++i) {
    if (!(cfg.a_list[i] > cfg.a_list[i - 1])) throw DomainError("largepop: a-list must be increasing");
  }
  if (!(cfg.x >= 0) || !(cfg.t > 0)) throw DomainError("largepop: need x >= 0 and t > 0");
  if (cfg.replicas < 2) throw DomainError("largepop: need at least two replicas");
  const JumpMeasure pi = JumpMeasure::atoms(cfg.pi_atoms);
  const BranchingMechanism mech = BranchingMechanism::jumps(pi);

  ExperimentReport rep;
  rep.id = "largepop";
  rep.param("mech", mech.spec());
  rep.param("a", join(cfg.a_list));
  rep.param("x", cfg.x);
  rep.param("t", cfg.t);
  rep.param("q", join(cfg.q_list));
  rep.param("slack", cfg.slack);
  rep.param("seed", std::to_string(cfg.seed));
  rep.replicas = cfg.replicas;
  rep.raw_columns = {"a", "replica", "F"};

  std::vector<std::vector<MeanSe>> stats(cfg.a_list.size());
  std::vector<double> refs;
  for (double q : cfg.q_list) refs.push_back(std::exp(-cfg.x * ut(mech, cfg.t, q)));

  for (std::size_t ia = 0; ia < cfg.a_list.size(); ++ia) {
    const double a = cfg.a_list[ia];
    if (cfg.x > a) throw DomainError("largepop: x must not exceed a");
    const FiniteNu nu_tilde = largepop_nu_tilde(a, pi);
    const AssumptionHReport h = assumption_h_report(a, nu_tilde, pi);
    rep.info("a=" + fmt(a) + " (H) weighted-mass gap", std::abs(h.mass_a - h.mass_pi));
    const std::uint64_t seed = sub_seed(cfg.seed, ia);
    const auto values = replica_map(cfg.replicas, cfg.threads, [&](std::size_t i) {
      Rng rng = Rng::stream(seed, i);
      return rescale_largepop(a, nu_tilde, {cfg.x}, cfg.t, rng).values[0];
    });
    for (std::size_t i = 0; i < values.size(); ++i) rep.raw_rows.push_back({a, static_cast<double>(i), values[i]});
    rep.info(tag("a", a) + " mean F", mean_se(values).mean, mean_se(values).se);
    for (std::size_t iq = 0; iq < cfg.q_list.size(); ++iq) {
      std::vector<double> tr(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) tr[i] = std::exp(-cfg.q_list[iq] * values[i]);
      stats[ia].push_back(mean_se(tr));
    }
  }
  for (std::size_t iq = 0; iq < cfg.q_list.size(); ++iq) {
    const std::string qs = tag("q", cfg.q_list[iq]);
    for (std::size_t ia = 0; ia < cfg.a_list.size(); ++ia) {
      const auto& s = stats[ia][iq];
      const std::string name = tag("a", cfg.a_list[ia]) + " " + qs + " Laplace transform";
      if (ia + 1 == cfg.a_list.size()) {
        rep.abs_gap(name, s.mean, refs[iq], "quadrature", 3 * s.se + cfg.slack, s.se);
      } else {
        Statistic st{name, s.mean, s.se, refs[iq], "quadrature"};
        rep.add(st);
      }
    }
    for (std::size_t ia = 0; ia + 1 < cfg.a_list.size(); ++ia) {
      const auto& lo = stats[ia][iq];
      const auto& hi = stats[ia + 1][iq];
      const double se = std::hypot(lo.se, hi.se);
      rep.at_least(qs + " gap(a=" + fmt(cfg.a_list[ia]) + ") >= gap(a=" + fmt(cfg.a_list[ia + 1]) + ") - 2SE",
                   std::abs(lo.mean - refs[iq]), std::abs(hi.mean - refs[iq]), "oracle-MC", 2 * se, se);
    }
  }
  rep.wall_time = seconds_since(start);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

/// Pooled replica-mean CDF statistics on a grid and over a window.
struct PooledCdf {
  EmpiricalMeasure pooled;
  std::vector<std::vector<double>> curves;  // per replica, on the grid
  std::vector<double> totals;               // per replica total mass
};

struct CdfSummary {
  double window_distance = 0;  // exact sup over the window of the pooled measure
  double grid_gap = 0;         // sup over grid points of |mean curve - ref|
  double spread = 0;           // max standard error over grid points
  MeanSe total;
};

/// With `restricted`, both measures are restricted to [lo, hi] before taking
/// distribution functions, so mass below lo plays no part; grid[0] must be lo.
CdfSummary summarize(const PooledCdf& p, const std::vector<double>& grid, const CdfFn& ref, double lo, double hi,
                     bool restricted = false) {
  CdfSummary s;
  const double ref_lo = restricted ? ref(lo) : 0.0;
  if (restricted) {
    const double emp_lo = p.pooled.cdf_below(lo);
    const CdfFn shifted = [&](double x) { return ref(x) - ref_lo + emp_lo; };
    s.window_distance = kolmogorov_distance_window(p.pooled, shifted, lo, hi);
  } else {
    s.window_distance = kolmogorov_distance_window(p.pooled, ref, lo, hi);
  }
  std::vector<double> column(p.curves.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t r = 0; r < p.curves.size(); ++r) {
      column[r] = p.curves[r][g] - (restricted ? p.curves[r][0] : 0.0);
    }
    const MeanSe ms = mean_se(column);
    s.grid_gap = std::max(s.grid_gap, std::abs(ms.mean - (ref(grid[g]) - ref_lo)));
    s.spread = std::max(s.spread, ms.se);
  }
  s.total = mean_se(p.totals);
  return s;
}

/// Simulates `replicas` coalescents from n singletons to time `horizon` and
/// records the measure sum_blocks weight * delta_{scale * frequency}.
PooledCdf coalescent_cdfs(const LambdaMeasure& lam, std::uint64_t n, double horizon, double scale, double weight,
                          const std::vector<double>& grid, std::size_t replicas, std::uint64_t seed, unsigned threads,
                          std::size_t& conservation_failures) {
  struct Replica {
    std::vector<std::uint64_t> sizes;
    bool conserved = true;
  };
  const auto runs = replica_map(replicas, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    CoalescentSimulator sim(lam);
    BlockState st = BlockState::singletons(n);
    sim.simulate_to(st, horizon, rng);
    Replica r;
    r.conserved = std::accumulate(st.sizes.begin(), st.sizes.end(), std::uint64_t{0}) == n;
    r.sizes = std::move(st.sizes);
    std::sort(r.sizes.begin(), r.sizes.end());
    return r;
  });
  PooledCdf out;
  const double nd = static_cast<double>(n), rd = static_cast<double>(replicas);
  conservation_failures = 0;
  for (const auto& r : runs) {
    if (!r.conserved) ++conservation_failures;
    std::vector<double> curve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      // blocks with scale * size / n < grid[g]
      const double limit = grid[g] * nd / scale;
      const auto it = std::lower_bound(r.sizes.begin(), r.sizes.end(), limit,
                                       [](std::uint64_t s, double l) { return static_cast<double>(s) < l; });
      curve[g] = weight * static_cast<double>(it - r.sizes.begin());
    }
    out.curves.push_back(std::move(curve));
    out.totals.push_back(weight * static_cast<double>(r.sizes.size()));
    for (auto s : r.sizes) out.pooled.add(scale * static_cast<double>(s) / nd, weight / rd);
  }
  return out;
}

}  // namespace

ExperimentReport hydrodynamic_run(const HydroConfig& cfg) {
  const auto start = Clock::now();
  if (!(cfg.gamma > 1 && cfg.gamma < 2)) throw DomainError("hydro: gamma must lie in ]1,2[");
  if (!(cfg.t > 0)) throw DomainError("hydro: t must be > 0");
  if (!(cfg.x_lo > 0 && cfg.x_lo < cfg.x_hi)) throw DomainError("hydro: window must satisfy 0 < x_lo < x_hi");
  if (cfg.a_list.empty()) throw DomainError("hydro: empty a-list");
  if (cfg.replicas < 2) throw DomainError("hydro: need at least two replicas");
  const double g = cfg.gamma;
  const BranchingMechanism mech = BranchingMechanism::stable(g);
  const CdfFn ref = [&mech, &cfg](double x) { return levy_cdf(mech, cfg.t, x); };
  const std::vector<double> grid = log_grid(cfg.x_lo, cfg.x_hi, 100);

  ExperimentReport rep;
  rep.id = "hydro";
  rep.param("gamma", g);
  rep.param("a", join(cfg.a_list));
  rep.param("t", cfg.t);
  rep.param("n", std::to_string(cfg.n));
  rep.param("window", "[" + fmt(cfg.x_lo) + "," + fmt(cfg.x_hi) + "]");
  rep.param("seed", std::to_string(cfg.seed));
  rep.replicas = cfg.replicas;
  rep.raw_columns = {"a", "replica", "total_mass"};

  const double m = levy_total_mass(mech, cfg.t).value;
  std::vector<CdfSummary> sums;
  std::size_t failures_total = 0;
  for (std::size_t ia = 0; ia < cfg.a_list.size(); ++ia) {
    const double a = cfg.a_list[ia];
    const LambdaMeasure lam = LambdaMeasure::beta(2 - g, 1, g * std::pow(a, -g) / (2 - g));
    std::size_t failures = 0;
    const PooledCdf p =
        coalescent_cdfs(lam, cfg.n, a * cfg.t, a, 1 / a, grid, cfg.replicas, sub_seed(cfg.seed, ia), cfg.threads, failures);
    failures_total += failures;
    for (std::size_t r = 0; r < p.totals.size(); ++r) rep.raw_rows.push_back({a, static_cast<double>(r), p.totals[r]});
    const CdfSummary s = summarize(p, grid, ref, cfg.x_lo, cfg.x_hi, true);
    sums.push_back(s);
    const std::string as = tag("a", a);
    if (ia == 0) {
      rep.at_most(as + " window distance", s.window_distance, cfg.tolerance, "quadrature", 0, s.spread);
    } else {
      rep.info(as + " window distance", s.window_distance, s.spread);
    }
    rep.info(as + " grid gap", s.grid_gap, s.spread);
    rep.add({as + " total mass", s.total.mean, s.total.se, m, "closed-form"});
  }
  for (std::size_t ia = 1; ia < sums.size(); ++ia) {
    const double spread = std::hypot(sums[ia - 1].spread, sums[ia].spread);
    rep.at_most("distance(a=" + fmt(cfg.a_list[ia]) + ") <= distance(a=" + fmt(cfg.a_list[ia - 1]) + ") + 2 spread",
                sums[ia].window_distance, sums[ia - 1].window_distance, "oracle-MC", 2 * spread, spread);
  }
  rep.at_most("mass conservation failures", static_cast<double>(failures_total), 0, "closed-form");
  rep.wall_time = seconds_since(start);
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport smalltime_blocks_run(const SmalltimeConfig& cfg) {
  const auto start = Clock::now();
  if (!(cfg.gamma > 1 && cfg.gamma < 2)) throw DomainError("smalltime: gamma must lie in ]1,2[");
  if (cfg.eps_list.empty()) throw DomainError("smalltime: empty eps-list");
  if (cfg.replicas < 2) throw DomainError("smalltime: need at least two replicas");
  const std::vector<double> grid = cfg.x_grid.empty() ? log_grid(0.05, 5, 60) : cfg.x_grid;
  const double x_lo = *std::min_element(grid.begin(), grid.end());
  const double x_hi = *std::max_element(grid.begin(), grid.end());
  for (double e : cfg.eps_list) {
    if (!(e > 0 && e < 1)) throw DomainError("smalltime: eps must lie in ]0,1[");
    if (static_cast<double>(cfg.n) * e * x_lo < 50) {
      throw DomainError("smalltime: n too small for eps=" + fmt(e) + " (need n*eps*x_min >= 50)");
    }
  }
  const double g = cfg.gamma;
  const LambdaMeasure lam = LambdaMeasure::beta(2 - g, g);
  const BranchingMechanism mech = BranchingMechanism::stable(g);
  const CdfFn ref = [&mech](double x) { return levy_cdf(mech, 1.0, x); };
  const double m = std::pow(std::tgamma(2 - g), 1 / (1 - g));

  ExperimentReport rep;
  rep.id = "smalltime";
  rep.param("gamma", g);
  rep.param("lambda", lam.spec());
  rep.param("eps", join(cfg.eps_list));
  rep.param("n", std::to_string(cfg.n));
  rep.param("window", "[" + fmt(x_lo) + "," + fmt(x_hi) + "]");
  rep.param("seed", std::to_string(cfg.seed));
  rep.replicas = cfg.replicas;
  rep.raw_columns = {"eps", "replica", "eps_N"};

  std::vector<CdfSummary> sums;
  std::size_t failures_total = 0;
  for (std::size_t ie = 0; ie < cfg.eps_list.size(); ++ie) {
    const double eps = cfg.eps_list[ie];
    const double horizon = g_scaling(lam, eps);
    std::size_t failures = 0;
    const PooledCdf p = coalescent_cdfs(lam, cfg.n, horizon, 1 / eps, eps, grid, cfg.replicas, sub_seed(cfg.seed, ie),
                                        cfg.threads, failures);
    failures_total += failures;
    for (std::size_t r = 0; r < p.totals.size(); ++r) rep.raw_rows.push_back({eps, static_cast<double>(r), p.totals[r]});
    const CdfSummary s = summarize(p, grid, ref, x_lo, x_hi);
    sums.push_back(s);
    const std::string es = tag("eps", eps);
    rep.info(es + " g(eps)", horizon);
    const bool last = ie + 1 == cfg.eps_list.size();
    if (last) {
      rep.abs_gap(es + " eps*N", s.total.mean, m, "closed-form", cfg.mass_tolerance * m, s.total.se);
      rep.at_most(es + " CDF sup-gap", s.window_distance, cfg.cdf_tolerance, "quadrature", 0, s.spread);
    } else {
      rep.add({es + " eps*N", s.total.mean, s.total.se, m, "closed-form"});
      rep.info(es + " CDF sup-gap", s.window_distance, s.spread);
    }
    rep.info(es + " CDF grid gap", s.grid_gap, s.spread);
  }
  for (std::size_t ie = 1; ie < sums.size(); ++ie) {
    const double spread = std::hypot(sums[ie - 1].spread, sums[ie].spread);
    rep.at_most("sup-gap(eps=" + fmt(cfg.eps_list[ie]) + ") <= sup-gap(eps=" + fmt(cfg.eps_list[ie - 1]) + ") + 2 spread",
                sums[ie].window_distance, sums[ie - 1].window_distance, "oracle-MC", 2 * spread, spread);
  }

  if (cfg.kingman_control) {
    const std::vector<double> kgrid = cfg.kingman_x_grid.empty() ? log_grid(0.5, 5, 40) : cfg.kingman_x_grid;
    const double k_lo = *std::min_element(kgrid.begin(), kgrid.end());
    const double k_hi = *std::max_element(kgrid.begin(), kgrid.end());
    const double eps = cfg.kingman_eps;
    if (static_cast<double>(cfg.kingman_n) * eps * k_lo < 50) {
      throw DomainError("smalltime: kingman n too small (need n*eps*x_min >= 50)");
    }
    const CdfFn kref = [](double x) { return 2 * -std::expm1(-2 * x); };
    std::size_t failures = 0;
    const PooledCdf p = coalescent_cdfs(LambdaMeasure::kingman(), cfg.kingman_n, eps, 1 / eps, eps, kgrid,
                                        cfg.kingman_replicas, sub_seed(cfg.seed, 1000), cfg.threads, failures);
    failures_total += failures;
    const CdfSummary s = summarize(p, kgrid, kref, k_lo, k_hi);
    rep.param("kingman", "eps=" + fmt(eps) + " n=" + std::to_string(cfg.kingman_n) + " window=[" + fmt(k_lo) + "," +
                             fmt(k_hi) + "] replicas=" + std::to_string(cfg.kingman_replicas));
    rep.abs_gap("kingman eps*N", s.total.mean, 2.0, "closed-form", 0.05 * 2.0, s.total.se);
    rep.at_most("kingman CDF sup-gap", s.window_distance, 0.1, "closed-form", 0, s.spread);
  }
  rep.at_most("mass conservation failures", static_cast<double>(failures_total), 0, "closed-form");
  rep.wall_time = seconds_since(start);
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport rate_asymptotics_check(const RatesConfig& cfg) {
  const auto start = Clock::now();
  const double g = cfg.gamma;
  if (!(g > 1 && g < 2)) throw DomainError("rates: gamma must lie in ]1,2[");
  if (cfg.k_terms < 2) throw DomainError("rates: need at least two series terms");
  const LambdaMeasure lam = LambdaMeasure::beta(2 - g, g);
  const double g2 = std::tgamma(2 - g);

  ExperimentReport rep;
  rep.id = "rates";
  rep.param("gamma", g);
  rep.param("lambda", lam.spec());
  rep.param("b", join(cfg.b_list));
  rep.param("K", std::to_string(cfg.k_terms));

  for (double bd : cfg.b_list) {
    const auto b = static_cast<std::uint64_t>(bd);
    // b^gamma L(1/b) with L(eps) = eps^gamma nu([eps,1]).
    const double norm = nu_tail(lam, 1 / bd);
    const double ratio = total_rate(lam, b) / norm;
    rep.abs_gap(tag("b", bd) + " alpha_b/(b^gamma L(1/b))", ratio, g2, "closed-form", cfg.ratio_tolerance * g2);
    for (int k = 2; k <= cfg.k_ratio_max; ++k) {
      const double limit = g * std::tgamma(k - g) / std::tgamma(k + 1.0);
      rep.add({tag("b", bd) + " k=" + std::to_string(k) + " alpha_{b,k}/(b^gamma L(1/b))",
               merger_rate(lam, b, static_cast<std::uint64_t>(k)) / norm, std::numeric_limits<double>::quiet_NaN(),
               limit, "closed-form"});
    }
  }

  // Partial sums with the exact remainders of the telescoped series
  // sum_{k>K} g G(k-g)/k! = G(K+1-g)/K!.
  const int K = cfg.k_terms;
  double s2 = 0, s3 = 0;
  for (int k = 2; k <= K; ++k) {
    const double term = g * std::exp(std::lgamma(k - g) - std::lgamma(k + 1.0));
    s2 += term;
    s3 += term * (k - 1) / g2;
  }
  const double rem_base = std::exp(std::lgamma(K + 1 - g) - std::lgamma(K + 1.0));
  const double r2 = rem_base;
  const double r3 = (g * K / (g - 1) - 1) * rem_base / g2;
  rep.info("series sum g G(k-g)/k! partial", s2);
  rep.info("series sum g G(k-g)/k! remainder", r2);
  rep.abs_gap("series sum g G(k-g)/k!", s2 + r2, g2, "closed-form", cfg.series_tolerance);
  rep.info("series sum (k-1) g G(k-g)/(k! G(2-g)) partial", s3);
  rep.info("series sum (k-1) g G(k-g)/(k! G(2-g)) remainder", r3);
  rep.abs_gap("series sum (k-1) g G(k-g)/(k! G(2-g))", s3 + r3, 1 / (g - 1), "closed-form", cfg.series_tolerance);
  rep.wall_time = seconds_since(start);
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport cdi_equivalence_run(const CdiConfig& cfg) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.id = "cdi";
  rep.param("gammas", join(cfg.gammas));
  std::string neg;
  for (std::size_t i = 0; i < cfg.negative_specs.size(); ++i) neg += (i ? " " : "") + cfg.negative_specs[i];
  rep.param("negative", neg);

  auto check = [&rep](const LambdaMeasure& lam, bool expect_positive) {
    const CdiReport c = cdi_check(lam);
    const ExtinctionReport e = extinction_check(BranchingMechanism::jumps(lam.nu_as_jump_measure()));
    const std::string id = lam.spec();
    const bool cdi_pos = c.verdict == CdiVerdict::ComesDown;
    const bool ext_pos = e.verdict == ExtinctionVerdict::Extinct;
    const bool conclusive = c.verdict != CdiVerdict::Inconclusive && e.verdict != ExtinctionVerdict::Inconclusive;
    rep.param(id + " verdicts", to_string(c.verdict) + "/" + to_string(e.verdict));
    rep.abs_gap(id + " verdicts agree", (conclusive && cdi_pos == ext_pos) ? 1 : 0, 1, "quadrature", 0);
    rep.abs_gap(id + " expected verdict", cdi_pos == expect_positive && ext_pos == expect_positive ? 1 : 0, 1,
                "closed-form", 0);
    rep.info(id + " growth exponent", c.growth.exponent);
    rep.at_least(id + " min Phi/Psi on [2,1e6] > 0", c.ratio_min, 0, "quadrature", -std::numeric_limits<double>::min());
    rep.at_most(id + " max Phi/Psi on [2,1e6]", c.ratio_max, 1, "quadrature", 0);
  };
  for (double g : cfg.gammas) check(LambdaMeasure::beta(std::round((2 - g) * 1e12) / 1e12, g), true);
  for (const auto& s : cfg.negative_specs) check(parse_lambda(s), false);
  rep.wall_time = seconds_since(start);
  return rep;
}

}  // namespace coalflow

#include <algorithm>
#include <chrono>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "coalflow/csbp_analytic.hpp"
#include "coalflow/csbp_sim.hpp"
#include "coalflow/error.hpp"
#include "coalflow/experiments.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/quadrature.hpp"
#include "format.hpp"

namespace coalflow {

using detail::fmt;

double TestFunction::operator()(double x) const {
  if (kind == Kind::Exponential) return -std::expm1(-q * x);
  const double mid = 0.5 * (lo + hi);
  if (x <= lo || x >= hi) return 0;
  return x <= mid ? (x - lo) / (mid - lo) : (hi - x) / (hi - mid);
}

std::string TestFunction::describe() const {
  if (kind == Kind::Exponential) return "exp:" + fmt(q);
  return "hat:" + fmt(lo) + "," + fmt(hi);
}

namespace {

void require_extinction(const BranchingMechanism& mech) {
  if (mech.kind() != BranchingMechanism::Kind::Generic) return;
  if (extinction_check(mech).verdict != ExtinctionVerdict::Extinct) {
    throw DomainError("coagulation residual: mechanism does not satisfy the extinction condition");
  }
}

/// <lambda_t, f>.
double pairing(const BranchingMechanism& mech, double t, const TestFunction& f) {
  if (f.kind == TestFunction::Kind::Exponential) return ut(mech, t, f.q);
  const double mid = 0.5 * (f.lo + f.hi);
  if (mech.kind() == BranchingMechanism::Kind::Feller) {
    auto g = [&](double x) { return f(x) * feller_levy_density(mech.beta(), t, x); };
    return quad::integrate(g, f.lo, mid, 1e-13) + quad::integrate(g, mid, f.hi, 1e-13);
  }
  // Integration by parts against the distribution function.
  auto cdf = [&](double x) { return levy_cdf(mech, t, x); };
  // Talbot values carry ~1e-13 noise, so tighter tolerances only burn evaluations.
  return -quad::integrate(cdf, f.lo, mid, 1e-10) / (mid - f.lo) + quad::integrate(cdf, mid, f.hi, 1e-10) / (f.hi - mid);
}

double feller_density_dt(double beta, double t, double x) {
  const double m = 1 / (beta * t);
  return (2 * m - x * m * m) * std::exp(-m * x) * (-beta * m * m);
}

/// Integrates g over ]0, inf[ with breakpoints at the kinks of f.
double integrate_half_line(const std::function<double(double)>& g, const TestFunction& f, double scale,
                           double rel_tol = 1e-12) {
  std::vector<double> pts{0.0};
  if (f.kind == TestFunction::Kind::Hat) {
    pts.push_back(f.lo);
    pts.push_back(0.5 * (f.lo + f.hi));
    pts.push_back(f.hi);
  }
  double s = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += quad::integrate(g, pts[i], pts[i + 1], rel_tol, 1e-13);
  const double top = pts.back();
  s += quad::integrate(g, top, top + 40 * scale, rel_tol, 1e-13);
  s += quad::integrate(g, top + 40 * scale, std::numeric_limits<double>::infinity(), 1e-10, 1e-13);
  return s;
}

ExperimentReport base_report(const char* method, const BranchingMechanism& mech, double t, const TestFunction& f) {
  ExperimentReport rep;
  rep.id = "smolu";
  rep.param("method", method);
  rep.param("mech", mech.spec());
  rep.param("t", t);
  rep.param("f", f.describe());
  return rep;
}

ExperimentReport exact_exponential(const BranchingMechanism& mech, double t, const TestFunction& f, double tol) {
  if (f.kind != TestFunction::Kind::Exponential) throw DomainError("exact-exponential: needs an exponential test function");
  if (!(t > 1e-5)) throw DomainError("exact-exponential: t must exceed the difference step");
  constexpr double h = 1e-5;
  const double lhs = (ut(mech, t + h, f.q) - ut(mech, t - h, f.q)) / (2 * h);
  const double rhs = -psi_eval(mech, ut(mech, t, f.q));
  ExperimentReport rep = base_report("exact-exponential", mech, t, f);
  rep.info("d<lambda_t,f>/dt", lhs);
  rep.abs_gap("residual", lhs, rhs, "closed-form", std::isnan(tol) ? 1e-7 : tol);
  return rep;
}

ExperimentReport feller_quadrature(const BranchingMechanism& mech, double t, const TestFunction& f, double tol) {
  if (mech.kind() != BranchingMechanism::Kind::Feller) throw UnsupportedFamily("feller-quadrature: Feller mechanisms only");
  const double beta = mech.beta(), m = 1 / (beta * t), scale = beta * t;
  auto rho = [&](double x) { return feller_levy_density(beta, t, x); };
  const double lhs = integrate_half_line([&](double x) { return f(x) * feller_density_dt(beta, t, x); }, f, scale);
  const double pair = integrate_half_line([&](double x) { return f(x) * rho(x); }, f, scale);
  // beta * int int (f(x+y) - f(x) - f(y)) lambda(dx) lambda(dy)
  auto outer = [&](double x) {
    std::vector<double> pts{0.0};
    if (f.kind == TestFunction::Kind::Hat) {
      for (double k : {f.lo - x, 0.5 * (f.lo + f.hi) - x, f.hi - x}) {
        if (k > 0) pts.push_back(k);
      }
    }
    double inner = 0;
    auto g = [&](double y) { return f(x + y) * rho(y); };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) inner += quad::integrate(g, pts[i], pts[i + 1], 1e-12, 1e-13);
    if (f.kind == TestFunction::Kind::Exponential) {
      inner += quad::integrate(g, pts.back(), std::numeric_limits<double>::infinity(), 1e-12, 1e-13);
    }
    return (inner - f(x) * m - pair) * rho(x);
  };
  // The inner integrals limit the attainable accuracy of the outer one.
  const double rhs = beta * integrate_half_line(outer, f, scale, 1e-10);
  ExperimentReport rep = base_report("feller-quadrature", mech, t, f);
  rep.info("<lambda_t,f>", pair);
  rep.info("d<lambda_t,f>/dt", lhs);
  rep.abs_gap("residual", lhs, rhs, "quadrature", std::isnan(tol) ? 1e-6 : tol);
  return rep;
}

ExperimentReport mc_poisson(const BranchingMechanism& mech, double t, const TestFunction& f, const SmoluOptions& opts) {
  if (mech.kind() != BranchingMechanism::Kind::Stable) throw UnsupportedFamily("mc-poisson: stable mechanisms only");
  const double g = mech.gamma();
  const double m = levy_total_mass(mech, t).value;
  constexpr double h = 1e-3;
  if (!(t > 2 * h)) throw DomainError("mc-poisson: t too small for the difference step");
  const double lhs = (pairing(mech, t + h, f) - pairing(mech, t - h, f)) / (2 * h);
  const double pair = pairing(mech, t, f);

  // int pi(da) (<(a lambda)^+, f> - a <lambda, f>) splits into
  //   <lambda,f> int pi(da) a (e^{-am} - 1)                  (N = 1 term, exact)
  // + int pi(da) P[N_a >= 2] E[f(S) | N_a >= 2]               (Monte Carlo)
  const double exact_part = pair * g * std::tgamma(1 - g) * std::pow(m, g - 1);
  const double sat_at = f.kind == TestFunction::Kind::Hat ? f.hi : 40 / f.q;
  const double sat_value = f.kind == TestFunction::Kind::Hat ? 0.0 : 1.0;
  constexpr int first_decade = -8, last_decade = 6;
  using GL = boost::math::quadrature::gauss<double, 8>;
  struct Node {
    double a, weight;
  };
  std::vector<Node> nodes;
  for (int d = first_decade; d < last_decade; ++d) {
    const double s0 = d * std::log(10.0), s1 = (d + 1) * std::log(10.0);
    const double c = 0.5 * (s0 + s1), r = 0.5 * (s1 - s0);
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (int sgn : {-1, 1}) {
        if (xs[i] == 0 && sgn == 1) continue;
        const double a = std::exp(c + sgn * r * xs[i]);
        nodes.push_back({a, r * ws[i] * a * g * std::pow(a, -g - 1)});
      }
    }
  }
  struct NodeResult {
    double value = 0, variance = 0;
  };
  const std::size_t M = opts.samples_per_node;
  const auto results = replica_map(nodes.size(), opts.threads, [&](std::size_t j) {
    Rng rng = Rng::stream(opts.seed, j);
    const double mu = nodes[j].a * m;
    double p2 = -std::expm1(-mu) - mu * std::exp(-mu);
    if (mu < 1) {
      // P[N >= 2] by its series; the closed form cancels for small mu.
      double term = mu * mu / 2;
      p2 = 0;
      for (int k = 2; term > 1e-18 * p2; ++k) {
        p2 += term;
        term *= mu / (k + 1);
      }
      p2 *= std::exp(-mu);
    }
    double sum = 0, sum2 = 0;
    for (std::size_t s = 0; s < M; ++s) {
      const std::uint64_t n = poisson_at_least(mu, 2, rng);
      double x = 0;
      bool saturated = false;
      for (std::uint64_t i = 0; i < n; ++i) {
        x += stable_cluster_sample(g, t, rng);
        if (x > sat_at) {
          saturated = true;
          break;
        }
      }
      const double v = saturated ? sat_value : f(x);
      sum += v;
      sum2 += v * v;
    }
    const double md = static_cast<double>(M);
    const double mean = sum / md, var = std::max(0.0, (sum2 - md * mean * mean) / (md - 1));
    const double w = nodes[j].weight * p2;
    return NodeResult{w * mean, w * w * var / md};
  });
  double mc = 0, var = 0;
  for (const auto& r : results) {
    mc += r.value;
    var += r.variance;
  }
  const double se = std::sqrt(var);
  const double a_lo = std::pow(10.0, first_decade), a_hi = std::pow(10.0, last_decade);
  const double bias = f.sup_norm() * (g * m * m * std::pow(a_lo, 2 - g) / (2 * (2 - g)) + std::pow(a_hi, -g));
  const double rhs = exact_part + mc;

  ExperimentReport rep = base_report("mc-poisson", mech, t, f);
  rep.param("samples_per_node", std::to_string(M));
  rep.param("nodes", std::to_string(nodes.size()));
  rep.param("seed", std::to_string(opts.seed));
  rep.replicas = M * nodes.size();
  rep.info("<lambda_t,f>", pair);
  rep.info("single-atom part", exact_part);
  rep.info("multi-atom part", mc, se);
  rep.info("grid truncation bound", bias);
  rep.abs_gap("d<lambda_t,f>/dt vs Poisson-sum RHS", rhs, lhs, "quadrature", 3 * se + bias, se);
  return rep;
}

/// P[Poisson(z) >= j] = e^{-z} sum_{k >= j} z^k / k!.
double poisson_tail(int j, double z) {
  if (z > j) {
    double term = std::exp(-z), head = 0;
    for (int k = 0; k < j; ++k) {
      head += term;
      term *= z / (k + 1);
    }
    return std::max(0.0, 1 - head);
  }
  double term = std::exp(-z), s = 0;
  for (int k = 1; k <= j; ++k) term *= z / k;
  for (int k = j; term > 1e-18 * s || k == j; ++k) {
    s += term;
    term *= z / (k + 1);
  }
  return s;
}

/// Simpson weights on nodes 0..i (step h), 3/8 rule closing odd counts.
void simpson_weights(std::size_t i, std::vector<double>& w) {
  w.assign(i + 1, 0.0);
  if (i == 0) return;
  if (i == 1) {
    w[0] = w[1] = 0.5;
    return;
  }
  std::size_t even_end = (i % 2 == 0) ? i : i - 3;
  for (std::size_t j = 0; j + 2 <= even_end; j += 2) {
    w[j] += 1.0 / 3;
    w[j + 1] += 4.0 / 3;
    w[j + 2] += 1.0 / 3;
  }
  if (i % 2 == 1) {
    w[even_end] += 3.0 / 8;
    w[even_end + 1] += 9.0 / 8;
    w[even_end + 2] += 9.0 / 8;
    w[even_end + 3] += 3.0 / 8;
  }
}

}  // namespace

ExperimentReport smolu_residual(const BranchingMechanism& mech, double t, const TestFunction& f, SmoluMethod method,
                                const SmoluOptions& opts) {
  if (!(t > 0)) throw DomainError("coagulation residual: t must be > 0");
  require_extinction(mech);
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  switch (method) {
    case SmoluMethod::ExactExponential: rep = exact_exponential(mech, t, f, opts.tolerance); break;
    case SmoluMethod::FellerQuadrature: rep = feller_quadrature(mech, t, f, opts.tolerance); break;
    case SmoluMethod::McPoisson: rep = mc_poisson(mech, t, f, opts); break;
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExperimentReport smolu_series_check(const BranchingMechanism& mech, double t, const TestFunction& f, int k_max) {
  if (!(t > 0)) throw DomainError("series check: t must be > 0");
  if (k_max < 2) throw DomainError("series check: k_max must be >= 2");
  require_extinction(mech);
  const auto start = std::chrono::steady_clock::now();
  const TotalMass tm = levy_total_mass(mech, t);
  if (tm.infinite) throw DomainError("series check: lambda_t has infinite mass");
  const double m = tm.value;
  const int k_direct = std::min(k_max, 4);

  ExperimentReport rep = base_report("series", mech, t, f);
  rep.param("K_max", std::to_string(k_max));

  // I_k = int (f(x_1+...+x_k) - sum f(x_i)) lambda_t^k.
  std::vector<double> ik(k_direct + 1, 0.0);
  double lhs;
  if (f.kind == TestFunction::Kind::Exponential) {
    const double u = ut(mech, t, f.q);
    for (int k = 2; k <= k_direct; ++k) ik[k] = std::pow(m, k) - std::pow(m - u, k) - k * std::pow(m, k - 1) * u;
    constexpr double h = 1e-5;
    lhs = (ut(mech, t + h, f.q) - ut(mech, t - h, f.q)) / (2 * h);
  } else {
    if (mech.kind() != BranchingMechanism::Kind::Feller) {
      throw UnsupportedFamily("series check: hat test functions need the Feller density");
    }
    const double beta = mech.beta();
    const std::size_t n = 3000;
    const double step = f.hi / n;
    std::vector<double> rho(n + 1), conv, prev, w, fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      rho[i] = m * m * std::exp(-m * i * step);
      fv[i] = f(i * step);
    }
    std::vector<double> fw;
    simpson_weights(n, fw);
    double pair = 0;
    for (std::size_t i = 0; i <= n; ++i) pair += fw[i] * fv[i] * rho[i];
    pair *= step;
    prev = rho;
    for (int k = 2; k <= k_direct; ++k) {
      conv.assign(n + 1, 0.0);
      for (std::size_t i = 1; i <= n; ++i) {
        simpson_weights(i, w);
        double s = 0;
        for (std::size_t j = 0; j <= i; ++j) s += w[j] * prev[i - j] * rho[j];
        conv[i] = s * step;
      }
      double fk = 0;
      for (std::size_t i = 0; i <= n; ++i) fk += fw[i] * fv[i] * conv[i];
      ik[k] = fk * step - k * std::pow(m, k - 1) * pair;
      prev.swap(conv);
    }
    lhs = quad::integrate([&](double x) { return f(x) * feller_density_dt(beta, t, x); }, f.lo, 0.5 * (f.lo + f.hi),
                          1e-13) +
          quad::integrate([&](double x) { return f(x) * feller_density_dt(beta, t, x); }, 0.5 * (f.lo + f.hi), f.hi,
                          1e-13);
  }

  double partial = 0;
  double min_coef = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= k_direct; ++k) {
    const double coef = (k % 2 == 0 ? 1 : -1) * psi_derivative(mech, k, m) / std::tgamma(k + 1.0);
    min_coef = std::min(min_coef, coef);
    rep.info("term k=" + std::to_string(k), coef * ik[k]);
    partial += coef * ik[k];
  }
  for (int k = k_direct + 1; k <= k_max; ++k) {
    const double coef = (k % 2 == 0 ? 1 : -1) * psi_derivative(mech, k, m) / std::tgamma(k + 1.0);
    min_coef = std::min(min_coef, coef);
  }
  // sum_{k > k_direct} |term_k| <= ||f|| int pi(dr) e^{-mr} sum_k (k+1) (mr)^k / k!.
  double tail = 0;
  if (mech.pi() && k_direct < k_max) {
    const int j = k_direct + 1;
    tail = f.sup_norm() * mech.pi()->integrate(
                              [&](double r) {
                                const double z = m * r;
                                return poisson_tail(j, z) + z * poisson_tail(j - 1, z);
                              },
                              1 / m);
  }
  if (mech.pi() && k_direct >= k_max) tail = 0;
  rep.info("d<lambda_t,f>/dt", lhs);
  rep.info("series tail bound", tail);
  rep.at_least("min (-1)^k Psi^(k)(m)/k!", min_coef, 0, "closed-form", 0);
  rep.abs_gap("partial sum vs derivative", partial, lhs, "quadrature", tail + 1e-5);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExperimentReport smolu_run(const SmoluOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.id = "smolu";
  rep.param("seed", std::to_string(opts.seed));
  auto absorb = [&rep](const std::string& prefix, const ExperimentReport& sub) {
    for (const auto& [k, v] : sub.parameters) rep.param(prefix + " " + k, v);
    for (auto s : sub.statistics) {
      s.name = prefix + " " + s.name;
      rep.add(s);
    }
    rep.replicas += sub.replicas;
  };
  const auto stable = BranchingMechanism::stable(1.5);
  const auto feller = BranchingMechanism::feller(0.5);
  const auto expo = TestFunction::exponential(1);
  const auto hat = TestFunction::hat(0.5, 1.5);
  SmoluOptions o = opts;
  o.tolerance = std::numeric_limits<double>::quiet_NaN();
  absorb("exact-exponential stable", smolu_residual(stable, 1, expo, SmoluMethod::ExactExponential, o));
  absorb("exact-exponential feller", smolu_residual(feller, 1, expo, SmoluMethod::ExactExponential, o));
  absorb("feller-quadrature", smolu_residual(feller, 1, hat, SmoluMethod::FellerQuadrature, o));
  absorb("series feller hat", smolu_series_check(feller, 1, hat, 12));
  absorb("series feller exp", smolu_series_check(feller, 1, expo, 12));
  absorb("series stable exp", smolu_series_check(stable, 1, expo, 12));
  absorb("mc-poisson stable", smolu_residual(stable, 1, hat, SmoluMethod::McPoisson, o));
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace coalflow

#include "coalflow/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coalflow/coalescent.hpp"
#include "coalflow/csbp_analytic.hpp"
#include "coalflow/csbp_sim.hpp"
#include "coalflow/error.hpp"
#include "coalflow/experiments.hpp"
#include "coalflow/fleming_viot.hpp"
#include "coalflow/parallel.hpp"
#include "coalflow/spec_parse.hpp"
#include "format.hpp"

namespace coalflow::cli {

using detail::fmt;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool timing = false;
  std::string out;
  std::string format;
  std::string config;
  std::string raw;
};

void add_common(CLI::App* app, Common& c, const std::string& default_format, const std::vector<std::string>& formats,
                bool stochastic) {
  c.format = default_format;
  if (stochastic) {
    app->add_option("--seed", c.seed, "master seed (64-bit unsigned integer)")->capture_default_str();
    app->add_option("--threads", c.threads, "worker threads for the replica pool (count; 0 = all cores)")
        ->capture_default_str();
  }
  app->add_option("--out", c.out, "output file path (default: standard output)");
  app->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  app->add_option("--config", c.config, "key = value file; keys are long flag names, command-line flags win");
}

unsigned threads_of(const Common& c) { return c.threads == 0 ? default_threads() : c.threads; }

double text_num(double v) { return v; }

std::string num6(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << text_num(v);
  return os.str();
}

Json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

void emit(const Common& c, const std::string& body, std::ostream& out) {
  if (c.out.empty()) {
    out << body;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("--out", "cannot open '" + c.out + "' for writing");
  f << body;
}

std::ofstream open_side_file(const std::string& flag, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(flag, "cannot open '" + path + "' for writing");
  return f;
}

template <class F>
auto field(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(name, e.what());
  }
}

void positive(const std::string& name, double v) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(name, "must be a finite number > 0 (got " + fmt(v) + ")");
}
void nonneg(const std::string& name, double v) {
  if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(name, "must be a finite number >= 0 (got " + fmt(v) + ")");
}
void nonempty(const std::string& name, const std::vector<double>& v) {
  if (v.empty()) throw ConfigError(name, "needs at least one value");
}

/// Reads `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--config", path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    kv.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

/// Appends config entries for keys absent from the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  for (const auto& [k, v] : read_config(path)) {
    if (k == "config" || given.count(k)) continue;
    args.push_back("--" + k + "=" + v);
  }
  return args;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(count == 1 ? lo : lo * std::pow(hi / lo, double(i) / (count - 1)));
  return g;
}

// ---------------------------------------------------------------------------

struct Runner {
  std::function<void()> validate;
  std::function<int(std::ostream&)> execute;
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"coalflow: Lambda-coalescents, Fleming-Viot flows and continuous-state branching processes"};
  app.name("coalflow");
  app.require_subcommand(1);
  app.footer(
      "Units: time t in the model's time units; masses, sizes and points x in population-mass units; q in inverse "
      "mass units.\nSpecs: mechanisms feller:BETA | stable:GAMMA | atoms:R@W,... (terms joined by '+'); Lambda "
      "kingman | beta:A,C[,MASS] | bs | atoms:X@W,... (Lambda weights) | nu-atoms:X@W,... (nu weights).\nExit codes: "
      "0 ok, 1 failed gate or numerical failure, 2 invalid configuration.");

  std::map<CLI::App*, Runner> runners;
  std::vector<std::unique_ptr<Common>> commons;
  auto common = [&](CLI::App* sc, const std::string& fmt_default, const std::vector<std::string>& formats,
                    bool stochastic) -> Common& {
    commons.push_back(std::make_unique<Common>());
    add_common(sc, *commons.back(), fmt_default, formats, stochastic);
    return *commons.back();
  };

  // psi -------------------------------------------------------------------
  {
    auto* sc = app.add_subcommand("psi", "evaluate the branching mechanism Psi(q)");
    auto& c = common(sc, "text", {"text", "csv", "json"}, false);
    auto mech = std::make_shared<std::string>();
    auto qs = std::make_shared<std::vector<double>>();
    sc->add_option("--mech", *mech, "branching mechanism spec")->required();
    sc->add_option("--q", *qs, "Laplace arguments q >= 0 (inverse mass), comma separated")->required()->delimiter(',');
    runners[sc] = {[=] {
                     field("--mech", [&] { return parse_mechanism(*mech); });
                     for (double q : *qs) nonneg("--q", q);
                   },
                   [=, &c](std::ostream& o) {
                     const auto m = parse_mechanism(*mech);
                     std::ostringstream s;
                     if (c.format == "json") {
                       Json j{{"schema_version", kReportSchemaVersion}, {"mech", m.spec()}};
                       Json rows = Json::array();
                       for (double q : *qs) rows.push_back({{"q", q}, {"psi", jnum(psi_eval(m, q))}});
                       j["values"] = rows;
                       s << j.dump(2) << "\n";
                     } else if (c.format == "csv") {
                       s << "q,psi\n";
                       for (double q : *qs) s << fmt(q) << "," << fmt(psi_eval(m, q)) << "\n";
                     } else {
                       for (double q : *qs) s << num6(psi_eval(m, q)) << "\n";
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // ut --------------------------------------------------------------------
  {
    auto* sc = app.add_subcommand("ut", "cumulant semigroup u_t(q), solution of du/dt = -Psi(u), u_0 = q");
    auto& c = common(sc, "text", {"text", "csv", "json"}, false);
    auto mech = std::make_shared<std::string>();
    auto ts = std::make_shared<std::vector<double>>();
    auto qs = std::make_shared<std::vector<double>>();
    auto ode = std::make_shared<bool>(false);
    sc->add_option("--mech", *mech, "branching mechanism spec")->required();
    sc->add_option("--t", *ts, "times t >= 0 (time units), comma separated")->required()->delimiter(',');
    sc->add_option("--q", *qs, "initial values q > 0 (inverse mass), comma separated")->required()->delimiter(',');
    sc->add_flag("--ode", *ode, "integrate the ODE even when a closed form exists");
    runners[sc] = {[=] {
                     field("--mech", [&] { return parse_mechanism(*mech); });
                     for (double t : *ts) nonneg("--t", t);
                     for (double q : *qs) positive("--q", q);
                   },
                   [=, &c](std::ostream& o) {
                     const auto m = parse_mechanism(*mech);
                     auto eval = [&](double t, double q) { return *ode ? ut_ode(m, t, q) : ut(m, t, q); };
                     std::ostringstream s;
                     if (c.format == "json") {
                       Json j{{"schema_version", kReportSchemaVersion}, {"mech", m.spec()}};
                       Json rows = Json::array();
                       for (double t : *ts)
                         for (double q : *qs) rows.push_back({{"t", t}, {"q", q}, {"u", jnum(eval(t, q))}});
                       j["values"] = rows;
                       s << j.dump(2) << "\n";
                     } else if (c.format == "csv") {
                       s << "t,q,u\n";
                       for (double t : *ts)
                         for (double q : *qs) s << fmt(t) << "," << fmt(q) << "," << fmt(eval(t, q)) << "\n";
                     } else {
                       for (double t : *ts)
                         for (double q : *qs) s << num6(eval(t, q)) << "\n";
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // levy-cdf --------------------------------------------------------------
  {
    auto* sc = app.add_subcommand("levy-cdf", "cluster-size measure lambda_t(]0,x[) of the CSBP flow");
    auto& c = common(sc, "csv", {"csv", "json"}, true);
    auto mech = std::make_shared<std::string>();
    auto t = std::make_shared<double>(1.0);
    auto xs = std::make_shared<std::vector<double>>();
    auto grid = std::make_shared<std::vector<double>>();
    auto x0 = std::make_shared<double>(1e-3);
    auto delta = std::make_shared<double>(1e-3);
    auto reps = std::make_shared<std::size_t>(10000);
    sc->add_option("--mech", *mech, "branching mechanism spec")->required();
    sc->add_option("--t", *t, "time t > 0 (time units)")->capture_default_str();
    sc->add_option("--x", *xs, "sizes x > 0 (mass units), comma separated")->delimiter(',');
    sc->add_option("--grid", *grid, "log-spaced sizes LO,HI,COUNT (mass units)")->delimiter(',')->expected(3);
    sc->add_option("--x0", *x0, "initial mass for the Monte Carlo fallback (mass units)")->capture_default_str();
    sc->add_option("--delta", *delta, "jump truncation level for the Monte Carlo fallback (mass units)")
        ->capture_default_str();
    sc->add_option("--replicas", *reps, "Monte Carlo replicas for mechanisms without a closed form (count)")
        ->capture_default_str();
    auto sizes = [=] {
      std::vector<double> v = *xs;
      if (grid->size() == 3) {
        const auto g = log_spaced((*grid)[0], (*grid)[1], static_cast<int>((*grid)[2]));
        v.insert(v.end(), g.begin(), g.end());
      }
      std::sort(v.begin(), v.end());
      return v;
    };
    runners[sc] = {[=] {
                     const auto m = field("--mech", [&] { return parse_mechanism(*mech); });
                     positive("--t", *t);
                     if (xs->empty() && grid->empty()) throw ConfigError("--x", "give --x or --grid");
                     if (grid->size() == 3) {
                       positive("--grid", (*grid)[0]);
                       if (!((*grid)[1] > (*grid)[0])) throw ConfigError("--grid", "needs LO < HI");
                       if (!((*grid)[2] >= 1)) throw ConfigError("--grid", "COUNT must be >= 1");
                     }
                     for (double x : *xs) positive("--x", x);
                     if (m.kind() == BranchingMechanism::Kind::Generic) {
                       positive("--x0", *x0);
                       positive("--delta", *delta);
                       if (*reps < 2) throw ConfigError("--replicas", "must be >= 2");
                       if (m.beta() != 0) throw ConfigError("--mech", "Monte Carlo fallback needs a jump-only mechanism");
                       if (extinction_check(m).verdict != ExtinctionVerdict::Extinct)
                         throw ConfigError("--mech", "mechanism does not satisfy the extinction condition; lambda_t is not finite");
                     }
                   },
                   [=, &c](std::ostream& o) {
                     const auto m = parse_mechanism(*mech);
                     const auto v = sizes();
                     std::ostringstream s;
                     if (m.kind() == BranchingMechanism::Kind::Generic) {
                       const auto est =
                           levy_cdf_mc_estimate(m, *t, v, *x0, *delta, *reps, c.seed, threads_of(c));
                       if (c.format == "json") {
                         Json j{{"schema_version", kReportSchemaVersion}, {"mech", m.spec()}, {"t", *t},
                                {"estimate", true}, {"x0", *x0},   {"delta", *delta},
                                {"replicas", *reps}};
                         Json rows = Json::array();
                         for (std::size_t i = 0; i < est.x.size(); ++i)
                           rows.push_back({{"x", est.x[i]}, {"cdf", est.cdf[i]}, {"se", est.se[i]}});
                         j["values"] = rows;
                         s << j.dump(2) << "\n";
                       } else {
                         s << "# mech=" << m.spec() << "\n# t=" << fmt(*t) << "\n# estimate=monte-carlo x0=" << fmt(*x0)
                           << " delta=" << fmt(*delta) << " replicas=" << *reps << "\nx,cdf_value,se\n";
                         for (std::size_t i = 0; i < est.x.size(); ++i)
                           s << fmt(est.x[i]) << "," << fmt(est.cdf[i]) << "," << fmt(est.se[i]) << "\n";
                       }
                     } else {
                       const auto table = build_levy_table(m, *t, v);
                       if (c.format == "json") {
                         Json j{{"schema_version", kReportSchemaVersion},
                                {"mech", table.mech_spec},
                                {"t", table.t},
                                {"total_mass", table.total_mass.infinite ? Json("+inf") : Json(table.total_mass.value)},
                                {"drift", table.drift}};
                         Json rows = Json::array();
                         for (std::size_t i = 0; i < table.x.size(); ++i)
                           rows.push_back({{"x", table.x[i]}, {"cdf", table.cdf[i]}});
                         j["values"] = rows;
                         s << j.dump(2) << "\n";
                       } else {
                         write_levy_table_csv(table, s);
                       }
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // simulate-csbp ---------------------------------------------------------
  {
    auto* sc = app.add_subcommand("simulate-csbp", "simulate the CSBP flow Z(t, x_1..x_p)");
    auto& c = common(sc, "csv", {"csv", "json"}, true);
    auto mech = std::make_shared<std::string>();
    auto points = std::make_shared<std::vector<double>>();
    auto t = std::make_shared<double>(1.0);
    auto delta = std::make_shared<double>(1e-3);
    auto reps = std::make_shared<std::size_t>(1);
    auto traj = std::make_shared<std::string>();
    sc->add_option("--mech", *mech, "branching mechanism spec (jump-only, or pure feller)")->required();
    sc->add_option("--points", *points, "ordered initial masses x_1 <= ... <= x_p (mass units)")
        ->required()
        ->delimiter(',');
    sc->add_option("--t", *t, "time horizon t > 0 (time units)")->capture_default_str();
    sc->add_option("--delta", *delta, "jump truncation level delta > 0 (mass units)")->capture_default_str();
    sc->add_option("--replicas", *reps, "independent replicas (count)")->capture_default_str();
    sc->add_option("--trajectory", *traj, "write the jump-time trajectory of replica 0 to this CSV file");
    runners[sc] = {[=] {
                     const auto m = field("--mech", [&] { return parse_mechanism(*mech); });
                     if (m.beta() != 0 && m.pi()) throw ConfigError("--mech", "mixed diffusion and jumps not supported");
                     positive("--t", *t);
                     positive("--delta", *delta);
                     if (*reps < 1) throw ConfigError("--replicas", "must be >= 1");
                     for (std::size_t i = 0; i < points->size(); ++i) {
                       nonneg("--points", (*points)[i]);
                       if (i && (*points)[i] < (*points)[i - 1]) throw ConfigError("--points", "must be ordered");
                     }
                     if (m.kind() == BranchingMechanism::Kind::Stable) {
                       field("--delta", [&] { return TruncatedJumps(*m.pi(), *delta).rate(); });
                     }
                     if (m.beta() != 0 && !traj->empty()) throw ConfigError("--trajectory", "jump mechanisms only");
                   },
                   [=, &c](std::ostream& o) {
                     const auto m = parse_mechanism(*mech);
                     TrajectoryRecorder rec;
                     const FlowObserver obs = rec.observer();
                     const auto rows = replica_map(*reps, threads_of(c), [&](std::size_t i) {
                       Rng rng = Rng::stream(c.seed, i);
                       if (m.beta() != 0) {
                         std::vector<double> z;
                         double prev = 0, acc = 0;
                         for (double x : *points) {
                           acc += feller_exact_sample(m.beta(), *t, x - prev, rng);
                           prev = x;
                           z.push_back(acc);
                         }
                         return z;
                       }
                       FlowOptions opt;
                       if (i == 0 && !traj->empty()) opt.observer = &obs;
                       return simulate_csbp_flow(m, *points, *t, *delta, rng, opt).values;
                     });
                     if (!traj->empty()) {
                       auto f = open_side_file("--trajectory", *traj);
                       rec.write_csv(f);
                     }
                     std::ostringstream s;
                     if (c.format == "json") {
                       Json j{{"schema_version", kReportSchemaVersion}, {"mech", m.spec()}, {"t", *t},
                              {"delta", *delta},   {"seed", c.seed},      {"points", *points}};
                       j["values"] = rows;
                       s << j.dump(2) << "\n";
                     } else {
                       s << "replica";
                       for (std::size_t k = 1; k <= points->size(); ++k) s << ",Z" << k;
                       s << "\n";
                       for (std::size_t i = 0; i < rows.size(); ++i) {
                         s << i;
                         for (double v : rows[i]) s << "," << fmt(v);
                         s << "\n";
                       }
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // simulate-coalescent ---------------------------------------------------
  {
    auto* sc = app.add_subcommand("simulate-coalescent", "simulate a Lambda-coalescent from n singletons");
    auto& c = common(sc, "csv", {"csv", "json"}, true);
    auto lam = std::make_shared<std::string>();
    auto n = std::make_shared<std::uint64_t>(100);
    auto t = std::make_shared<double>(1.0);
    auto events = std::make_shared<std::string>();
    sc->add_option("--lambda", *lam, "Lambda measure spec")->required();
    sc->add_option("--n", *n, "initial number of singleton blocks (count)")->capture_default_str();
    sc->add_option("--t", *t, "time horizon t >= 0 (time units)")->capture_default_str();
    sc->add_option("--events", *events, "write the merge events (time, b_before, k) to this CSV file");
    runners[sc] = {[=] {
                     field("--lambda", [&] { return parse_lambda(*lam); });
                     if (*n < 1) throw ConfigError("--n", "must be >= 1");
                     nonneg("--t", *t);
                   },
                   [=, &c](std::ostream& o) {
                     const auto l = parse_lambda(*lam);
                     Rng rng = Rng::stream(c.seed, 0);
                     EventLog log;
                     const MergeObserver obs = log.observer();
                     const BlockState st =
                         simulate_to(l, BlockState::singletons(*n), *t, rng, events->empty() ? nullptr : &obs);
                     if (!events->empty()) {
                       auto f = open_side_file("--events", *events);
                       log.write_csv(f);
                     }
                     std::ostringstream s;
                     if (c.format == "json") {
                       Json j{{"schema_version", kReportSchemaVersion},
                              {"lambda", l.spec()},
                              {"n", *n},
                              {"t", *t},
                              {"seed", c.seed},
                              {"blocks", st.block_count()},
                              {"sizes", st.sizes}};
                       s << j.dump(2) << "\n";
                     } else {
                       frequencies(st).write_csv(s);
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // simulate-fv -----------------------------------------------------------
  {
    auto* sc = app.add_subcommand("simulate-fv", "simulate the generalized Fleming-Viot flow at tracked points");
    auto& c = common(sc, "csv", {"csv", "json"}, true);
    auto nu = std::make_shared<std::string>();
    auto lam = std::make_shared<std::string>();
    auto points = std::make_shared<std::vector<double>>();
    auto t = std::make_shared<double>(1.0);
    auto a = std::make_shared<double>(1.0);
    auto reps = std::make_shared<std::size_t>(1);
    auto snaps = std::make_shared<std::string>();
    sc->add_option("--nu", *nu, "finite nu on ]0,1] as atoms:X@W,... (nu weights)");
    sc->add_option("--lambda", *lam, "Lambda measure spec with finite nu = x^-2 Lambda");
    sc->add_option("--points", *points, "ordered tracked points in [0,a] (population fraction times a)")
        ->required()
        ->delimiter(',');
    sc->add_option("--t", *t, "time horizon t > 0 (time units; the base flow runs to a*t)")->capture_default_str();
    sc->add_option("--a", *a, "large-population scale a > 0 (dimensionless); 1 = no rescaling")->capture_default_str();
    sc->add_option("--replicas", *reps, "independent replicas (count)")->capture_default_str();
    sc->add_option("--snapshots", *snaps, "write event snapshots (time, x..., F...) of replica 0 to this CSV file");
    auto make_nu = [=]() -> FiniteNu {
      if (!nu->empty()) {
        const std::string body = nu->rfind("atoms:", 0) == 0 ? nu->substr(6) : *nu;
        return FiniteNu::atoms(parse_atoms(body));
      }
      return FiniteNu::from_lambda(parse_lambda(*lam));
    };
    runners[sc] = {[=] {
                     if (nu->empty() == lam->empty()) throw ConfigError("--nu", "give exactly one of --nu or --lambda");
                     field(nu->empty() ? "--lambda" : "--nu", make_nu);
                     positive("--t", *t);
                     positive("--a", *a);
                     if (*reps < 1) throw ConfigError("--replicas", "must be >= 1");
                     for (std::size_t i = 0; i < points->size(); ++i) {
                       const double x = (*points)[i];
                       if (!(x >= 0 && x <= *a)) throw ConfigError("--points", "must lie in [0,a]");
                       if (i && x < (*points)[i - 1]) throw ConfigError("--points", "must be ordered");
                     }
                   },
                   [=, &c](std::ostream& o) {
                     const FiniteNu f = make_nu();
                     std::vector<double> base;
                     for (double x : *points) base.push_back(x / *a);
                     FvSnapshotRecorder rec(base);
                     const FvObserver obs = rec.observer();
                     const auto rows = replica_map(*reps, threads_of(c), [&](std::size_t i) {
                       Rng rng = Rng::stream(c.seed, i);
                       FvFlowState st = simulate_fv_flow(f, base, *a * *t, rng,
                                                         (i == 0 && !snaps->empty()) ? &obs : nullptr);
                       for (auto& v : st.values) v *= *a;
                       return st.values;
                     });
                     if (!snaps->empty()) {
                       auto fs = open_side_file("--snapshots", *snaps);
                       rec.write_csv(fs);
                     }
                     std::ostringstream s;
                     if (c.format == "json") {
                       Json j{{"schema_version", kReportSchemaVersion}, {"nu", f.describe()}, {"a", *a}, {"t", *t},
                              {"seed", c.seed},                         {"points", *points}};
                       j["values"] = rows;
                       s << j.dump(2) << "\n";
                     } else {
                       s << "replica";
                       for (std::size_t k = 1; k <= points->size(); ++k) s << ",F" << k;
                       s << "\n";
                       for (std::size_t i = 0; i < rows.size(); ++i) {
                         s << i;
                         for (double v : rows[i]) s << "," << fmt(v);
                         s << "\n";
                       }
                     }
                     emit(c, s.str(), o);
                     return 0;
                   }};
  }

  // experiment ------------------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "run a statistical or numerical experiment with pass/fail gates");
  exp->require_subcommand(1);

  auto report_runner = [&](CLI::App* sc, Common& c, std::function<void()> validate,
                           std::function<ExperimentReport(const Common&)> body) {
    sc->add_flag("--timing", c.timing, "include wall time (seconds) in the report");
    sc->add_option("--raw", c.raw, "write per-replica statistics to this CSV file");
    runners[sc] = {std::move(validate), [body, &c](std::ostream& o) {
                     const ExperimentReport rep = body(c);
                     emit(c, c.format == "json" ? report_json(rep, c.timing) : report_text(rep, c.timing), o);
                     if (!c.raw.empty()) {
                       auto f = open_side_file("--raw", c.raw);
                       write_raw_csv(rep, f);
                     }
                     return rep.pass ? 0 : 1;
                   }};
  };

  {
    auto* sc = exp->add_subcommand("hydro", "hydrodynamic limit of rescaled block-size measures");
    auto& c = common(sc, "text", {"text", "json"}, true);
    auto cfg = std::make_shared<HydroConfig>();
    auto window = std::make_shared<std::vector<double>>(std::vector<double>{cfg->x_lo, cfg->x_hi});
    sc->add_option("--gamma", cfg->gamma, "stable index gamma in ]1,2[")->capture_default_str();
    sc->add_option("--a", cfg->a_list, "population scales a > 0 (dimensionless), comma separated")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--t", cfg->t, "time t > 0 (time units)")->capture_default_str();
    sc->add_option("--n", cfg->n, "initial singleton blocks (count)")->capture_default_str();
    sc->add_option("--replicas", cfg->replicas, "replicas per scale (count)")->capture_default_str();
    sc->add_option("--window", *window, "comparison window LO,HI (mass units)")->delimiter(',')->expected(2);
    sc->add_option("--tolerance", cfg->tolerance, "gate on the window distance at the first scale")->capture_default_str();
    report_runner(
        sc, c,
        [=] {
          if (!(cfg->gamma > 1 && cfg->gamma < 2)) throw ConfigError("--gamma", "must lie in ]1,2[");
          nonempty("--a", cfg->a_list);
          for (double a : cfg->a_list) positive("--a", a);
          positive("--t", cfg->t);
          if (cfg->n < 2) throw ConfigError("--n", "must be >= 2");
          if (cfg->replicas < 2) throw ConfigError("--replicas", "must be >= 2");
          if (window->size() != 2 || !((*window)[0] > 0) || !((*window)[1] > (*window)[0]))
            throw ConfigError("--window", "needs 0 < LO < HI");
        },
        [=](const Common& cm) {
          HydroConfig h = *cfg;
          h.x_lo = (*window)[0];
          h.x_hi = (*window)[1];
          h.seed = cm.seed;
          h.threads = threads_of(cm);
          return hydrodynamic_run(h);
        });
  }
  {
    auto* sc = exp->add_subcommand("smalltime", "small-time block counts and block-size distribution");
    auto& c = common(sc, "text", {"text", "json"}, true);
    auto cfg = std::make_shared<SmalltimeConfig>();
    auto xr = std::make_shared<std::vector<double>>(std::vector<double>{0.05, 5, 60});
    auto kxr = std::make_shared<std::vector<double>>(std::vector<double>{0.5, 5, 40});
    sc->add_option("--gamma", cfg->gamma, "stable index gamma in ]1,2[")->capture_default_str();
    sc->add_option("--eps", cfg->eps_list, "scales eps in ]0,1[ (dimensionless), comma separated; the last is gated")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--n", cfg->n, "initial singleton blocks (count)")->capture_default_str();
    sc->add_option("--replicas", cfg->replicas, "replicas per eps (count)")->capture_default_str();
    sc->add_option("--x-grid", *xr, "log grid LO,HI,COUNT of rescaled sizes x (dimensionless)")
        ->delimiter(',')
        ->expected(3);
    sc->add_option("--mass-tolerance", cfg->mass_tolerance, "relative gate on eps*N")->capture_default_str();
    sc->add_option("--cdf-tolerance", cfg->cdf_tolerance, "gate on the CDF sup-gap")->capture_default_str();
    sc->add_option("--kingman", cfg->kingman_control, "run the Kingman control (true/false)")->capture_default_str();
    sc->add_option("--kingman-eps", cfg->kingman_eps, "Kingman control eps (dimensionless)")->capture_default_str();
    sc->add_option("--kingman-n", cfg->kingman_n, "Kingman control singleton blocks (count)")->capture_default_str();
    sc->add_option("--kingman-replicas", cfg->kingman_replicas, "Kingman control replicas (count)")
        ->capture_default_str();
    sc->add_option("--kingman-x-grid", *kxr, "Kingman log grid LO,HI,COUNT (dimensionless)")
        ->delimiter(',')
        ->expected(3);
    report_runner(
        sc, c,
        [=] {
          if (!(cfg->gamma > 1 && cfg->gamma < 2)) throw ConfigError("--gamma", "must lie in ]1,2[");
          nonempty("--eps", cfg->eps_list);
          for (double e : cfg->eps_list)
            if (!(e > 0 && e < 1)) throw ConfigError("--eps", "must lie in ]0,1[");
          if (cfg->replicas < 2) throw ConfigError("--replicas", "must be >= 2");
          for (auto* g : {xr.get(), kxr.get()}) {
            const char* name = g == xr.get() ? "--x-grid" : "--kingman-x-grid";
            if (!((*g)[0] > 0) || !((*g)[1] > (*g)[0]) || !((*g)[2] >= 2)) throw ConfigError(name, "needs 0 < LO < HI, COUNT >= 2");
          }
          const double xmin = (*xr)[0];
          for (double e : cfg->eps_list)
            if (static_cast<double>(cfg->n) * e * xmin < 50)
              throw ConfigError("--n", "too small for eps=" + fmt(e) + ": need n*eps*x_min >= 50");
          if (cfg->kingman_control && static_cast<double>(cfg->kingman_n) * cfg->kingman_eps * (*kxr)[0] < 50)
            throw ConfigError("--kingman-n", "too small: need n*eps*x_min >= 50");
          if (cfg->kingman_control && cfg->kingman_replicas < 2)
            throw ConfigError("--kingman-replicas", "must be >= 2");
        },
        [=](const Common& cm) {
          SmalltimeConfig s = *cfg;
          s.x_grid = log_spaced((*xr)[0], (*xr)[1], static_cast<int>((*xr)[2]));
          s.kingman_x_grid = log_spaced((*kxr)[0], (*kxr)[1], static_cast<int>((*kxr)[2]));
          s.seed = cm.seed;
          s.threads = threads_of(cm);
          return smalltime_blocks_run(s);
        });
  }
  {
    auto* sc = exp->add_subcommand("largepop", "large-population limit of Fleming-Viot one-point marginals");
    auto& c = common(sc, "text", {"text", "json"}, true);
    auto cfg = std::make_shared<LargepopConfig>();
    auto pi = std::make_shared<std::string>("1@1");
    sc->add_option("--pi", *pi, "finite jump measure of the limit CSBP as R@W,... (mass units @ rate)")
        ->capture_default_str();
    sc->add_option("--a", cfg->a_list, "increasing population scales a >= max atom (dimensionless)")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--x", cfg->x, "tracked initial mass x in [0, min a] (mass units)")->capture_default_str();
    sc->add_option("--t", cfg->t, "time t > 0 (time units)")->capture_default_str();
    sc->add_option("--q", cfg->q_list, "Laplace arguments q > 0 (inverse mass), comma separated")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--replicas", cfg->replicas, "replicas per scale (count)")->capture_default_str();
    sc->add_option("--slack", cfg->slack, "additive slack of the gate at the largest scale")->capture_default_str();
    report_runner(
        sc, c,
        [=] {
          const auto atoms = field("--pi", [&] { return parse_atoms(pi->rfind("atoms:", 0) == 0 ? pi->substr(6) : *pi); });
          field("--pi", [&] { return JumpMeasure::atoms(atoms); });
          nonempty("--a", cfg->a_list);
          for (std::size_t i = 0; i < cfg->a_list.size(); ++i) {
            positive("--a", cfg->a_list[i]);
            if (i && !(cfg->a_list[i] > cfg->a_list[i - 1])) throw ConfigError("--a", "must be increasing");
            for (const auto& at : atoms)
              if (at.position > cfg->a_list[i]) throw ConfigError("--a", "every a must be >= every atom of pi");
          }
          nonneg("--x", cfg->x);
          if (cfg->x > cfg->a_list.front()) throw ConfigError("--x", "must not exceed the smallest a");
          positive("--t", cfg->t);
          nonempty("--q", cfg->q_list);
          for (double q : cfg->q_list) positive("--q", q);
          if (cfg->replicas < 2) throw ConfigError("--replicas", "must be >= 2");
        },
        [=](const Common& cm) {
          LargepopConfig l = *cfg;
          l.pi_atoms = parse_atoms(pi->rfind("atoms:", 0) == 0 ? pi->substr(6) : *pi);
          l.seed = cm.seed;
          l.threads = threads_of(cm);
          return largepop_marginal_run(l);
        });
  }
  {
    auto* sc = exp->add_subcommand("smolu", "coagulation-equation residuals");
    auto& c = common(sc, "text", {"text", "json"}, true);
    auto opts = std::make_shared<SmoluOptions>();
    auto method = std::make_shared<std::string>("all");
    auto mech = std::make_shared<std::string>("stable:1.5");
    auto t = std::make_shared<double>(1.0);
    auto f = std::make_shared<std::string>("exp:1");
    sc->add_option("--method", *method, "all | exact-exponential | feller-quadrature | mc-poisson | series")
        ->check(CLI::IsMember({"all", "exact-exponential", "feller-quadrature", "mc-poisson", "series"}))
        ->capture_default_str();
    sc->add_option("--mech", *mech, "branching mechanism spec (ignored for --method all)")->capture_default_str();
    sc->add_option("--t", *t, "time t > 0 (time units; ignored for --method all)")->capture_default_str();
    sc->add_option("--f", *f, "test function exp:Q or hat:LO,HI (ignored for --method all)")->capture_default_str();
    sc->add_option("--samples-per-node", opts->samples_per_node, "Poisson sums per jump-size node (count)")
        ->capture_default_str();
    sc->add_option("--tolerance", opts->tolerance, "override the residual tolerance of a single method");
    auto parse_f = [=]() -> TestFunction {
      const auto colon = f->find(':');
      const std::string kind = f->substr(0, colon);
      const std::string rest = colon == std::string::npos ? "" : f->substr(colon + 1);
      try {
        if (kind == "exp") return TestFunction::exponential(std::stod(rest));
        if (kind == "hat") {
          const auto comma = rest.find(',');
          if (comma == std::string::npos) throw ConfigError("--f", "hat needs LO,HI");
          const double lo = std::stod(rest.substr(0, comma)), hi = std::stod(rest.substr(comma + 1));
          if (!(lo > 0 && hi > lo)) throw ConfigError("--f", "hat needs 0 < LO < HI");
          return TestFunction::hat(lo, hi);
        }
      } catch (const std::logic_error&) {
        throw ConfigError("--f", "cannot parse '" + *f + "'");
      }
      throw ConfigError("--f", "expected exp:Q or hat:LO,HI");
    };
    report_runner(
        sc, c,
        [=] {
          field("--mech", [&] { return parse_mechanism(*mech); });
          positive("--t", *t);
          const TestFunction tf = parse_f();
          if (tf.kind == TestFunction::Kind::Exponential) positive("--f", tf.q);
          if (opts->samples_per_node < 2) throw ConfigError("--samples-per-node", "must be >= 2");
        },
        [=](const Common& cm) {
          SmoluOptions o = *opts;
          o.seed = cm.seed;
          o.threads = threads_of(cm);
          if (*method == "all") return smolu_run(o);
          const auto m = parse_mechanism(*mech);
          const TestFunction tf = parse_f();
          if (*method == "series") return smolu_series_check(m, *t, tf, 12);
          const SmoluMethod sm = *method == "exact-exponential"   ? SmoluMethod::ExactExponential
                                 : *method == "feller-quadrature" ? SmoluMethod::FellerQuadrature
                                                                  : SmoluMethod::McPoisson;
          return smolu_residual(m, *t, tf, sm, o);
        });
  }
  {
    auto* sc = exp->add_subcommand("cdi", "coming down from infinity versus extinction criteria");
    auto& c = common(sc, "text", {"text", "json"}, false);
    auto cfg = std::make_shared<CdiConfig>();
    sc->add_option("--gammas", cfg->gammas, "gamma values in ]1,2[ for Beta(2-gamma,gamma) (expected positive)")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--negative", cfg->negative_specs, "Lambda specs expected negative (space separated)")
        ->capture_default_str();
    report_runner(
        sc, c,
        [=] {
          for (double g : cfg->gammas)
            if (!(g > 1 && g < 2)) throw ConfigError("--gammas", "must lie in ]1,2[");
          for (const auto& s : cfg->negative_specs) {
            const auto l = field("--negative", [&] { return parse_lambda(s); });
            if (l.is_kingman()) throw ConfigError("--negative", "Kingman has no nu; it is not a valid negative case");
          }
        },
        [=](const Common&) { return cdi_equivalence_run(*cfg); });
  }
  {
    auto* sc = exp->add_subcommand("rates", "merger-rate asymptotics and series identities");
    auto& c = common(sc, "text", {"text", "json"}, false);
    auto cfg = std::make_shared<RatesConfig>();
    sc->add_option("--gamma", cfg->gamma, "stable index gamma in ]1,2[")->capture_default_str();
    sc->add_option("--b", cfg->b_list, "block counts b >= 2 (count), comma separated")
        ->delimiter(',')
        ->capture_default_str();
    sc->add_option("--K", cfg->k_terms, "series truncation K (count)")->capture_default_str();
    report_runner(
        sc, c,
        [=] {
          if (!(cfg->gamma > 1 && cfg->gamma < 2)) throw ConfigError("--gamma", "must lie in ]1,2[");
          nonempty("--b", cfg->b_list);
          for (double b : cfg->b_list)
            if (!(b >= 2) || b != std::floor(b)) throw ConfigError("--b", "must be integers >= 2");
          if (cfg->k_terms < 2) throw ConfigError("--K", "must be >= 2");
        },
        [=](const Common&) { return rate_asymptotics_check(*cfg); });
  }

  // ---------------------------------------------------------------------------
  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  std::vector<std::string> argv_store{"coalflow"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = nullptr;
  for (auto& [sc, r] : runners) {
    if (sc->parsed()) active = sc;
  }
  if (!active) {
    err << app.help();
    return 2;
  }
  const Runner& r = runners.at(active);
  try {
    r.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    return r.execute(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace coalflow::cli

#include "coalflow/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "coalflow/error.hpp"
#include "format.hpp"
#include "special.hpp"

namespace coalflow {

namespace {

bool near_integer(double a) { return std::abs(a - std::round(a)) < 1e-3; }

double beta_total_rate(const LambdaMeasure& lam, std::uint64_t b) {
  const double a = lam.a(), c = lam.c(), bd = static_cast<double>(b);
  if (a == 1 && c == 1) return lam.mass() * (bd - 1);
  using detail::beta_cont;
  const double v = beta_cont(a - 2, c) - beta_cont(a - 2, c + bd) - bd * beta_cont(a - 1, c + bd - 1);
  return lam.mass() * v / std::exp(detail::log_beta(a, c));
}

}  // namespace

BlockState BlockState::singletons(std::uint64_t n) {
  if (n < 1) throw DomainError("block state needs n >= 1");
  BlockState s;
  s.sizes.assign(n, 1);
  s.n0 = n;
  return s;
}

double merger_rate(const LambdaMeasure& lam, std::uint64_t b, std::uint64_t k) {
  if (k < 2 || k > b) throw DomainError("merger_rate: need 2 <= k <= b");
  const double bd = static_cast<double>(b), kd = static_cast<double>(k);
  if (lam.is_kingman()) return k == 2 ? bd * (bd - 1) / 2 : 0.0;
  if (lam.family() == LambdaMeasure::Family::Beta) {
    return lam.mass() * std::exp(detail::log_choose(bd, kd) + detail::log_beta(lam.a() + kd - 2, lam.c() + bd - kd) -
                                 detail::log_beta(lam.a(), lam.c()));
  }
  return std::exp(detail::log_choose(bd, kd)) * binom_moment(lam, b, k);
}

double total_rate(const LambdaMeasure& lam, std::uint64_t b) {
  if (b < 2) return 0;
  const double bd = static_cast<double>(b);
  switch (lam.family()) {
    case LambdaMeasure::Family::Kingman: return bd * (bd - 1) / 2;
    case LambdaMeasure::Family::Beta:
      if ((lam.a() == 1 && lam.c() == 1) || !near_integer(lam.a())) return beta_total_rate(lam, b);
      break;
    case LambdaMeasure::Family::Atoms: {
      double s = 0;
      for (const auto& a : lam.atoms()) s += a.weight / (a.position * a.position) * binom_ge2(b, a.position);
      return s;
    }
    case LambdaMeasure::Family::Density: break;
  }
  return lam.integrate_nu([b](double x) { return binom_ge2(b, x); }, 1 / bd);
}

// ---------------------------------------------------------------------------

JumpSizeSampler::JumpSizeSampler(const LambdaMeasure& lam, std::size_t cache_capacity)
    : lam_(lam), capacity_(std::max<std::size_t>(cache_capacity, 1)) {}

double JumpSizeSampler::total_rate(std::uint64_t b) {
  if (lam_.family() == LambdaMeasure::Family::Density && b >= 2) return table(b).total;
  return coalflow::total_rate(lam_, b);
}

const JumpSizeSampler::Table& JumpSizeSampler::table(std::uint64_t b) {
  auto hit = cache_.find(b);
  if (hit != cache_.end()) {
    lru_.splice(lru_.begin(), lru_, hit->second.second);
    return hit->second.first;
  }
  Table t;
  t.cumulative.reserve(b - 1);
  double cum = 0;
  for (std::uint64_t k = 2; k <= b; ++k) {
    cum += merger_rate(lam_, b, k);
    t.cumulative.push_back(cum);
  }
  t.total = cum;
  if (cache_.size() >= capacity_) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(b);
  return cache_.emplace(b, std::make_pair(std::move(t), lru_.begin())).first->second.first;
}

std::uint64_t JumpSizeSampler::sample_atoms(std::uint64_t b, Rng& rng) const {
  const auto& atoms = lam_.atoms();
  double total = 0;
  std::vector<double> w(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    w[i] = atoms[i].weight / (atoms[i].position * atoms[i].position) * binom_ge2(b, atoms[i].position);
    total += w[i];
  }
  double u = rng.uniform() * total;
  std::size_t i = 0;
  while (i + 1 < atoms.size() && u > w[i]) u -= w[i++];
  const double x = atoms[i].position;
  if (x >= 1) return b;
  const double p2 = binom_ge2(b, x);
  if (p2 > 0.25) {
    std::binomial_distribution<std::uint64_t> bin(b, x);
    for (;;) {
      const std::uint64_t k = bin(rng);
      if (k >= 2) return k;
    }
  }
  // Inversion from k = 2 upward for the conditioned law.
  const double bd = static_cast<double>(b), odds = x / (1 - x);
  double pmf = bd * (bd - 1) / 2 * x * x * std::exp((bd - 2) * std::log1p(-x)) / p2;
  double v = rng.uniform();
  std::uint64_t k = 2;
  while (v > pmf && k < b) {
    v -= pmf;
    pmf *= (bd - k) / (k + 1) * odds;
    ++k;
  }
  return k;
}

std::uint64_t JumpSizeSampler::sample(std::uint64_t b, Rng& rng) {
  if (b < 2) throw DomainError("jump_size_sample: need b >= 2");
  if (b == 2) return 2;
  switch (lam_.family()) {
    case LambdaMeasure::Family::Kingman: return 2;
    case LambdaMeasure::Family::Atoms: return sample_atoms(b, rng);
    case LambdaMeasure::Family::Beta: {
      const double a = lam_.a(), c = lam_.c(), bd = static_cast<double>(b);
      const double total = coalflow::total_rate(lam_, b);
      double p = merger_rate(lam_, b, 2);
      const double u = rng.uniform() * total;
      double cum = p;
      std::uint64_t k = 2;
      while (cum < u && k < b) {
        const double kd = static_cast<double>(k);
        p *= (bd - kd) / (kd + 1) * (a + kd - 2) / (c + bd - kd - 1);
        ++k;
        cum += p;
      }
      return k;
    }
    case LambdaMeasure::Family::Density: {
      const Table& t = table(b);
      const double u = rng.uniform() * t.total;
      const auto it = std::lower_bound(t.cumulative.begin(), t.cumulative.end(), u);
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - t.cumulative.begin()), t.cumulative.size() - 1);
      return idx + 2;
    }
  }
  return 2;
}

std::uint64_t jump_size_sample(const LambdaMeasure& lam, std::uint64_t b, Rng& rng) {
  JumpSizeSampler s(lam, 1);
  return s.sample(b, rng);
}

// ---------------------------------------------------------------------------

void CoalescentSimulator::simulate_to(BlockState& state, double t_target, Rng& rng, const MergeObserver* observer) {
  if (!(t_target >= state.clock)) throw DomainError("simulate_to: t_target precedes the state clock");
  auto& sizes = state.sizes;
  while (sizes.size() > 1) {
    const std::uint64_t b = sizes.size();
    const double rate = sampler_.total_rate(b);
    const double dt = rng.exponential() / rate;
    if (state.clock + dt > t_target) break;
    state.clock += dt;
    const std::uint64_t k = sampler_.sample(b, rng);
    std::uint64_t merged = 0;
    for (std::uint64_t j = 0; j < k; ++j) {
      const std::size_t last = b - 1 - j;
      const std::size_t i = rng.below(last + 1);
      std::swap(sizes[i], sizes[last]);
      merged += sizes[last];
    }
    sizes.resize(b - k);
    sizes.push_back(merged);
    if (observer) (*observer)({state.clock, b, k});
  }
  state.clock = t_target;
}

std::uint64_t CoalescentSimulator::block_count_at(std::uint64_t n, double t, Rng& rng) {
  if (n < 1) throw DomainError("block_count_at: n must be >= 1");
  if (!(t >= 0)) throw DomainError("block_count_at: t must be >= 0");
  double clock = 0;
  std::uint64_t b = n;
  while (b > 1) {
    clock += rng.exponential() / sampler_.total_rate(b);
    if (clock > t) break;
    b -= sampler_.sample(b, rng) - 1;
  }
  return b;
}

BlockState simulate_to(const LambdaMeasure& lam, BlockState state, double t_target, Rng& rng,
                       const MergeObserver* observer) {
  CoalescentSimulator sim(lam);
  sim.simulate_to(state, t_target, rng, observer);
  return state;
}

std::uint64_t block_count_at(const LambdaMeasure& lam, std::uint64_t n, double t, Rng& rng) {
  CoalescentSimulator sim(lam);
  return sim.block_count_at(n, t, rng);
}

EmpiricalMeasure frequencies(const BlockState& state) {
  std::vector<Atom> atoms;
  atoms.reserve(state.sizes.size());
  const double n = static_cast<double>(state.n0);
  for (auto s : state.sizes) atoms.push_back({static_cast<double>(s) / n, 1.0});
  return EmpiricalMeasure(std::move(atoms));
}

double fv_marginal_via_dual(const BlockState& state, double y, Rng& rng) {
  if (!(y >= 0 && y <= 1)) throw DomainError("fv_marginal_via_dual: y must lie in [0,1]");
  std::uint64_t hit = 0;
  for (auto s : state.sizes) {
    if (rng.uniform() <= y) hit += s;
  }
  return static_cast<double>(hit) / static_cast<double>(state.n0);
}

MergeObserver EventLog::observer() {
  return [this](const MergeEvent& e) { events_.push_back(e); };
}

void EventLog::write_csv(std::ostream& os) const {
  os << "time,b_before,k\n";
  for (const auto& e : events_) os << detail::fmt(e.time) << "," << e.b_before << "," << e.k << "\n";
}

}  // namespace coalflow

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <list>
#include <unordered_map>
#include <vector>

#include "coalflow/empirical.hpp"
#include "coalflow/measures.hpp"
#include "coalflow/rng.hpp"

namespace coalflow {

/// Block sizes of an n-coalescent.
struct BlockState {
  std::vector<std::uint64_t> sizes;
  std::uint64_t n0 = 0;
  double clock = 0;

  static BlockState singletons(std::uint64_t n);
  std::size_t block_count() const { return sizes.size(); }
  bool absorbed() const { return sizes.size() <= 1; }
};

/// alpha_{b,k} = C(b,k) int x^{k-2} (1-x)^{b-k} Lambda(dx): rate at which a
/// given configuration of b blocks sees some k of them merge.
double merger_rate(const LambdaMeasure& lam, std::uint64_t b, std::uint64_t k);

/// alpha_b = sum_k alpha_{b,k}.
double total_rate(const LambdaMeasure& lam, std::uint64_t b);

/// Draws merger sizes k with probability alpha_{b,k}/alpha_b.
/// Beta family: sequential inversion along the ratio recursion.
/// Atoms: atom choice, then Bin(b, x) conditioned on >= 2.
/// Density: per-b tables kept in a small LRU cache (task-local object).
class JumpSizeSampler {
 public:
  explicit JumpSizeSampler(const LambdaMeasure& lam, std::size_t cache_capacity = 32);

  std::uint64_t sample(std::uint64_t b, Rng& rng);
  double total_rate(std::uint64_t b);

 private:
  struct Table {
    double total;
    std::vector<double> cumulative;  // cumulative[k-2] = sum_{j<=k} alpha_{b,j}
  };
  const Table& table(std::uint64_t b);
  std::uint64_t sample_atoms(std::uint64_t b, Rng& rng) const;

  LambdaMeasure lam_;
  std::size_t capacity_;
  std::list<std::uint64_t> lru_;
  std::unordered_map<std::uint64_t, std::pair<Table, std::list<std::uint64_t>::iterator>> cache_;
};

std::uint64_t jump_size_sample(const LambdaMeasure& lam, std::uint64_t b, Rng& rng);

struct MergeEvent {
  double time;
  std::uint64_t b_before;
  std::uint64_t k;
};
using MergeObserver = std::function<void(const MergeEvent&)>;

/// Gillespie simulation on block sizes; reuses its sampler across calls.
class CoalescentSimulator {
 public:
  explicit CoalescentSimulator(const LambdaMeasure& lam) : lam_(lam), sampler_(lam) {}

  /// Advances `state` to t_target or absorption. Holding times are
  /// Exponential(alpha_b); the k merging blocks are a uniform k-subset
  /// chosen by a partial Fisher-Yates shuffle with swap-remove.
  void simulate_to(BlockState& state, double t_target, Rng& rng, const MergeObserver* observer = nullptr);

  /// Number of blocks at time t from n singletons, tracking counts only.
  std::uint64_t block_count_at(std::uint64_t n, double t, Rng& rng);

 private:
  LambdaMeasure lam_;
  JumpSizeSampler sampler_;
};

BlockState simulate_to(const LambdaMeasure& lam, BlockState state, double t_target, Rng& rng,
                       const MergeObserver* observer = nullptr);

std::uint64_t block_count_at(const LambdaMeasure& lam, std::uint64_t n, double t, Rng& rng);

/// Counting measure on block frequencies size/n0.
EmpiricalMeasure frequencies(const BlockState& state);

/// One draw of F_t(y): sum of frequencies of blocks whose uniform label is <= y.
double fv_marginal_via_dual(const BlockState& state, double y, Rng& rng);

/// Collects merge events as (time, b_before, k) rows.
class EventLog {
 public:
  MergeObserver observer();
  void write_csv(std::ostream& os) const;
  const std::vector<MergeEvent>& events() const { return events_; }

 private:
  std::vector<MergeEvent> events_;
};

}  // namespace coalflow

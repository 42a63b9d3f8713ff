#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "lfv/measures.hpp"
#include "lfv/partition.hpp"
#include "lfv/rng.hpp"

namespace lfv {

enum class RateMethod {
  Auto,        // closed forms for Kingman/Beta/Uniform, quadrature otherwise
  Quadrature,  // always integrate the density part numerically
};

double binomial(int n, int k);
double log_binomial(int n, int k);
// C(b,k) * rate, evaluated in log space when b is large.
double weighted_binomial(int b, int k, double rate);

// lambda[b][k]: the rate at which one particular k-tuple among b blocks
// merges, for 2 <= k <= b <= B.
class RateTable {
 public:
  RateTable() = default;

  int max_blocks() const noexcept { return max_blocks_; }
  double tol() const noexcept { return tol_; }
  // Mass of the measure at 1; rates stay well defined but coming-down
  // diagnostics refuse tables built from such measures.
  double atom1() const noexcept { return atom1_; }
  // Mass at 0, i.e. the pairwise (Kingman) component of each lambda[b][2].
  double atom0() const noexcept { return atom0_; }

  double operator()(int b, int k) const;
  double at(int b, int k) const { return (*this)(b, k); }

  // max |lambda[b][k] - lambda[b+1][k] - lambda[b+1][k+1]| over the table.
  double consistency_defect() const;

 private:
  friend RateTable build_rate_table(const LambdaMeasure&, int, double, RateMethod);

  int max_blocks_ = 0;
  double tol_ = 0.0;
  double atom0_ = 0.0;
  double atom1_ = 0.0;
  std::vector<std::vector<double>> rows_;  // rows_[b][k], k in [0, b]
};

// Entries k = 0..b of row b (entries 0 and 1 are zero).
std::vector<double> rate_row(const LambdaMeasure& measure, int b,
                             double tol = kDefaultTol,
                             RateMethod method = RateMethod::Auto);

// Throws QuadratureDivergence (propagated) and InvariantViolation when the
// consistency relation fails beyond 3 tol.
RateTable build_rate_table(const LambdaMeasure& measure, int max_blocks,
                           double tol = kDefaultTol,
                           RateMethod method = RateMethod::Auto);

// sum_k C(n,k) lambda[n][k]. Throws OutOfRange unless 2 <= n <= B.
double total_rate(const RateTable& table, int n);
// sum_k (k-1) C(n,k) lambda[n][k].
double decrease_rate(const RateTable& table, int n);

// Same quantities from one integral each, without a table:
//   total    = int (1 - (1-x)^n - n x (1-x)^(n-1)) x^-2 Lambda(dx)
//   decrease = int (n x - 1 + (1-x)^n) x^-2 Lambda(dx)
double total_rate_integral(const LambdaMeasure& measure, int n,
                           double tol = kDefaultTol);
double decrease_rate_integral(const LambdaMeasure& measure, int n,
                              double tol = kDefaultTol);

// Per-b holding rates and merge-size distributions of the block dynamics.
class MergeKernel {
 public:
  MergeKernel(const RateTable& table, int max_blocks);

  int max_blocks() const noexcept { return max_blocks_; }
  // Total event rate with b blocks.
  double rate(int b) const { return rates_.at(b); }
  // Probability that an event with b blocks merges exactly k of them.
  double probability(int b, int k) const;
  // Draws k with probability C(b,k) lambda[b][k] / lambda_b.
  int sample_merge_size(int b, Stream& rng) const;

 private:
  int max_blocks_;
  std::vector<double> rates_;
  std::vector<std::vector<double>> cumulative_;  // cumulative_[b][k]
};

struct CoalescentEvent {
  double time = 0.0;
  std::vector<int> merged_blocks;  // zero-based indices before the merge
  OrderedPartition after;
};

struct CoalescentPath {
  OrderedPartition initial;
  std::vector<CoalescentEvent> events;
  double horizon = 0.0;
  // Set when the path stopped because no merge could happen (lambda_b = 0
  // with b >= 2) before the horizon.
  bool degenerate = false;
};

// Exact continuous-time simulation of the coalescent restricted to {1..n},
// started from singletons, until one block remains or `horizon` passes.
CoalescentPath simulate_coalescent(const RateTable& table, int n, double horizon,
                                   std::uint64_t seed, std::uint64_t replicate = 0);

OrderedPartition partition_at(const CoalescentPath& path, double t);

// Right-continuous step function t -> number of blocks.
class BlockCountPath {
 public:
  explicit BlockCountPath(const CoalescentPath& path);
  BlockCountPath(int initial, std::vector<std::pair<double, int>> jumps);

  int initial() const noexcept { return initial_; }
  const std::vector<std::pair<double, int>>& jumps() const noexcept { return jumps_; }
  int at(double t) const;
  int final_value() const noexcept {
    return jumps_.empty() ? initial_ : jumps_.back().second;
  }

 private:
  int initial_;
  std::vector<std::pair<double, int>> jumps_;  // (time, count from time on)
};

BlockCountPath block_count_path(const CoalescentPath& path);

inline constexpr double kCensored = std::numeric_limits<double>::infinity();

// First time the block count of the n-sample drops to m or below, simulated
// on the block-counting chain. Returns kCensored if it exceeds `horizon`.
double sample_absorption_time(const MergeKernel& kernel, int n, int m,
                              double horizon, Stream& clock, Stream& choice);

// Block count at time t of the chain started from n blocks.
int sample_block_count(const MergeKernel& kernel, int n, double t,
                       Stream& clock, Stream& choice);

}  // namespace lfv

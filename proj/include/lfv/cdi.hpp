#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfv/coalescent.hpp"
#include "lfv/measures.hpp"

namespace lfv {

// ---------------------------------------------------------------------------
// Coming down from infinity: series and integral tests
// ---------------------------------------------------------------------------

enum class CdiOutcome { ComesDown, StaysInfinite, Inconclusive };
enum class CdiMethod { GammaSeries, PsiIntegral };

std::string to_string(CdiOutcome outcome);
std::string to_string(CdiMethod method);

// Partial sums (or partial integrals) at increasing truncation levels.
//
// The trend statistic is a local log-exponent: writing the normalized
// increment between consecutive levels as (log L)^-q, the estimate q_hat is
// read off two neighbouring increments. Terms decaying like a power L^-p with
// p > 1 give q_hat growing like (p - 1) log L, while divergent tails such as
// 1/(L log L) or 1/L keep q_hat near 1 or below.
struct TrendEvidence {
  std::vector<double> levels;
  std::vector<double> partial;
  std::vector<double> increments;    // partial[i+1] - partial[i]
  std::vector<double> log_exponent;  // q_hat for increments i >= 1
  // Richardson-style limit assuming geometric decay of the last increments;
  // NaN when the last increment ratio is not below 1.
  double extrapolated_limit = 0.0;
};

struct TrendThresholds {
  double comes_down_min = 2.0;  // every one of the last 3 q_hat at least this
  double stays_max = 1.5;       // every one of the last 3 q_hat at most this
  double decline_slack = 0.25;  // allowed drop of q_hat across the last 3
};

struct CdiVerdict {
  CdiOutcome outcome = CdiOutcome::Inconclusive;
  CdiMethod method = CdiMethod::GammaSeries;
  TrendEvidence evidence;
};

// Needs at least 5 increasing levels (>= 3 trend estimates).
CdiVerdict classify_trend(CdiMethod method, std::vector<double> levels,
                          std::vector<double> partial,
                          const TrendThresholds& thresholds = {});

// Partial sums of 1/gamma_n at the given truncation levels, gamma_n read from
// the table. Throws AtomAtOne or OutOfRange.
CdiVerdict cdi_gamma_series(const RateTable& table, const std::vector<int>& levels);
// Same, with gamma_n computed by one integral per n (no table size limit).
CdiVerdict cdi_gamma_series(const LambdaMeasure& measure, const std::vector<int>& levels,
                            double tol = kDefaultTol);

// psi(q) = int (e^{-qx} - 1 + qx) x^-2 Lambda(dx); the atom at 0 contributes
// atom0 q^2 / 2.
double psi(const LambdaMeasure& measure, double q, double tol = kDefaultTol);

// Partial integrals of 1/psi over [a, Q] for Q in the grid. Throws AtomAtOne
// or DivisionNearZero.
CdiVerdict cdi_psi_integral(const LambdaMeasure& measure, double a,
                            const std::vector<double>& q_max_grid,
                            double tol = kDefaultTol);

struct CdiComparison {
  CdiVerdict gamma;
  CdiVerdict psi;
  // Both criteria are equivalent; they must agree unless one is Inconclusive.
  bool agree = false;
};

CdiComparison cdi_compare(const LambdaMeasure& measure, const std::vector<int>& levels,
                          double a, const std::vector<double>& q_max_grid,
                          double tol = kDefaultTol);

std::vector<int> default_gamma_levels();
std::vector<double> default_psi_grid();

// ---------------------------------------------------------------------------
// Block-counting chain absorbed at m
// ---------------------------------------------------------------------------

class BlockChainRates {
 public:
  int m() const noexcept { return m_; }
  int max_blocks() const noexcept { return max_blocks_; }
  // Rate of the jump b -> k, m <= k <= b - 1.
  double transition(int b, int k) const;
  // Sum of transition(b, k) over k; equals lambda_b.
  double total(int b) const;
  // gamma_{b,m}: rate at which the absorbed chain decreases from b.
  double decrease(int b) const;

 private:
  friend BlockChainRates block_chain_rates(const RateTable&, int);
  int m_ = 0;
  int max_blocks_ = 0;
  std::vector<std::vector<double>> mu_;  // mu_[b][k]
  std::vector<double> totals_;
  std::vector<double> gamma_;
};

// Throws OutOfRange unless 2 <= m < B, InvariantViolation if the certified
// identities fail.
BlockChainRates block_chain_rates(const RateTable& table, int m);

// ---------------------------------------------------------------------------
// T_m estimation and bounds
// ---------------------------------------------------------------------------

struct TmEstimate {
  int n = 0;
  int m = 0;
  int replicates = 0;
  double horizon = 0.0;
  double mean = 0.0;    // over uncensored replicates
  double std_error = 0.0;
  double censored_fraction = 0.0;
  double bound_gamma = 0.0;   // sum_{b=m+1}^n 1/gamma_{b,m}
  double bound_lambda = 0.0;  // sum_{b=m+1}^n 1/lambda_b
};

// Monte Carlo of the first time the n-sample has at most m blocks. A
// nonpositive horizon selects 10 times the lambda bound. Throws OutOfRange or
// AllCensored.
TmEstimate estimate_Tm(const RateTable& table, int m, int n, double horizon,
                       int replicates, std::uint64_t seed);

enum class ConditionKind { A, B };
enum class Boundedness { Bounded, Unbounded, Inconclusive };

std::string to_string(Boundedness verdict);

struct ConditionRow {
  int m = 0;
  double partial_sum = 0.0;      // sum_{b=m+1}^B 1/rate_b
  double scaled = 0.0;           // m^alpha * partial_sum
  double tail_estimate = 0.0;    // power-law estimate of sum_{b>B}; inf if not summable
  double scaled_with_tail = 0.0;
};

struct ConditionReport {
  ConditionKind kind = ConditionKind::A;
  double alpha = 0.0;
  std::vector<ConditionRow> rows;
  Boundedness verdict = Boundedness::Inconclusive;
};

// Condition A uses lambda_b, Condition B uses gamma_{b,m}. Verdict: Bounded
// when the scaled sums never grow by more than 10% between consecutive grid
// points, Unbounded when the last two steps both grow by more than 10%.
ConditionReport check_condition(const RateTable& table, double alpha,
                                const std::vector<int>& m_grid,
                                ConditionKind kind = ConditionKind::A);

struct UrnRow {
  double t = 0.0;
  double survival_chain = 0.0;  // P(T^n_m >= t)
  double survival_urn = 0.0;    // P(sum of independent Exp(lambda_i) >= t)
  double std_error = 0.0;
  bool holds = false;
};

struct UrnReport {
  int n = 0;
  int m = 0;
  int replicates = 0;
  std::vector<UrnRow> rows;
  bool dominance_holds = false;
};

UrnReport urn_dominance_check(const RateTable& table, int n, int m, int replicates,
                              const std::vector<double>& t_grid, std::uint64_t seed);

}  // namespace lfv

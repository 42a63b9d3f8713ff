#include "lfv/cdi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lfv/errors.hpp"
#include "lfv/parallel.hpp"

namespace lfv {

std::string to_string(CdiOutcome outcome) {
  switch (outcome) {
    case CdiOutcome::ComesDown: return "ComesDown";
    case CdiOutcome::StaysInfinite: return "StaysInfinite";
    case CdiOutcome::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(CdiMethod method) {
  return method == CdiMethod::GammaSeries ? "gamma" : "psi";
}

std::string to_string(Boundedness verdict) {
  switch (verdict) {
    case Boundedness::Bounded: return "Bounded";
    case Boundedness::Unbounded: return "Unbounded";
    case Boundedness::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

CdiVerdict classify_trend(CdiMethod method, std::vector<double> levels,
                          std::vector<double> partial,
                          const TrendThresholds& thresholds) {
  if (levels.size() != partial.size()) {
    throw DomainError("levels and partial sums differ in length");
  }
  if (levels.size() < 5) {
    throw OutOfRange("trend classification needs at least 5 truncation levels");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 1.0) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw OutOfRange("truncation levels must be increasing and above 1");
    }
  }
  CdiVerdict verdict;
  verdict.method = method;
  TrendEvidence& ev = verdict.evidence;
  ev.levels = std::move(levels);
  ev.partial = std::move(partial);
  const std::size_t count = ev.levels.size();

  std::vector<double> normalized;
  std::vector<double> midpoint_log;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const double inc = ev.partial[i + 1] - ev.partial[i];
    ev.increments.push_back(inc);
    normalized.push_back(inc / std::log(ev.levels[i + 1] / ev.levels[i]));
    midpoint_log.push_back(0.5 * (std::log(ev.levels[i]) + std::log(ev.levels[i + 1])));
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < normalized.size(); ++i) {
    const double prev = normalized[i - 1];
    const double cur = normalized[i];
    double q;
    if (cur <= 0.0 && prev > 0.0) {
      q = kInf;  // increments vanished: faster than any power
    } else if (prev <= 0.0) {
      q = cur <= 0.0 ? kInf : -kInf;
    } else {
      q = -std::log(cur / prev) / std::log(midpoint_log[i] / midpoint_log[i - 1]);
    }
    ev.log_exponent.push_back(q);
  }

  const double last_inc = ev.increments.back();
  const double prev_inc = ev.increments[ev.increments.size() - 2];
  const double ratio = prev_inc > 0.0 ? last_inc / prev_inc : kInf;
  ev.extrapolated_limit = (ratio >= 0.0 && ratio < 1.0)
                              ? ev.partial.back() + last_inc * ratio / (1.0 - ratio)
                              : std::numeric_limits<double>::quiet_NaN();

  const auto& q = ev.log_exponent;
  const std::size_t s = q.size();
  const double q_first = q[s - 3];
  const double q_last = q[s - 1];
  const double q_min = std::min({q[s - 3], q[s - 2], q[s - 1]});
  const double q_max = std::max({q[s - 3], q[s - 2], q[s - 1]});
  if (q_min >= thresholds.comes_down_min &&
      q_last >= q_first - thresholds.decline_slack) {
    verdict.outcome = CdiOutcome::ComesDown;
  } else if (q_max <= thresholds.stays_max) {
    verdict.outcome = CdiOutcome::StaysInfinite;
  } else {
    verdict.outcome = CdiOutcome::Inconclusive;
  }
  return verdict;
}

namespace {

void check_levels(const std::vector<int>& levels) {
  if (levels.empty()) throw OutOfRange("no truncation levels given");
  if (!std::is_sorted(levels.begin(), levels.end()) || levels.front() < 2) {
    throw OutOfRange("truncation levels must be sorted and at least 2");
  }
}

template <class Gamma>
CdiVerdict gamma_series_from(const std::vector<int>& levels, Gamma gamma) {
  check_levels(levels);
  std::vector<double> lv;
  std::vector<double> partial;
  double sum = 0.0;
  int n = 2;
  for (int level : levels) {
    for (; n <= level; ++n) {
      const double g = gamma(n);
      if (!(g > 0.0)) throw DivisionNearZero("gamma_n vanishes; the measure is zero");
      sum += 1.0 / g;
    }
    lv.push_back(level);
    partial.push_back(sum);
  }
  return classify_trend(CdiMethod::GammaSeries, std::move(lv), std::move(partial));
}

}  // namespace

CdiVerdict cdi_gamma_series(const RateTable& table, const std::vector<int>& levels) {
  if (table.atom1() > 0.0) throw AtomAtOne("measure has an atom at 1");
  check_levels(levels);
  if (levels.back() > table.max_blocks()) {
    throw OutOfRange("truncation level exceeds rate table size");
  }
  return gamma_series_from(levels, [&](int n) { return decrease_rate(table, n); });
}

CdiVerdict cdi_gamma_series(const LambdaMeasure& measure, const std::vector<int>& levels,
                            double tol) {
  if (measure.atom1() > 0.0) throw AtomAtOne("measure has an atom at 1");
  return gamma_series_from(
      levels, [&](int n) { return decrease_rate_integral(measure, n, tol); });
}

double psi(const LambdaMeasure& measure, double q, double tol) {
  if (!(q > 0.0)) throw DomainError("psi needs q > 0");
  // (e^{-qx} - 1 + qx) / x^2, by its Taylor series where qx is small.
  auto f = [q](double x, double) {
    const double y = q * x;
    if (y < 0.1) {
      double term = 0.5 * q * q;  // j = 2
      double sum = term;
      for (int j = 3; j < 30; ++j) {
        term *= -y / j;
        sum += term;
        if (std::abs(term) < 1e-18 * sum) break;
      }
      return sum;
    }
    return (std::expm1(-y) + y) / (x * x);
  };
  double value = measure.atom0() * 0.5 * q * q;
  if (measure.atom1() > 0.0) value += measure.atom1() * f(1.0, 0.0);
  QuadratureOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 1e-12;
  value += density_integral(measure, f, opts).value;
  return value;
}

CdiVerdict cdi_psi_integral(const LambdaMeasure& measure, double a,
                            const std::vector<double>& q_max_grid, double tol) {
  if (!(a > 0.0)) throw DomainError("psi integral needs a > 0");
  if (measure.atom1() > 0.0) throw AtomAtOne("measure has an atom at 1");
  if (q_max_grid.empty() || !std::is_sorted(q_max_grid.begin(), q_max_grid.end()) ||
      !(q_max_grid.front() > a)) {
    throw OutOfRange("q grid must be sorted and above a");
  }
  auto inv_psi = [&](double q) {
    const double p = psi(measure, q, tol * 1e-3);
    if (!(p > 0.0)) throw DivisionNearZero("psi vanishes on the integration range");
    return 1.0 / p;
  };
  QuadratureOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 1e-10;
  std::vector<double> partial;
  double sum = 0.0;
  double lo = a;
  for (double q_max : q_max_grid) {
    sum += integrate_interval(inv_psi, lo, q_max, opts, true).value;
    partial.push_back(sum);
    lo = q_max;
  }
  return classify_trend(CdiMethod::PsiIntegral, q_max_grid, std::move(partial));
}

CdiComparison cdi_compare(const LambdaMeasure& measure, const std::vector<int>& levels,
                          double a, const std::vector<double>& q_max_grid, double tol) {
  CdiComparison c;
  c.gamma = cdi_gamma_series(measure, levels, tol);
  c.psi = cdi_psi_integral(measure, a, q_max_grid, tol);
  c.agree = c.gamma.outcome == c.psi.outcome ||
            c.gamma.outcome == CdiOutcome::Inconclusive ||
            c.psi.outcome == CdiOutcome::Inconclusive;
  return c;
}

std::vector<int> default_gamma_levels() {
  std::vector<int> levels;
  for (int j = 4; j <= 12; ++j) levels.push_back(1 << j);
  return levels;
}

std::vector<double> default_psi_grid() {
  std::vector<double> grid;
  for (int j = 2; j <= 40; j += 2) grid.push_back(std::ldexp(1.0, j));
  return grid;
}

// ---------------------------------------------------------------------------

double BlockChainRates::transition(int b, int k) const {
  if (b <= m_ || b > max_blocks_ || k < m_ || k >= b) {
    throw OutOfRange("block-chain transition index out of range");
  }
  return mu_[b][k - m_];
}

double BlockChainRates::total(int b) const {
  if (b <= m_ || b > max_blocks_) throw OutOfRange("block count out of range");
  return totals_[b];
}

double BlockChainRates::decrease(int b) const {
  if (b <= m_ || b > max_blocks_) throw OutOfRange("block count out of range");
  return gamma_[b];
}

BlockChainRates block_chain_rates(const RateTable& table, int m) {
  if (m < 2 || m >= table.max_blocks()) {
    throw OutOfRange("absorption level must satisfy 2 <= m < B");
  }
  BlockChainRates r;
  r.m_ = m;
  r.max_blocks_ = table.max_blocks();
  const auto size = static_cast<std::size_t>(r.max_blocks_) + 1;
  r.mu_.resize(size);
  r.totals_.assign(size, 0.0);
  r.gamma_.assign(size, 0.0);
  for (int b = m + 1; b <= r.max_blocks_; ++b) {
    std::vector<double> mu(static_cast<std::size_t>(b - m), 0.0);  // index k - m
    double gamma = 0.0;
    for (int k = 2; k <= b; ++k) {
      const double w = weighted_binomial(b, k, table(b, k));
      const int target = std::max(b - k + 1, m);
      mu[target - m] += w;
      gamma += static_cast<double>(b - target) * w;
    }
    double total = 0.0;
    for (double v : mu) total += v;
    const double lambda_b = total_rate(table, b);
    const double slack = std::max(3.0 * table.tol(), 1e-12 * lambda_b);
    if (std::abs(total - lambda_b) > slack) {
      throw InvariantViolation("block-chain rates do not sum to lambda_b");
    }
    if (gamma < lambda_b - slack) {
      throw InvariantViolation("gamma_{b,m} fell below lambda_b");
    }
    r.mu_[b] = std::move(mu);
    r.totals_[b] = total;
    r.gamma_[b] = gamma;
  }
  return r;
}

// ---------------------------------------------------------------------------

TmEstimate estimate_Tm(const RateTable& table, int m, int n, double horizon,
                       int replicates, std::uint64_t seed) {
  if (m < 1 || m > n || n > table.max_blocks() || n < 2) {
    throw OutOfRange("T_m estimation needs 1 <= m <= n <= B");
  }
  if (replicates < 2) throw OutOfRange("T_m estimation needs at least 2 replicates");
  TmEstimate est;
  est.n = n;
  est.m = m;
  est.replicates = replicates;
  if (m == n) {
    est.horizon = horizon;
    return est;
  }
  if (m >= 2) {
    const BlockChainRates chain = block_chain_rates(table, m);
    for (int b = m + 1; b <= n; ++b) est.bound_gamma += 1.0 / chain.decrease(b);
  } else {
    est.bound_gamma = std::numeric_limits<double>::quiet_NaN();
  }
  for (int b = m + 1; b <= n; ++b) est.bound_lambda += 1.0 / total_rate(table, b);
  est.horizon = horizon > 0.0 ? horizon : 10.0 * est.bound_lambda;

  const MergeKernel kernel(table, n);
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  parallel_for(samples.size(), [&](std::size_t r) {
    Stream clock = stream_for(seed, r, StreamRole::CoalescentClock);
    Stream choice = stream_for(seed, r, StreamRole::SubsetChoice);
    samples[r] = sample_absorption_time(kernel, n, m, est.horizon, clock, choice);
  });

  double sum = 0.0;
  double sum_sq = 0.0;
  int kept = 0;
  for (double t : samples) {
    if (t == kCensored) continue;
    sum += t;
    sum_sq += t * t;
    ++kept;
  }
  est.censored_fraction = 1.0 - static_cast<double>(kept) / replicates;
  if (kept == 0) throw AllCensored("every replicate reached the horizon");
  est.mean = sum / kept;
  if (kept > 1) {
    const double var = std::max(0.0, (sum_sq - kept * est.mean * est.mean) / (kept - 1));
    est.std_error = std::sqrt(var / kept);
  }
  return est;
}

ConditionReport check_condition(const RateTable& table, double alpha,
                                const std::vector<int>& m_grid, ConditionKind kind) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (m_grid.size() < 2 || !std::is_sorted(m_grid.begin(), m_grid.end())) {
    throw OutOfRange("m grid must hold at least two increasing values");
  }
  const int B = table.max_blocks();
  if (m_grid.front() < 2 || m_grid.back() >= B / 2) {
    throw OutOfRange("m grid must lie in [2, B/2)");
  }
  ConditionReport report;
  report.kind = kind;
  report.alpha = alpha;
  std::vector<double> lambda(static_cast<std::size_t>(B) + 1, 0.0);
  for (int b = 2; b <= B; ++b) lambda[b] = total_rate(table, b);

  for (int m : m_grid) {
    std::vector<double> rate(static_cast<std::size_t>(B) + 1, 0.0);
    if (kind == ConditionKind::A) {
      rate = lambda;
    } else {
      const BlockChainRates chain = block_chain_rates(table, m);
      for (int b = m + 1; b <= B; ++b) rate[b] = chain.decrease(b);
    }
    ConditionRow row;
    row.m = m;
    for (int b = m + 1; b <= B; ++b) row.partial_sum += 1.0 / rate[b];
    // Power law fitted on the last octave, summed to infinity.
    const double r_hi = rate[B];
    const double r_lo = rate[B / 2];
    const double p = std::log(r_hi / r_lo) / std::log(static_cast<double>(B) / (B / 2));
    row.tail_estimate = p > 1.0 ? B / (r_hi * (p - 1.0))
                                : std::numeric_limits<double>::infinity();
    const double scale = std::pow(static_cast<double>(m), alpha);
    row.scaled = scale * row.partial_sum;
    row.scaled_with_tail = scale * (row.partial_sum + row.tail_estimate);
    report.rows.push_back(row);
  }

  const auto& rows = report.rows;
  bool all_flat = true;
  int growth_steps_at_end = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].scaled_with_tail;
    const double cur = rows[i].scaled_with_tail;
    const bool grows = !(cur <= 1.1 * prev);
    if (grows) {
      all_flat = false;
      ++growth_steps_at_end;
    } else {
      growth_steps_at_end = 0;
    }
  }
  if (all_flat && std::isfinite(rows.back().scaled_with_tail)) {
    report.verdict = Boundedness::Bounded;
  } else if (growth_steps_at_end >= 2 || (rows.size() == 2 && growth_steps_at_end == 1)) {
    report.verdict = Boundedness::Unbounded;
  } else {
    report.verdict = Boundedness::Inconclusive;
  }
  return report;
}

UrnReport urn_dominance_check(const RateTable& table, int n, int m, int replicates,
                              const std::vector<double>& t_grid, std::uint64_t seed) {
  if (m < 1 || m >= n || n > table.max_blocks()) {
    throw OutOfRange("urn check needs 1 <= m < n <= B");
  }
  if (replicates < 2) throw OutOfRange("urn check needs at least 2 replicates");
  const MergeKernel kernel(table, n);
  std::vector<double> lambda(static_cast<std::size_t>(n) + 1, 0.0);
  for (int b = 2; b <= n; ++b) lambda[b] = kernel.rate(b);

  const auto count = static_cast<std::size_t>(replicates);
  std::vector<double> chain(count);
  std::vector<double> urn(count);
  parallel_for(count, [&](std::size_t r) {
    Stream clock = stream_for(seed, r, StreamRole::CoalescentClock);
    Stream choice = stream_for(seed, r, StreamRole::SubsetChoice);
    chain[r] = sample_absorption_time(kernel, n, m, kCensored, clock, choice);
    Stream cmp = stream_for(seed, r, StreamRole::Comparison);
    double s = 0.0;
    for (int i = m + 1; i <= n; ++i) {
      s += lambda[i] > 0.0 ? exponential(cmp, lambda[i]) : kCensored;
    }
    urn[r] = s;
  });

  UrnReport report;
  report.n = n;
  report.m = m;
  report.replicates = replicates;
  report.dominance_holds = true;
  for (double t : t_grid) {
    UrnRow row;
    row.t = t;
    const auto survive = [t](double v) { return v >= t; };
    row.survival_chain =
        static_cast<double>(std::count_if(chain.begin(), chain.end(), survive)) / replicates;
    row.survival_urn =
        static_cast<double>(std::count_if(urn.begin(), urn.end(), survive)) / replicates;
    row.std_error = std::sqrt(
        (row.survival_chain * (1.0 - row.survival_chain) +
         row.survival_urn * (1.0 - row.survival_urn)) / replicates);
    row.holds = row.survival_chain <= row.survival_urn + 3.0 * row.std_error;
    report.dominance_holds = report.dominance_holds && row.holds;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace lfv

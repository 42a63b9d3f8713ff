#include "lfv/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lfv/errors.hpp"

namespace lfv {

namespace {

constexpr int kExactBinomialLimit = 60;

void check_block_range(const RateTable& table, int n) {
  if (n < 2 || n > table.max_blocks()) {
    std::ostringstream os;
    os << "block count " << n << " outside [2, " << table.max_blocks() << "]";
    throw OutOfRange(os.str());
  }
}

// sum_{k>=2} weight(k) C(n,k) x^(k-2) (1-x)^(n-k), summed term by term; used
// where n x is small so the closed forms would cancel.
template <class Weight>
double binomial_tail_series(int n, double x, double u, Weight weight) {
  // term_k = C(n,k) x^(k-2) u^(n-k)
  double term = 0.5 * n * (n - 1.0) * std::pow(u, n - 2);
  double sum = 0.0;
  for (int k = 2; k <= n; ++k) {
    const double contrib = weight(k) * term;
    sum += contrib;
    if (k > 3 && std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    if (k < n) term *= (static_cast<double>(n - k) / (k + 1)) * (x / u);
    if (term == 0.0) break;
  }
  return sum;
}

}  // namespace

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > kExactBinomialLimit) return std::exp(log_binomial(n, k));
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

double weighted_binomial(int b, int k, double rate) {
  if (rate == 0.0) return 0.0;
  if (b <= kExactBinomialLimit) return binomial(b, k) * rate;
  return std::exp(log_binomial(b, k) + std::log(rate));
}

double RateTable::operator()(int b, int k) const {
  if (b < 2 || b > max_blocks_ || k < 2 || k > b) {
    std::ostringstream os;
    os << "rate index (" << b << "," << k << ") outside table of size " << max_blocks_;
    throw OutOfRange(os.str());
  }
  return rows_[b][k];
}

double RateTable::consistency_defect() const {
  double worst = 0.0;
  for (int b = 2; b < max_blocks_; ++b) {
    for (int k = 2; k <= b; ++k) {
      worst = std::max(worst, std::abs(rows_[b][k] - rows_[b + 1][k] - rows_[b + 1][k + 1]));
    }
  }
  return worst;
}

std::vector<double> rate_row(const LambdaMeasure& measure, int b, double tol,
                             RateMethod method) {
  if (b < 2) throw OutOfRange("rate rows start at b = 2");
  std::vector<double> row(static_cast<std::size_t>(b) + 1, 0.0);
  for (int k = 2; k <= b; ++k) {
    double value = 0.0;
    if (k == 2) value += measure.atom0();
    if (k == b) value += measure.atom1();
    std::optional<double> closed;
    if (method == RateMethod::Auto) {
      closed = measure.density_power_moment(k - 2.0, static_cast<double>(b - k));
    }
    if (closed) {
      value += *closed;
    } else if (measure.has_density()) {
      QuadratureOptions opts;
      opts.abs_tol = tol;
      const int a = k - 2;
      const int c = b - k;
      value += density_integral(
                   measure,
                   [a, c](double x, double u) {
                     return std::pow(x, a) * std::pow(u, c);
                   },
                   opts)
                   .value;
    }
    row[k] = value;
  }
  return row;
}

RateTable build_rate_table(const LambdaMeasure& measure, int max_blocks, double tol,
                           RateMethod method) {
  if (max_blocks < 2) throw OutOfRange("rate table needs B >= 2");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  RateTable table;
  table.max_blocks_ = max_blocks;
  table.tol_ = tol;
  table.atom0_ = measure.atom0();
  table.atom1_ = measure.atom1();
  table.rows_.resize(static_cast<std::size_t>(max_blocks) + 1);
  for (int b = 2; b <= max_blocks; ++b) {
    table.rows_[b] = rate_row(measure, b, tol, method);
  }
  // The closed forms carry lgamma round-off of order 1e-15 relative, which is
  // far inside 3 tol for every supported size.
  const double defect = table.consistency_defect();
  if (defect > 3.0 * tol) {
    std::ostringstream os;
    os << "rate table violates consistency: defect " << defect << " > 3 tol";
    throw InvariantViolation(os.str());
  }
  return table;
}

double total_rate(const RateTable& table, int n) {
  check_block_range(table, n);
  double sum = 0.0;
  for (int k = 2; k <= n; ++k) sum += weighted_binomial(n, k, table(n, k));
  return sum;
}

double decrease_rate(const RateTable& table, int n) {
  check_block_range(table, n);
  double sum = 0.0;
  for (int k = 2; k <= n; ++k) sum += (k - 1) * weighted_binomial(n, k, table(n, k));
  return sum;
}

namespace {

template <class Series, class Direct>
double block_rate_integral(const LambdaMeasure& measure, int n, double tol,
                           Series series, Direct direct) {
  if (n < 2) throw OutOfRange("block rates need n >= 2");
  auto f = [n, series, direct](double x, double u) {
    if (n * x <= 2.0) return series(x, u);
    return direct(x, u);
  };
  double value = 0.0;
  if (measure.atom0() > 0.0) value += measure.atom0() * f(0.0, 1.0);
  if (measure.atom1() > 0.0) value += measure.atom1() * f(1.0, 0.0);
  QuadratureOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 1e-12;
  value += density_integral(measure, f, opts).value;
  return value;
}

}  // namespace

double total_rate_integral(const LambdaMeasure& measure, int n, double tol) {
  return block_rate_integral(
      measure, n, tol,
      [n](double x, double u) {
        return binomial_tail_series(n, x, u, [](int) { return 1.0; });
      },
      [n](double x, double u) {
        const double un1 = std::pow(u, n - 1);
        return (1.0 - u * un1 - n * x * un1) / (x * x);
      });
}

double decrease_rate_integral(const LambdaMeasure& measure, int n, double tol) {
  return block_rate_integral(
      measure, n, tol,
      [n](double x, double u) {
        return binomial_tail_series(n, x, u, [](int k) { return k - 1.0; });
      },
      [n](double x, double u) {
        return (n * x - 1.0 + std::pow(u, n)) / (x * x);
      });
}

MergeKernel::MergeKernel(const RateTable& table, int max_blocks)
    : max_blocks_(max_blocks) {
  if (max_blocks < 2 || max_blocks > table.max_blocks()) {
    throw OutOfRange("merge kernel size must lie within the rate table");
  }
  rates_.assign(static_cast<std::size_t>(max_blocks) + 1, 0.0);
  cumulative_.resize(static_cast<std::size_t>(max_blocks) + 1);
  for (int b = 2; b <= max_blocks; ++b) {
    std::vector<double> c(static_cast<std::size_t>(b) + 1, 0.0);
    double acc = 0.0;
    for (int k = 2; k <= b; ++k) {
      acc += weighted_binomial(b, k, table(b, k));
      c[k] = acc;
    }
    rates_[b] = acc;
    if (acc > 0.0) {
      for (double& v : c) v /= acc;
      c[b] = 1.0;
    }
    cumulative_[b] = std::move(c);
  }
}

double MergeKernel::probability(int b, int k) const {
  if (b < 2 || b > max_blocks_ || k < 2 || k > b) return 0.0;
  const auto& c = cumulative_[b];
  return c[k] - c[k - 1];
}

int MergeKernel::sample_merge_size(int b, Stream& rng) const {
  const auto& c = cumulative_.at(b);
  const double u = rng.uniform_open();
  auto it = std::lower_bound(c.begin() + 2, c.end(), u);
  if (it == c.end()) --it;
  // Skip zero-probability sizes that share a cumulative value.
  int k = static_cast<int>(it - c.begin());
  while (k > 2 && c[k] == c[k - 1]) --k;
  return k;
}

CoalescentPath simulate_coalescent(const RateTable& table, int n, double horizon,
                                   std::uint64_t seed, std::uint64_t replicate) {
  check_block_range(table, n);
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const MergeKernel kernel(table, n);
  Stream clock = stream_for(seed, replicate, StreamRole::CoalescentClock);
  Stream choice = stream_for(seed, replicate, StreamRole::SubsetChoice);

  CoalescentPath path;
  path.initial = OrderedPartition::singletons(n);
  path.horizon = horizon;
  OrderedPartition current = path.initial;
  double t = 0.0;
  std::vector<int> chosen;
  while (current.block_count() > 1) {
    const int b = current.block_count();
    const double rate = kernel.rate(b);
    if (rate <= 0.0) {
      path.degenerate = true;
      break;
    }
    t += exponential(clock, rate);
    if (t > horizon) break;
    const int k = kernel.sample_merge_size(b, choice);
    // Floyd's algorithm: uniform k-subset of {0..b-1}.
    chosen.clear();
    for (int j = b - k; j < b; ++j) {
      const int r = static_cast<int>(uniform_index(choice, static_cast<std::uint64_t>(j) + 1));
      if (std::find(chosen.begin(), chosen.end(), r) == chosen.end()) {
        chosen.push_back(r);
      } else {
        chosen.push_back(j);
      }
    }
    std::sort(chosen.begin(), chosen.end());
    current.merge(chosen);
    path.events.push_back(CoalescentEvent{t, chosen, current});
  }
  return path;
}

OrderedPartition partition_at(const CoalescentPath& path, double t) {
  const OrderedPartition* p = &path.initial;
  for (const auto& e : path.events) {
    if (e.time > t) break;
    p = &e.after;
  }
  return *p;
}

BlockCountPath::BlockCountPath(const CoalescentPath& path)
    : initial_(path.initial.block_count()) {
  for (const auto& e : path.events) jumps_.emplace_back(e.time, e.after.block_count());
}

BlockCountPath::BlockCountPath(int initial, std::vector<std::pair<double, int>> jumps)
    : initial_(initial), jumps_(std::move(jumps)) {}

int BlockCountPath::at(double t) const {
  int value = initial_;
  for (const auto& [time, count] : jumps_) {
    if (time > t) break;
    value = count;
  }
  return value;
}

BlockCountPath block_count_path(const CoalescentPath& path) {
  return BlockCountPath(path);
}

double sample_absorption_time(const MergeKernel& kernel, int n, int m,
                              double horizon, Stream& clock, Stream& choice) {
  int b = n;
  double t = 0.0;
  while (b > m) {
    const double rate = kernel.rate(b);
    if (rate <= 0.0) return kCensored;
    t += exponential(clock, rate);
    if (t > horizon) return kCensored;
    b -= kernel.sample_merge_size(b, choice) - 1;
  }
  return t;
}

int sample_block_count(const MergeKernel& kernel, int n, double t, Stream& clock,
                       Stream& choice) {
  int b = n;
  double s = 0.0;
  while (b > 1) {
    const double rate = kernel.rate(b);
    if (rate <= 0.0) break;
    s += exponential(clock, rate);
    if (s > t) break;
    b -= kernel.sample_merge_size(b, choice) - 1;
  }
  return b;
}

}  // namespace lfv

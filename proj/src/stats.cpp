#include "lfv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "lfv/errors.hpp"

namespace lfv {

double chi_square_survival(double statistic, int dof) {
  if (dof < 1) throw DomainError("chi-square needs at least one degree of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b,
                                       double min_expected) {
  if (a.size() != b.size()) throw DomainError("samples must share categories");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("empty sample in chi-square test");
  const double total = na + nb;

  // Pool sparse categories together.
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> pooled{0.0, 0.0};
  ChiSquareResult result;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double col = static_cast<double>(a[i] + b[i]);
    if (col == 0.0) continue;
    if (std::min(na, nb) * col / total < min_expected) {
      pooled.first += static_cast<double>(a[i]);
      pooled.second += static_cast<double>(b[i]);
      ++result.merged_cells;
    } else {
      cells.emplace_back(static_cast<double>(a[i]), static_cast<double>(b[i]));
    }
  }
  if (pooled.first + pooled.second > 0.0) cells.push_back(pooled);
  if (cells.size() < 2) {
    result.dof = 0;
    result.p_value = 1.0;
    return result;
  }
  for (const auto& [x, y] : cells) {
    const double col = x + y;
    const double ea = na * col / total;
    const double eb = nb * col / total;
    result.statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
  }
  result.dof = static_cast<int>(cells.size()) - 1;
  result.p_value = chi_square_survival(result.statistic, result.dof);
  return result;
}

ChiSquareResult chi_square_goodness_of_fit(const std::vector<std::int64_t>& observed,
                                           const std::vector<double>& probabilities,
                                           double min_expected) {
  if (observed.size() != probabilities.size()) throw DomainError("category count mismatch");
  double n = 0.0;
  for (auto c : observed) n += static_cast<double>(c);
  if (n == 0.0) throw DomainError("empty sample in chi-square test");
  ChiSquareResult result;
  std::vector<std::pair<double, double>> cells;  // observed, expected
  std::pair<double, double> pooled{0.0, 0.0};
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * probabilities[i];
    if (e < min_expected) {
      pooled.first += static_cast<double>(observed[i]);
      pooled.second += e;
      ++result.merged_cells;
    } else {
      cells.emplace_back(static_cast<double>(observed[i]), e);
    }
  }
  if (pooled.second > 0.0) cells.push_back(pooled);
  if (cells.size() < 2) return result;
  for (const auto& [o, e] : cells) result.statistic += (o - e) * (o - e) / e;
  result.dof = static_cast<int>(cells.size()) - 1;
  result.p_value = chi_square_survival(result.statistic, result.dof);
  return result;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 50; k += 2) sum += std::exp(-k * k * c);
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Stephens' small-sample correction.
double ks_p(double d, double en) {
  return kolmogorov_survival((std::sqrt(en) + 0.12 + 0.11 / std::sqrt(en)) * d);
}

}  // namespace

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("empty sample in KS test");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  KsResult r;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    r.statistic = std::max({r.statistic, (i + 1) / n - f, f - i / n});
  }
  r.p_value = ks_p(r.statistic, n);
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("empty sample in KS test");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  KsResult r;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    r.statistic = std::max(r.statistic, std::abs(i / na - j / nb));
  }
  r.p_value = ks_p(r.statistic, na * nb / (na + nb));
  return r;
}

MeanEstimate mean_with_error(const std::vector<double>& values) {
  MeanEstimate m;
  m.count = values.size();
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                            static_cast<double>(values.size()));
  }
  return m;
}

}  // namespace lfv

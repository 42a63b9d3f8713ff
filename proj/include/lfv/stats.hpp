#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lfv {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int merged_cells = 0;  // cells pooled because the expected count was small
};

// Two-sample homogeneity test on category counts. Categories whose pooled
// expected count falls below min_expected are merged into one cell.
ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b,
                                       double min_expected = 5.0);

// Goodness of fit of observed counts against probabilities summing to 1.
ChiSquareResult chi_square_goodness_of_fit(const std::vector<std::int64_t>& observed,
                                           const std::vector<double>& probabilities,
                                           double min_expected = 5.0);

double chi_square_survival(double statistic, int dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov distribution P(K > lambda).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanEstimate mean_with_error(const std::vector<double>& values);

}  // namespace lfv

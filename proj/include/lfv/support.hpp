#pragma once

#include <cstdint>
#include <vector>

#include "lfv/lookdown.hpp"

namespace lfv {

// h(t) = sqrt(t log(1/t)) on (0, 1).
double modulus_h(double t);

// The two series in the envelope constant, summed until terms drop below 1e-12.
double envelope_series_l();  // sum_{l>=1} sqrt(2^{-2l+1} l)
double envelope_series_k();  // sum_{k>=1} sqrt(2^{-k+1} k)

// C1 pinned 1e-6 above sqrt(2d(3/alpha + 1)).
double theory_c1(int d, double alpha);
double theory_constant(int d, double alpha);

struct ModulusPair {
  double r = 0.0;
  double s = 0.0;
  double max_ratio = 0.0;  // over replicates
};

struct ModulusScale {
  int depth = 0;
  double delta = 0.0;
  double h = 0.0;
  double c_hat = 0.0;                  // max over pairs and replicates
  std::vector<double> per_replicate;   // max over pairs, one per trajectory
  double pass_fraction = 0.0;          // replicates with ratio <= c_theory
  bool pass = false;
};

struct ModulusReport {
  int d = 0;
  double alpha = 0.0;
  double c1 = 0.0;
  double c_theory = 0.0;
  double required_fraction = 0.95;
  std::vector<ModulusScale> scales;    // coarse to fine
  std::vector<ModulusPair> pairs;
  bool below_theory = false;           // every scale passes
  bool bounded_trend = false;
};

// Dyadic times k 2^{-depth} in [0, T]; trajectories must observe all of them.
std::vector<double> dyadic_grid(double horizon, int depth);

// Depths m with min_depth <= m <= grid_depth and 2^{-m} <= min(1/e, T).
// Throws GridTooCoarse when fewer than 3 remain.
std::vector<int> modulus_depths(int grid_depth, int min_depth, double horizon);

// Ratios H(r, r + 2^{-m}) / h(2^{-m}) of one trajectory, r on the depth grid;
// indexed [scale][pair start].
struct ModulusSample {
  std::vector<std::vector<double>> ratios;
};

ModulusSample modulus_sample(const LookdownTrajectory& trajectory, int grid_depth,
                             int min_depth = 2);

ModulusReport modulus_report(const std::vector<ModulusSample>& samples, int d,
                             double horizon, int grid_depth, double alpha,
                             int min_depth = 2, double required_fraction = 0.95);

ModulusReport modulus_envelope(const std::vector<LookdownTrajectory>& trajectories,
                               int grid_depth, double alpha, int min_depth = 2,
                               double required_fraction = 0.95);

struct GrowthRow {
  double dt = 0.0;
  double h = 0.0;
  std::vector<double> required_c;      // per replicate
  double max_required = 0.0;
  double pass_fraction = 0.0;
};

struct GrowthReport {
  double t = 0.0;
  double c_theory = 0.0;
  std::vector<GrowthRow> rows;
  double bounded_fraction = 0.0;       // replicates bounded on every dt
};

// Smallest c per dt such that every particle at t + dt lies within c h(dt) of
// the time-t cloud.
std::vector<double> growth_required(const LookdownTrajectory& trajectory, double t,
                                    const std::vector<double>& dt_grid);

GrowthReport growth_report(const std::vector<std::vector<double>>& required, double t,
                           const std::vector<double>& dt_grid, int d, double alpha);

GrowthReport support_growth_check(const std::vector<LookdownTrajectory>& trajectories,
                                  double t, const std::vector<double>& dt_grid,
                                  double alpha);

struct DimensionEstimate {
  std::vector<double> scales;          // decreasing
  std::vector<std::int64_t> counts;
  double slope = 0.0;
  double raw_slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool degenerate = false;
};

// Scales are absolute box sides; boxes are anchored at the cloud's minimum corner.
DimensionEstimate box_counting_dimension(const PointCloud& cloud,
                                         const std::vector<double>& scales,
                                         double confidence = 0.95);

// Box sides diameter * 2^{-k} for k in [k_min, k_max].
std::vector<double> relative_scales(const PointCloud& cloud, int k_min, int k_max);

std::vector<double> range_snapshot_times(double t0, double t1, int snapshot_count);

PointCloud range_union(const LookdownTrajectory& trajectory, double t0, double t1,
                       int snapshot_count, std::uint64_t replicate = 0);

struct RadiusRow {
  double t = 0.0;
  double h = 0.0;
  std::vector<double> ratio;           // sup_{u<=t} r(u) / h(t), per replicate
  double max_ratio = 0.0;
};

struct RadiusReport {
  double c_theory = 0.0;
  std::vector<RadiusRow> rows;         // in the order of the t grid
  std::vector<bool> bounded;           // per replicate
  double bounded_fraction = 0.0;
};

// sup_{u<=t} r(u) / h(t) for each t in the grid.
std::vector<double> radius_ratios(const LookdownTrajectory& trajectory,
                                  const std::vector<double>& t_grid);

RadiusReport radius_report(const std::vector<std::vector<double>>& ratios,
                           const std::vector<double>& t_grid, int d, double alpha);

RadiusReport radius_profile(const std::vector<LookdownTrajectory>& trajectories,
                            const std::vector<double>& t_grid, double alpha);

struct LocalMassReport {
  std::vector<double> radii;
  double exponent = 0.0;
  std::vector<std::size_t> sampled;            // point indices
  std::vector<std::vector<double>> proxy;      // [sample][radius]
  std::vector<double> limsup_proxy;            // per sample
  double positive_fraction = 0.0;
  double increasing_fraction = 0.0;            // proxy at smallest r above largest r
};

LocalMassReport local_mass_profile(const PointCloud& cloud, const std::vector<double>& radii,
                                   double exponent, std::size_t sample_count = 200);

struct AncestorCountRow {
  int depth = 0;
  int max_count = 0;
  double bound = 0.0;
  bool below = false;
};

// Ancestors at (k-1)2^{-depth} of the population at k 2^{-depth}, max over k.
AncestorCountRow ancestor_count_check(const LookdownTrajectory& trajectory, int depth,
                                      double alpha);

// sqrt(8 d^3 t / pi) / x * exp(-x^2 / (2 d t)); the clamped form caps it at 1.
double brownian_tail_bound_raw(int d, double t, double x);
double brownian_tail_bound(int d, double t, double x);

struct TailEstimate {
  int d = 0;
  double t = 0.0;
  double x = 0.0;
  std::int64_t paths = 0;
  std::int64_t exceed = 0;
  double probability = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

// Monte Carlo P(sup_{s<=t} |B(s)| > x) on a grid with bridge refinement of
// steps that end near the threshold.
TailEstimate brownian_sup_exceedance(int d, double t, double x, std::int64_t paths,
                                     double step, std::uint64_t seed);

}  // namespace lfv

#include "lfv/support.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "lfv/errors.hpp"
#include "lfv/parallel.hpp"
#include "lfv/rng.hpp"

namespace lfv {

double modulus_h(double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("h(t) needs 0 < t < 1");
  return std::sqrt(-t * std::log(t));
}

namespace {

// Term ratios of both series decrease, so once the ratio q < 1 the tail after
// term v is at most v q / (1 - q).
double sum_until_small(double (*term)(int)) {
  double total = term(1);
  for (int i = 2;; ++i) {
    const double prev = term(i - 1);
    const double v = term(i);
    total += v;
    const double q = v / prev;
    if (q < 1.0 && v * q / (1.0 - q) < 1e-14) break;
  }
  return total;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    sq += diff * diff;
  }
  return sq;
}

}  // namespace

double envelope_series_l() {
  static const double value =
      sum_until_small([](int l) { return std::sqrt(std::ldexp(1.0, -2 * l + 1) * l); });
  return value;
}

double envelope_series_k() {
  static const double value =
      sum_until_small([](int k) { return std::sqrt(std::ldexp(1.0, -k + 1) * k); });
  return value;
}

double theory_c1(int d, double alpha) {
  if (d < 1 || !(alpha > 0.0)) throw DomainError("theory constant needs d >= 1, alpha > 0");
  return std::sqrt(2.0 * d * (3.0 / alpha + 1.0)) + 1e-6;
}

double theory_constant(int d, double alpha) {
  return 2.0 * theory_c1(d, alpha) * (1.0 + envelope_series_l()) *
         (1.0 + envelope_series_k());
}

std::vector<double> dyadic_grid(double horizon, int depth) {
  std::vector<double> grid;
  const double step = std::ldexp(1.0, -depth);
  for (std::int64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > horizon * (1.0 + 1e-14)) break;
    grid.push_back(std::min(t, horizon));
  }
  return grid;
}

std::vector<int> modulus_depths(int grid_depth, int min_depth, double horizon) {
  std::vector<int> depths;
  for (int m = std::max(min_depth, 2); m <= grid_depth; ++m) {
    const double delta = std::ldexp(1.0, -m);
    if (delta <= std::exp(-1.0) && delta <= horizon) depths.push_back(m);
  }
  if (depths.size() < 3) throw GridTooCoarse("fewer than 3 distinct scales on the grid");
  return depths;
}

ModulusSample modulus_sample(const LookdownTrajectory& tr, int grid_depth, int min_depth) {
  const std::vector<int> depths = modulus_depths(grid_depth, min_depth, tr.horizon());
  const std::vector<double> grid = dyadic_grid(tr.horizon(), grid_depth);
  const std::size_t G = grid.size();
  const std::size_t S = depths.size();
  const int max_gap = 1 << (grid_depth - depths.front());
  const int n = tr.n();
  const int d = tr.d();

  std::vector<std::size_t> idx(G);
  for (std::size_t g = 0; g < G; ++g) idx[g] = tr.observation_index(grid[g]);
  ModulusSample sample;
  sample.ratios.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t gap = std::size_t{1} << (grid_depth - depths[s]);
    sample.ratios[s].assign(G > gap ? G - gap : 0, 0.0);
  }
  // For each start r, compose ancestor maps forward one grid step at a time.
  std::vector<int> anc(static_cast<std::size_t>(n));
  std::vector<int> next(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i + 1 < G; ++i) {
    for (int j = 0; j < n; ++j) anc[j] = j + 1;
    const auto base = tr.positions(idx[i]);
    for (int g = 1; g <= max_gap && i + g < G; ++g) {
      for (std::size_t k = idx[i + g - 1] + 1; k <= idx[i + g]; ++k) {
        const auto map = tr.ancestor_map(k);
        for (int j = 0; j < n; ++j) next[j] = anc[map[j] - 1];
        anc.swap(next);
      }
      if ((g & (g - 1)) != 0) continue;
      const int depth = grid_depth - std::countr_zero(static_cast<unsigned>(g));
      const auto it = std::find(depths.begin(), depths.end(), depth);
      if (it == depths.end()) continue;
      const auto now = tr.positions(idx[i + g]);
      double worst = 0.0;
      for (int j = 0; j < n; ++j) {
        worst = std::max(
            worst, squared_distance(now.subspan(static_cast<std::size_t>(j) * d, d),
                                    base.subspan(static_cast<std::size_t>(anc[j] - 1) * d, d)));
      }
      sample.ratios[it - depths.begin()][i] =
          std::sqrt(worst) / modulus_h(std::ldexp(1.0, -depth));
    }
  }
  return sample;
}

ModulusReport modulus_report(const std::vector<ModulusSample>& samples, int d,
                             double horizon, int grid_depth, double alpha, int min_depth,
                             double required_fraction) {
  if (samples.empty()) throw DomainError("modulus report needs at least one replicate");
  const std::vector<int> depths = modulus_depths(grid_depth, min_depth, horizon);
  const std::vector<double> grid = dyadic_grid(horizon, grid_depth);
  const std::size_t S = depths.size();
  const std::size_t R = samples.size();

  ModulusReport report;
  report.d = d;
  report.alpha = alpha;
  report.c1 = theory_c1(d, alpha);
  report.c_theory = theory_constant(d, alpha);
  report.required_fraction = required_fraction;

  for (std::size_t s = 0; s < S; ++s) {
    ModulusScale scale;
    scale.depth = depths[s];
    scale.delta = std::ldexp(1.0, -depths[s]);
    scale.h = modulus_h(scale.delta);
    const std::size_t pairs = samples.front().ratios.at(s).size();
    std::vector<double> pair_max(pairs, 0.0);
    std::size_t passing = 0;
    for (std::size_t rep = 0; rep < R; ++rep) {
      const auto& ratios = samples[rep].ratios.at(s);
      if (ratios.size() != pairs) throw DomainError("replicates disagree on the dyadic grid");
      double m = 0.0;
      for (std::size_t i = 0; i < pairs; ++i) {
        m = std::max(m, ratios[i]);
        pair_max[i] = std::max(pair_max[i], ratios[i]);
      }
      scale.per_replicate.push_back(m);
      scale.c_hat = std::max(scale.c_hat, m);
      if (m <= report.c_theory) ++passing;
    }
    scale.pass_fraction = static_cast<double>(passing) / static_cast<double>(R);
    scale.pass = scale.pass_fraction >= required_fraction;
    const std::size_t gap = std::size_t{1} << (grid_depth - depths[s]);
    for (std::size_t i = 0; i < pairs; ++i) {
      report.pairs.push_back({grid[i], grid[i + gap], pair_max[i]});
    }
    report.scales.push_back(std::move(scale));
  }

  report.below_theory = std::all_of(report.scales.begin(), report.scales.end(),
                                    [](const ModulusScale& s) { return s.pass; });
  double coarse = 0.0;
  for (std::size_t s = 0; s < (S + 1) / 2; ++s) coarse = std::max(coarse, report.scales[s].c_hat);
  report.bounded_trend = std::isfinite(report.scales.back().c_hat) &&
                         report.scales.back().c_hat <= 1.5 * coarse;
  return report;
}

ModulusReport modulus_envelope(const std::vector<LookdownTrajectory>& trajectories,
                               int grid_depth, double alpha, int min_depth,
                               double required_fraction) {
  if (trajectories.empty()) throw DomainError("modulus envelope needs trajectories");
  if (grid_depth < 2) throw GridTooCoarse("grid depth must be at least 2");
  const double T = trajectories.front().horizon();
  const int d = trajectories.front().d();
  for (const auto& tr : trajectories) {
    if (tr.horizon() != T || tr.d() != d) {
      throw DomainError("trajectories must share horizon and dimension");
    }
  }
  modulus_depths(grid_depth, min_depth, T);
  std::vector<ModulusSample> samples(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t rep) {
    samples[rep] = modulus_sample(trajectories[rep], grid_depth, min_depth);
  });
  return modulus_report(samples, d, T, grid_depth, alpha, min_depth, required_fraction);
}

std::vector<double> growth_required(const LookdownTrajectory& tr, double t,
                                    const std::vector<double>& dt_grid) {
  const int d = tr.d();
  const int n = tr.n();
  for (double dt : dt_grid) {
    if (dt < 0.0 || dt >= 1.0) throw OutOfRange("growth increments must lie in [0, 1)");
    if (t + dt > tr.horizon() * (1.0 + 1e-12)) throw OutOfRange("t + dt beyond the horizon");
  }
  const auto base = tr.positions(tr.observation_index(t));
  std::vector<double> required;
  for (double dt : dt_grid) {
    if (dt == 0.0) {
      required.push_back(0.0);
      continue;
    }
    const auto later = tr.positions(tr.observation_index(t + dt));
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto p = later.subspan(static_cast<std::size_t>(j) * d, d);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n && best > worst; ++i) {
        best = std::min(best, squared_distance(p, base.subspan(static_cast<std::size_t>(i) * d, d)));
      }
      worst = std::max(worst, best);
    }
    required.push_back(std::sqrt(worst) / modulus_h(dt));
  }
  return required;
}

GrowthReport growth_report(const std::vector<std::vector<double>>& required, double t,
                           const std::vector<double>& dt_grid, int d, double alpha) {
  if (required.empty()) throw DomainError("growth report needs at least one replicate");
  GrowthReport report;
  report.t = t;
  report.c_theory = theory_constant(d, alpha);
  const std::size_t R = required.size();
  std::vector<bool> bounded(R, true);
  for (std::size_t i = 0; i < dt_grid.size(); ++i) {
    GrowthRow row;
    row.dt = dt_grid[i];
    row.h = dt_grid[i] > 0.0 ? modulus_h(dt_grid[i]) : 0.0;
    std::size_t pass = 0;
    for (std::size_t rep = 0; rep < R; ++rep) {
      const double c = required[rep].at(i);
      row.required_c.push_back(c);
      row.max_required = std::max(row.max_required, c);
      if (c <= report.c_theory) {
        ++pass;
      } else {
        bounded[rep] = false;
      }
    }
    row.pass_fraction = static_cast<double>(pass) / static_cast<double>(R);
    report.rows.push_back(std::move(row));
  }
  report.bounded_fraction =
      static_cast<double>(std::count(bounded.begin(), bounded.end(), true)) /
      static_cast<double>(R);
  return report;
}

GrowthReport support_growth_check(const std::vector<LookdownTrajectory>& trajectories,
                                  double t, const std::vector<double>& dt_grid,
                                  double alpha) {
  if (trajectories.empty()) throw DomainError("growth check needs trajectories");
  std::vector<std::vector<double>> required(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t rep) {
    required[rep] = growth_required(trajectories[rep], t, dt_grid);
  });
  return growth_report(required, t, dt_grid, trajectories.front().d(), alpha);
}

namespace {

std::int64_t count_boxes(const PointCloud& cloud, const std::vector<double>& lo, double eps) {
  const std::size_t N = cloud.size();
  const int d = cloud.d;
  std::vector<std::int64_t> keys(N * d);
  for (std::size_t i = 0; i < N; ++i) {
    const auto p = cloud.point(i);
    for (int c = 0; c < d; ++c) {
      keys[i * d + c] = static_cast<std::int64_t>(std::floor((p[c] - lo[c]) / eps));
    }
  }
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    return std::span<const std::int64_t>(keys.data() + i * d, static_cast<std::size_t>(d));
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a);
    const auto kb = key(b);
    return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end());
  });
  std::int64_t count = N > 0 ? 1 : 0;
  for (std::size_t i = 1; i < N; ++i) {
    const auto ka = key(order[i - 1]);
    const auto kb = key(order[i]);
    if (!std::equal(ka.begin(), ka.end(), kb.begin())) ++count;
  }
  return count;
}

void bounding_box(const PointCloud& cloud, std::vector<double>& lo, std::vector<double>& hi) {
  lo.assign(cloud.d, std::numeric_limits<double>::infinity());
  hi.assign(cloud.d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (int c = 0; c < cloud.d; ++c) {
      if (!std::isfinite(p[c])) throw DomainError("point cloud has a non-finite coordinate");
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
}

}  // namespace

DimensionEstimate box_counting_dimension(const PointCloud& cloud,
                                         const std::vector<double>& scales,
                                         double confidence) {
  if (cloud.size() == 0) throw DegenerateCloud("empty point cloud");
  if (scales.size() < 4) throw DomainError("box counting needs at least 4 scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw DomainError("box sizes must be positive");
    if (i > 0 && !(scales[i] < scales[i - 1])) throw DomainError("box sizes must decrease");
  }
  if (scales.front() / scales.back() < 4.0 * (1.0 - 1e-12)) {
    throw DomainError("box sizes must span at least two octaves");
  }
  std::vector<double> lo, hi;
  bounding_box(cloud, lo, hi);

  DimensionEstimate est;
  est.scales = scales;
  bool same = true;
  for (int c = 0; c < cloud.d; ++c) same = same && lo[c] == hi[c];
  if (same) {
    est.counts.assign(scales.size(), 1);
    est.degenerate = true;
    return est;
  }

  est.counts.resize(scales.size());
  parallel_for(scales.size(), [&](std::size_t i) { est.counts[i] = count_boxes(cloud, lo, scales[i]); });

  const std::size_t m = scales.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = -std::log(scales[i]);
    y[i] = std::log(static_cast<double>(est.counts[i]));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  boost::math::students_t dist(static_cast<double>(m - 2));
  const double q = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  const double dim = static_cast<double>(cloud.d);
  est.raw_slope = slope;
  est.slope = std::clamp(slope, 0.0, dim);
  est.ci_lo = std::clamp(slope - q * se, 0.0, dim);
  est.ci_hi = std::clamp(slope + q * se, 0.0, dim);
  return est;
}

std::vector<double> relative_scales(const PointCloud& cloud, int k_min, int k_max) {
  if (cloud.size() == 0) throw DegenerateCloud("empty point cloud");
  std::vector<double> lo, hi;
  bounding_box(cloud, lo, hi);
  double diameter = 0.0;
  for (int c = 0; c < cloud.d; ++c) diameter = std::max(diameter, hi[c] - lo[c]);
  if (diameter == 0.0) diameter = 1.0;
  std::vector<double> scales;
  for (int k = k_min; k <= k_max; ++k) scales.push_back(std::ldexp(diameter, -k));
  return scales;
}

std::vector<double> range_snapshot_times(double t0, double t1, int snapshot_count) {
  if (!(t0 <= t1) || snapshot_count < 1) throw OutOfRange("range window needs t0 <= t1 and snapshots >= 1");
  std::vector<double> times;
  for (int i = 0; i < snapshot_count; ++i) {
    times.push_back(t0 + (t1 - t0) * static_cast<double>(i) / snapshot_count);
  }
  return times;
}

PointCloud range_union(const LookdownTrajectory& trajectory, double t0, double t1,
                       int snapshot_count, std::uint64_t replicate) {
  if (!(t0 >= 0.0 && t1 <= trajectory.horizon())) throw OutOfRange("range window outside [0, T]");
  PointCloud cloud;
  cloud.d = trajectory.d();
  cloud.replicate = replicate;
  cloud.time = t0;
  for (double t : range_snapshot_times(t0, t1, snapshot_count)) {
    const auto p = trajectory.positions(trajectory.observation_index(t));
    cloud.coords.insert(cloud.coords.end(), p.begin(), p.end());
  }
  return cloud;
}

std::vector<double> radius_ratios(const LookdownTrajectory& tr,
                                  const std::vector<double>& t_grid) {
  if (!tr.started_at_origin()) {
    throw WrongInitialization("radius profile needs all particles at the origin");
  }
  const auto& times = tr.observation_times();
  // Running sup of the radius over observation times.
  std::vector<double> running(times.size(), 0.0);
  double sup = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto p = tr.positions(k);
    for (std::size_t i = 0; i < p.size(); i += tr.d()) {
      double sq = 0.0;
      for (int c = 0; c < tr.d(); ++c) sq += p[i + c] * p[i + c];
      sup = std::max(sup, std::sqrt(sq));
    }
    running[k] = sup;
  }
  std::vector<double> ratios;
  for (double t : t_grid) ratios.push_back(running[tr.observation_index(t)] / modulus_h(t));
  return ratios;
}

RadiusReport radius_report(const std::vector<std::vector<double>>& ratios,
                           const std::vector<double>& t_grid, int d, double alpha) {
  if (ratios.empty()) throw DomainError("radius report needs at least one replicate");
  RadiusReport report;
  report.c_theory = theory_constant(d, alpha);
  const std::size_t R = ratios.size();
  report.bounded.assign(R, true);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    RadiusRow row;
    row.t = t_grid[i];
    row.h = modulus_h(t_grid[i]);
    for (std::size_t rep = 0; rep < R; ++rep) {
      const double r = ratios[rep].at(i);
      row.ratio.push_back(r);
      row.max_ratio = std::max(row.max_ratio, r);
      if (r > report.c_theory) report.bounded[rep] = false;
    }
    report.rows.push_back(std::move(row));
  }
  report.bounded_fraction =
      static_cast<double>(std::count(report.bounded.begin(), report.bounded.end(), true)) /
      static_cast<double>(R);
  return report;
}

RadiusReport radius_profile(const std::vector<LookdownTrajectory>& trajectories,
                            const std::vector<double>& t_grid, double alpha) {
  if (trajectories.empty()) throw DomainError("radius profile needs trajectories");
  for (const auto& tr : trajectories) {
    if (!tr.started_at_origin()) {
      throw WrongInitialization("radius profile needs all particles at the origin");
    }
  }
  std::vector<std::vector<double>> ratios(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t rep) {
    ratios[rep] = radius_ratios(trajectories[rep], t_grid);
  });
  return radius_report(ratios, t_grid, trajectories.front().d(), alpha);
}

LocalMassReport local_mass_profile(const PointCloud& cloud, const std::vector<double>& radii,
                                   double exponent, std::size_t sample_count) {
  const std::size_t N = cloud.size();
  if (N == 0) throw DegenerateCloud("empty point cloud");
  if (radii.empty()) throw DomainError("local mass profile needs radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
      throw DomainError("radii must be positive and decreasing");
    }
  }
  LocalMassReport report;
  report.radii = radii;
  report.exponent = exponent;
  const std::size_t S = std::min(sample_count, N);
  for (std::size_t s = 0; s < S; ++s) report.sampled.push_back(s * N / S);
  report.proxy.assign(S, std::vector<double>(radii.size()));
  report.limsup_proxy.assign(S, 0.0);
  parallel_for(S, [&](std::size_t s) {
    const auto x = cloud.point(report.sampled[s]);
    std::vector<double> dist(N);
    for (std::size_t i = 0; i < N; ++i) dist[i] = std::sqrt(squared_distance(x, cloud.point(i)));
    std::sort(dist.begin(), dist.end());
    for (std::size_t r = 0; r < radii.size(); ++r) {
      const auto inside = std::upper_bound(dist.begin(), dist.end(), radii[r]) - dist.begin();
      const double mass = static_cast<double>(inside) / static_cast<double>(N);
      report.proxy[s][r] = mass / std::pow(radii[r], exponent);
      report.limsup_proxy[s] = std::max(report.limsup_proxy[s], report.proxy[s][r]);
    }
  });
  std::size_t positive = 0, increasing = 0;
  for (std::size_t s = 0; s < S; ++s) {
    if (report.limsup_proxy[s] > 0.0) ++positive;
    if (report.proxy[s].back() > report.proxy[s].front()) ++increasing;
  }
  report.positive_fraction = static_cast<double>(positive) / static_cast<double>(S);
  report.increasing_fraction = static_cast<double>(increasing) / static_cast<double>(S);
  return report;
}

AncestorCountRow ancestor_count_check(const LookdownTrajectory& trajectory, int depth,
                                      double alpha) {
  AncestorCountRow row;
  row.depth = depth;
  row.bound = std::pow(4.0, depth / alpha) * std::pow(static_cast<double>(depth), 2.0 / alpha);
  const auto grid = dyadic_grid(trajectory.horizon(), depth);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    row.max_count = std::max(row.max_count,
                             ancestor_count(trajectory, trajectory.observation_index(grid[k - 1]),
                                            trajectory.observation_index(grid[k])));
  }
  row.below = row.max_count < row.bound;
  return row;
}

double brownian_tail_bound_raw(int d, double t, double x) {
  if (d < 1 || !(t > 0.0) || !(x > 0.0)) throw DomainError("tail bound needs d >= 1, t > 0, x > 0");
  const double dd = static_cast<double>(d);
  return std::sqrt(8.0 * dd * dd * dd * t / std::numbers::pi) / x *
         std::exp(-x * x / (2.0 * dd * t));
}

double brownian_tail_bound(int d, double t, double x) {
  return std::min(1.0, brownian_tail_bound_raw(d, t, x));
}

namespace {

constexpr int kBridgeLevels = 10;

double norm(const double* v, int d) {
  double sq = 0.0;
  for (int c = 0; c < d; ++c) sq += v[c] * v[c];
  return std::sqrt(sq);
}

// Does the bridge from a to b over duration dt leave the ball of radius x?
// Midpoints are sampled only while an endpoint sits within a few standard
// deviations of the sphere.
bool bridge_exits(const double* a, const double* b, double dt, double x, int d, int level,
                  Stream& rng, std::normal_distribution<double>& normal) {
  const double near = x - 4.0 * std::sqrt(dt * d);
  if (std::max(norm(a, d), norm(b, d)) < near || level == 0) return false;
  double mid[16];
  const double sd = std::sqrt(dt / 4.0);
  for (int c = 0; c < d; ++c) mid[c] = 0.5 * (a[c] + b[c]) + sd * normal(rng);
  if (norm(mid, d) > x) return true;
  return bridge_exits(a, mid, dt / 2.0, x, d, level - 1, rng, normal) ||
         bridge_exits(mid, b, dt / 2.0, x, d, level - 1, rng, normal);
}

}  // namespace

TailEstimate brownian_sup_exceedance(int d, double t, double x, std::int64_t paths,
                                     double step, std::uint64_t seed) {
  if (d < 1 || d > 16) throw DomainError("Brownian tail estimate supports 1 <= d <= 16");
  if (paths < 1 || !(step > 0.0)) throw DomainError("tail estimate needs paths >= 1 and step > 0");
  TailEstimate est;
  est.d = d;
  est.t = t;
  est.x = x;
  est.paths = paths;
  est.bound = brownian_tail_bound(d, t, x);
  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(t / step));
  const double dt = t / static_cast<double>(steps);
  const double sd = std::sqrt(dt);
  std::vector<char> exceeded(static_cast<std::size_t>(paths), 0);
  parallel_for(static_cast<std::size_t>(paths), [&](std::size_t p) {
    Stream rng = stream_for(seed, p, StreamRole::BrownianIncrement);
    std::normal_distribution<double> normal(0.0, 1.0);
    double cur[16] = {};
    double nxt[16];
    for (std::int64_t i = 0; i < steps; ++i) {
      for (int c = 0; c < d; ++c) nxt[c] = cur[c] + sd * normal(rng);
      if (norm(nxt, d) > x ||
          bridge_exits(cur, nxt, dt, x, d, kBridgeLevels, rng, normal)) {
        exceeded[p] = 1;
        return;
      }
      std::copy(nxt, nxt + d, cur);
    }
  });
  est.exceed = std::count(exceeded.begin(), exceeded.end(), 1);
  est.probability = static_cast<double>(est.exceed) / static_cast<double>(paths);
  est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(paths));
  return est;
}

}  // namespace lfv

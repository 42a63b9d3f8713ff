#include <gtest/gtest.h>

#include <cmath>

#include "lfv/errors.hpp"
#include "lfv/lookdown.hpp"
#include "lfv/parallel.hpp"
#include "lfv/rng.hpp"
#include "lfv/support.hpp"

using namespace lfv;

namespace {

LookdownConfig config(int n, int d, double horizon, std::vector<double> obs = {}) {
  LookdownConfig c;
  c.n = n;
  c.d = d;
  c.horizon = horizon;
  c.observation_times = std::move(obs);
  return c;
}

PointCloud unit_square_grid(int side) {
  PointCloud c{2, {}, 0, 0.0};
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      c.coords.push_back((i + 0.5) / side);
      c.coords.push_back((j + 0.5) / side);
    }
  }
  return c;
}

}  // namespace

TEST(Modulus, HExamples) {
  EXPECT_NEAR(modulus_h(std::exp(-1.0)), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(modulus_h(0.25), 0.5887050112577, 1e-12);
  EXPECT_THROW(modulus_h(0.0), DomainError);
  EXPECT_THROW(modulus_h(1.0), DomainError);
}

TEST(Modulus, HIncreasingBelowInverseE) {
  const double top = std::exp(-1.0);
  double prev = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double h = modulus_h(top * i / 10000);
    EXPECT_GT(h, prev);
    prev = h;
  }
}

TEST(TheoryConstant, SeriesValues) {
  long double l = 0, k = 0;
  for (int j = 1; j < 200; ++j) {
    l += std::sqrt(std::ldexp(1.0L, -2 * j + 1) * j);
    k += std::sqrt(std::ldexp(1.0L, -j + 1) * j);
  }
  EXPECT_NEAR(envelope_series_l(), static_cast<double>(l), 1e-12);
  EXPECT_NEAR(envelope_series_k(), static_cast<double>(k), 1e-12);
  EXPECT_NEAR(envelope_series_l(), 1.9053045290769464, 1e-12);
  EXPECT_NEAR(envelope_series_k(), 5.8619780108757, 1e-11);
}

TEST(TheoryConstant, ValueAndMonotonicity) {
  EXPECT_NEAR(theory_c1(2, 1.0), 4.000001, 1e-12);
  EXPECT_NEAR(theory_constant(2, 1.0),
              2 * 4.000001 * (1 + 1.9053045290769464) * (1 + 5.8619780108757), 1e-9);
  for (int d = 1; d < 5; ++d) {
    EXPECT_LT(theory_constant(d, 1.0), theory_constant(d + 1, 1.0));
    EXPECT_GT(theory_constant(d, 0.5), theory_constant(d, 1.0));
    EXPECT_GT(theory_constant(d, 1.0), theory_constant(d, 1.9));
  }
  EXPECT_THROW(theory_constant(0, 1.0), DomainError);
}

TEST(Modulus, GridHelpers) {
  EXPECT_EQ(dyadic_grid(0.5, 3), (std::vector<double>{0, 0.125, 0.25, 0.375, 0.5}));
  EXPECT_EQ(modulus_depths(8, 4, 1.0), (std::vector<int>{4, 5, 6, 7, 8}));
  EXPECT_THROW(modulus_depths(3, 1, 1.0), GridTooCoarse);
}

TEST(Modulus, SingleBrownianPathTrend) {
  const int depth = 10, reps = 100;
  std::vector<LookdownTrajectory> trajs;
  for (int rep = 0; rep < reps; ++rep) {
    trajs.push_back(simulate_lookdown(LambdaMeasure::null(), config(1, 1, 1.0, dyadic_grid(1.0, depth)),
                                      2, rep));
  }
  const auto report = modulus_envelope(trajs, depth, 1.0, 2);
  EXPECT_TRUE(report.bounded_trend);
  EXPECT_TRUE(report.below_theory);
  for (const auto& s : report.scales) {
    EXPECT_TRUE(std::isfinite(s.c_hat));
    for (double r : s.per_replicate) EXPECT_GE(r, 0.0);
  }
  for (const auto& p : report.pairs) EXPECT_GE(p.max_ratio, 0.0);
  // Levy: the finest-scale ratio is close to sqrt(2) for one-dimensional BM.
  EXPECT_LT(report.scales.back().c_hat, 3.0);
}

TEST(Growth, SinglePathIsDisplacement) {
  const auto traj =
      simulate_lookdown(LambdaMeasure::null(), config(1, 2, 1.0, {0.5, 0.625, 0.75}), 4, 0);
  const auto req = growth_required(traj, 0.5, {0.0, 0.125, 0.25});
  EXPECT_EQ(req[0], 0.0);
  const auto a = traj.position(traj.observation_index(0.5), 1);
  for (int i = 1; i <= 2; ++i) {
    const double dt = 0.125 * i;
    const auto b = traj.position(traj.observation_index(0.5 + dt), 1);
    EXPECT_NEAR(req[i], std::hypot(a[0] - b[0], a[1] - b[1]) / modulus_h(dt), 1e-12);
  }
  EXPECT_THROW(growth_required(traj, 0.5, {0.75}), OutOfRange);
}

TEST(Growth, KingmanBounded) {
  std::vector<LookdownTrajectory> trajs;
  for (int rep = 0; rep < 20; ++rep) {
    trajs.push_back(simulate_lookdown(LambdaMeasure::kingman(),
                                      config(200, 2, 1.0, {0.5, 0.5 + 1.0 / 64, 0.5 + 1.0 / 16, 0.75}),
                                      5, rep));
  }
  const auto report = support_growth_check(trajs, 0.5, {1.0 / 64, 1.0 / 16, 0.25}, 1.0);
  EXPECT_EQ(report.bounded_fraction, 1.0);
}

TEST(Dimension, DeterministicOracles) {
  PointCloud point{2, {1.0, 2.0}, 0, 0.0};
  const auto p = box_counting_dimension(point, {1, 0.5, 0.25, 0.125});
  EXPECT_EQ(p.slope, 0.0);
  EXPECT_TRUE(p.degenerate);

  const auto square = unit_square_grid(256);
  EXPECT_EQ(square.size(), 65536u);
  const auto sq = box_counting_dimension(square, {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625});
  EXPECT_NEAR(sq.slope, 2.0, 0.1);

  PointCloud seg{3, {}, 0, 0.0};
  for (int i = 0; i < 4096; ++i) {
    const double s = i / 4095.0;
    seg.coords.insert(seg.coords.end(), {s, -2 * s, 0.5 * s});
  }
  EXPECT_NEAR(box_counting_dimension(seg, relative_scales(seg, 1, 8)).slope, 1.0, 0.15);
}

TEST(Dimension, Invariants) {
  Stream rng = stream_for(3, 0, StreamRole::Comparison);
  for (int d = 1; d <= 3; ++d) {
    PointCloud cloud{d, {}, 0, 0.0};
    for (int i = 0; i < 3000 * d; ++i) cloud.coords.push_back(rng.uniform_open());
    const auto est = box_counting_dimension(cloud, relative_scales(cloud, 1, 7));
    EXPECT_GE(est.slope, 0.0);
    EXPECT_LE(est.slope, d);
    EXPECT_LE(est.ci_lo, est.slope);
    EXPECT_GE(est.ci_hi, est.slope);
    for (std::size_t i = 1; i < est.counts.size(); ++i) EXPECT_GE(est.counts[i], est.counts[i - 1]);
  }
}

TEST(Dimension, Errors) {
  PointCloud empty{2, {}, 0, 0.0};
  EXPECT_THROW(box_counting_dimension(empty, {1, 0.5, 0.25, 0.125}), DegenerateCloud);
  const auto square = unit_square_grid(8);
  EXPECT_THROW(box_counting_dimension(square, {1, 0.5, 0.25}), DomainError);
  EXPECT_THROW(box_counting_dimension(square, {1, 0.9, 0.8, 0.7}), DomainError);
  EXPECT_THROW(box_counting_dimension(square, {0.5, 1, 0.25, 0.125}), DomainError);
}

TEST(Range, SingleSnapshotIsSupport) {
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(30, 2, 1.0, {0.4}), 1, 0);
  const auto r = range_union(traj, 0.4, 0.4, 1);
  EXPECT_EQ(r.coords, empirical_support(traj, 0.4).coords);
  EXPECT_EQ(range_snapshot_times(0.5, 1.0, 4), (std::vector<double>{0.5, 0.625, 0.75, 0.875}));
  EXPECT_THROW(range_union(traj, 0.0, 2.0, 4), OutOfRange);
}

TEST(Range, BrownianTrace) {
  const auto times = range_snapshot_times(0.0, 1.0, 64);
  const auto traj = simulate_lookdown(LambdaMeasure::null(), config(1, 2, 1.0, times), 7, 0);
  const auto r = range_union(traj, 0.0, 1.0, 64);
  ASSERT_EQ(r.size(), 64u);
  for (std::size_t i = 0; i < 64; ++i) {
    const auto p = traj.position(traj.observation_index(times[i]), 1);
    EXPECT_EQ(r.point(i)[0], p[0]);
    EXPECT_EQ(r.point(i)[1], p[1]);
  }
}

TEST(Radius, SinglePath) {
  const auto traj = simulate_lookdown(LambdaMeasure::null(), config(1, 2, 1.0, {0.25}), 3, 0);
  const auto p = traj.position(traj.observation_index(0.25), 1);
  const auto ratios = radius_ratios(traj, {0.25});
  EXPECT_NEAR(ratios[0], std::hypot(p[0], p[1]) / modulus_h(0.25), 1e-12);
  EXPECT_GE(ratios[0], 0.0);
}

TEST(Radius, WrongInitialization) {
  auto c = config(2, 1, 1.0, {0.25});
  c.init.points = {0.1, 0.2};
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), c, 1, 0);
  EXPECT_THROW(radius_ratios(traj, {0.25}), WrongInitialization);
}

TEST(Radius, KingmanBoundedNearOrigin) {
  std::vector<double> grid;
  for (int k = 3; k <= 10; ++k) grid.push_back(std::ldexp(1.0, -k));
  const int reps = 200;
  std::vector<std::vector<double>> ratios(reps);
  parallel_for(reps, [&](std::size_t rep) {
    const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(500, 2, 0.125, grid), 9, rep);
    ratios[rep] = radius_ratios(traj, grid);
  });
  const auto report = radius_report(ratios, grid, 2, 1.0);
  EXPECT_GE(report.bounded_fraction, 0.95);
  for (const auto& row : report.rows) {
    for (double r : row.ratio) EXPECT_GE(r, 0.0);
  }
}

TEST(LocalMass, IdenticalPointsDiverge) {
  PointCloud cloud{2, std::vector<double>(20, 0.5), 0, 0.0};
  const auto report = local_mass_profile(cloud, {0.1, 0.01, 0.001}, 2.0);
  for (const auto& row : report.proxy) {
    EXPECT_NEAR(row[0], 1e2, 1e-9);
    EXPECT_NEAR(row[2], 1e6, 1e-3);
  }
  EXPECT_EQ(report.increasing_fraction, 1.0);
}

TEST(LocalMass, UniformSquareIsFlat) {
  const auto square = unit_square_grid(200);
  // Interior points only: take radii small against the distance to the edge.
  PointCloud cloud = square;
  const auto report = local_mass_profile(cloud, {0.08, 0.04, 0.02}, 2.0, 400);
  int flat = 0, interior = 0;
  for (std::size_t s = 0; s < report.sampled.size(); ++s) {
    const auto x = cloud.point(report.sampled[s]);
    if (x[0] < 0.1 || x[0] > 0.9 || x[1] < 0.1 || x[1] > 0.9) continue;
    ++interior;
    const auto& row = report.proxy[s];
    if (std::abs(row[2] / row[0] - 1.0) < 0.1) ++flat;
  }
  ASSERT_GT(interior, 100);
  EXPECT_EQ(flat, interior);
  for (std::size_t s = 0; s < report.sampled.size(); ++s) {
    const auto x = cloud.point(report.sampled[s]);
    if (std::abs(x[0] - 0.5) < 0.05 && std::abs(x[1] - 0.5) < 0.05) {
      EXPECT_NEAR(report.proxy[s][0], M_PI, 0.05);
    }
  }
}

TEST(LocalMass, KingmanConcentrates) {
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(2000, 2, 1.0), 5, 0);
  const auto cloud = empirical_support(traj, 1.0);
  const auto report = local_mass_profile(cloud, {0.2, 0.1, 0.05, 0.025, 0.0125}, 2.1);
  EXPECT_EQ(report.positive_fraction, 1.0);
  EXPECT_GE(report.increasing_fraction, 0.9);
}

TEST(AncestorCount, KingmanBelowBound) {
  for (int depth = 2; depth <= 6; ++depth) {
    const auto traj =
        simulate_lookdown(LambdaMeasure::kingman(), config(500, 1, 1.0, dyadic_grid(1.0, depth)), 3, 0);
    const auto row = ancestor_count_check(traj, depth, 1.0);
    EXPECT_TRUE(row.below) << depth << ": " << row.max_count << " vs " << row.bound;
  }
}

TEST(BrownianTail, Formula) {
  EXPECT_NEAR(brownian_tail_bound(1, 1.0, 3.0), 0.005909131215917, 1e-14);
  EXPECT_NEAR(brownian_tail_bound_raw(2, 1.0, 3.0),
              std::sqrt(64.0 / M_PI) / 3.0 * std::exp(-9.0 / 4.0), 1e-14);
  EXPECT_LT(brownian_tail_bound(1, 1.0, 40.0), 1e-300);
  EXPECT_EQ(brownian_tail_bound(3, 1.0, 0.1), 1.0);
  EXPECT_GT(brownian_tail_bound_raw(3, 1.0, 0.1), 1.0);
  EXPECT_THROW(brownian_tail_bound(1, 1.0, 0.0), DomainError);
  EXPECT_THROW(brownian_tail_bound(1, -1.0, 1.0), DomainError);
}

TEST(BrownianTail, MonteCarloBelowBound) {
  const auto est = brownian_sup_exceedance(2, 1.0, 3.0, 20000, 1e-3, 5);
  EXPECT_LE(est.probability, est.bound);
  EXPECT_GT(est.probability, 0.0);
  // One-dimensional reflection: P(sup |B| > 3) is close to 4 P(B > 3) at t = 1.
  const auto one = brownian_sup_exceedance(1, 1.0, 3.0, 20000, 1e-3, 6);
  EXPECT_NEAR(one.probability, 2 * std::erfc(3 / std::sqrt(2.0)), 4 * one.std_error + 1e-4);
}

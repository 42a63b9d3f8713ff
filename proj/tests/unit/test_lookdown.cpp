#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lfv/coalescent.hpp"
#include "lfv/errors.hpp"
#include "lfv/lookdown.hpp"
#include "lfv/rng.hpp"
#include "lfv/stats.hpp"

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

double diameter(std::span<const double> pos, int n, int d) {
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        const double diff = pos[i * d + a] - pos[j * d + a];
        s += diff * diff;
      }
      best = std::max(best, s);
    }
  }
  return std::sqrt(best);
}

}  // namespace

TEST(LevelBefore, ShiftRules) {
  BirthEvent e{0.5, BirthKind::Multi, {2, 4, 5}, 2, {0.0}};
  EXPECT_EQ(level_before(e, 1), 1);
  EXPECT_EQ(level_before(e, 2), 2);
  EXPECT_EQ(level_before(e, 3), 3);
  EXPECT_EQ(level_before(e, 4), 2);
  EXPECT_EQ(level_before(e, 5), 2);
  EXPECT_EQ(level_before(e, 6), 4);
  EXPECT_EQ(level_before(e, 9), 7);

  BirthEvent single{0.1, BirthKind::Single, {1, 3}, 1, {0.0}};
  EXPECT_EQ(level_before(single, 2), 2);
  EXPECT_EQ(level_before(single, 3), 1);
  EXPECT_EQ(level_before(single, 4), 3);
}

TEST(Lookdown, NullMeasureIsPureBrownian) {
  std::vector<double> finals;
  for (int rep = 0; rep < 2000; ++rep) {
    const auto traj = simulate_lookdown(LambdaMeasure::null(), config(3, 1, 2.0), 4, rep);
    ASSERT_EQ(traj.event_count(), 0u);
    for (int l = 1; l <= 3; ++l) finals.push_back(traj.position(traj.observation_index(2.0), l)[0]);
  }
  const double sd = std::sqrt(2.0);
  EXPECT_GT(ks_one_sample(finals, [sd](double x) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); })
                .p_value,
            0.01);
}

TEST(Lookdown, KingmanPairInterEventTimes) {
  auto c = config(2, 1, 5000.0);
  c.verify_shifts = true;
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), c, 12, 0);
  ASSERT_GE(traj.events().size(), 4500u);
  std::vector<double> gaps;
  double last = 0.0;
  for (const auto& e : traj.events()) {
    EXPECT_EQ(e.kind, BirthKind::Single);
    EXPECT_EQ(e.levels, (std::vector<int>{1, 2}));
    EXPECT_EQ(e.parent_level, 1);
    gaps.push_back(e.time - last);
    last = e.time;
  }
  EXPECT_GT(ks_one_sample(gaps, [](double x) { return 1 - std::exp(-x); }).p_value, 0.01);
}

TEST(Lookdown, ChildTakesParentLeftLimit) {
  // Observe right at the event times: the child sits exactly at the parent's
  // left limit and lower levels are untouched.
  const auto probe = simulate_lookdown(LambdaMeasure::beta(1.5), config(8, 2, 0.5), 3, 1);
  ASSERT_FALSE(probe.events().empty());
  std::vector<double> times;
  for (const auto& e : probe.events()) times.push_back(e.time);
  const auto traj = simulate_lookdown(LambdaMeasure::beta(1.5), config(8, 2, 0.5, times), 3, 1);
  ASSERT_EQ(traj.events().size(), probe.events().size());
  for (const auto& e : traj.events()) {
    const auto k = traj.observation_index(e.time);
    for (int level : e.levels) {
      const auto p = traj.position(k, level);
      EXPECT_EQ(std::vector<double>(p.begin(), p.end()), e.parent_position);
    }
  }
}

TEST(Lookdown, ShiftVerificationAcrossFamilies) {
  for (const auto& m : {LambdaMeasure::kingman(), LambdaMeasure::uniform(),
                        LambdaMeasure::beta(0.5), LambdaMeasure::beta(1.5, 0.5)}) {
    auto c = config(40, 2, 0.5);
    c.verify_shifts = true;
    for (int rep = 0; rep < 5; ++rep) {
      const auto traj = simulate_lookdown(m, c, 9, rep);
      double last = 0.0;
      for (const auto& e : traj.events()) {
        EXPECT_GT(e.time, last);
        last = e.time;
        EXPECT_GE(e.levels.size(), 2u);
        EXPECT_EQ(e.parent_level, e.levels.front());
        EXPECT_TRUE(std::is_sorted(e.levels.begin(), e.levels.end()));
        if (e.kind == BirthKind::Single) EXPECT_EQ(e.levels.size(), 2u);
      }
    }
  }
}

TEST(Lookdown, PairEventCountsArePoisson) {
  const auto m = LambdaMeasure::beta(1.5);
  const double mean = build_rate_table(m, 6)(6, 2);
  const int reps = 5000;
  std::vector<std::int64_t> counts(8);
  for (int rep = 0; rep < reps; ++rep) {
    const auto traj = simulate_lookdown(m, config(6, 1, 1.0), 31, rep);
    int c = 0;
    for (const auto& e : traj.events()) c += e.levels == std::vector<int>{1, 2};
    ++counts[std::min(c, 7)];
  }
  std::vector<double> probs(8);
  double acc = 0.0;
  for (int k = 0; k < 7; ++k) {
    probs[k] = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
    acc += probs[k];
  }
  probs[7] = 1.0 - acc;
  EXPECT_GT(chi_square_goodness_of_fit(counts, probs).p_value, 0.01);
}

TEST(Lookdown, RateOverflowRefused) {
  EXPECT_THROW(simulate_lookdown(LambdaMeasure::kingman(), config(2000, 1, 100.0), 1, 0),
               RateOverflow);
}

TEST(Lookdown, ObservationsAreExplicit) {
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(4, 1, 1.0, {0.25}), 1, 0);
  EXPECT_EQ(traj.observation_times(), (std::vector<double>{0.0, 0.25, 1.0}));
  EXPECT_THROW(traj.observation_index(0.5), OutOfRange);
}

TEST(Genealogy, NoEventsIsIdentity) {
  const auto traj = simulate_lookdown(LambdaMeasure::null(), config(5, 1, 1.0), 1, 0);
  for (int i = 1; i <= 5; ++i) {
    const auto lin = genealogy(traj, i, 1.0);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_EQ(lin.level_at(t), i);
  }
}

TEST(Genealogy, SingleLookdown) {
  for (int rep = 0;; ++rep) {
    ASSERT_LT(rep, 1000);
    const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(2, 1, 1.0), 2, rep);
    if (traj.events().size() != 1) continue;
    const double u = traj.events()[0].time;
    const auto lin = genealogy(traj, 2, 1.0);
    EXPECT_EQ(lin.level_at(u), 1);
    EXPECT_EQ(lin.level_at(u * 0.5), 1);
    EXPECT_EQ(lin.level_at(std::nextafter(u, 2.0)), 2);
    EXPECT_EQ(lin.level_at(1.0), 2);
    EXPECT_EQ(genealogy(traj, 1, 1.0).level_at(0.0), 1);
    break;
  }
}

TEST(Genealogy, LineageInvariants) {
  const auto traj = simulate_lookdown(LambdaMeasure::beta(1.2), config(30, 1, 1.0), 5, 0);
  for (int i = 1; i <= 30; ++i) {
    const auto lin = genealogy(traj, i, 0.8);
    int prev = 0;
    for (int step = 0; step <= 400; ++step) {
      const double t = 0.8 * step / 400;
      const int l = lin.level_at(t);
      EXPECT_GE(l, prev);
      EXPECT_LE(l, i);
      EXPECT_GE(l, 1);
      prev = l;
    }
    EXPECT_EQ(lin.level_at(0.8), i);
  }
}

TEST(Recovered, NullMeasureStaysSingletons) {
  const auto traj = simulate_lookdown(LambdaMeasure::null(), config(6, 1, 1.0), 1, 0);
  const auto path = recovered_coalescent(traj);
  EXPECT_EQ(path.at(0.0), OrderedPartition::singletons(6));
  EXPECT_EQ(path.at(1.0), OrderedPartition::singletons(6));
}

TEST(Recovered, DualityAndBlockOrder) {
  Stream u = stream_for(77, 0, StreamRole::Comparison);
  for (const auto& m : {LambdaMeasure::kingman(), LambdaMeasure::beta(1.5)}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto traj = simulate_lookdown(m, config(7, 1, 1.0), 13, rep);
      const auto path = recovered_coalescent(traj);
      EXPECT_EQ(path.at(0.0), OrderedPartition::singletons(7));
      std::vector<Lineage> lin;
      for (int i = 1; i <= 7; ++i) lin.push_back(genealogy(traj, i, 1.0));
      int prev_blocks = 7;
      for (int q = 0; q < 30; ++q) {
        const double t = u.uniform_open();
        const auto& p = path.at(t);
        for (int i = 1; i <= 7; ++i) {
          for (int j = 1; j <= 7; ++j) {
            EXPECT_EQ(p.block_of(i) == p.block_of(j),
                      lin[i - 1].level_at(1.0 - t) == lin[j - 1].level_at(1.0 - t));
          }
        }
        for (int b = 0; b < p.block_count(); ++b) {
          for (int i : p.block(b)) EXPECT_EQ(lin[i - 1].level_at(1.0 - t), b + 1);
        }
      }
      double last = -1.0;
      for (const auto& [t, p] : path.steps) {
        EXPECT_GT(t, last);
        EXPECT_LE(p.block_count(), prev_blocks);
        prev_blocks = p.block_count();
        last = t;
      }
    }
  }
}

TEST(Recovered, AncestorCountMatchesPath) {
  const auto m = LambdaMeasure::beta(1.5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto traj = simulate_lookdown(m, config(25, 1, 1.0, {0.5}), 6, rep);
    const auto path = recovered_coalescent(traj);
    EXPECT_EQ(ancestor_count(traj, 0, 2), path.at(1.0).block_count());
    EXPECT_EQ(ancestor_count(traj, 1, 2), path.at(0.5).block_count());
    const auto direct = ancestor_levels(traj, 0, 2);
    for (int i = 1; i <= 25; ++i) EXPECT_EQ(direct[i - 1], genealogy(traj, i, 1.0).level_at(0.0));
  }
}

TEST(Dislocation, Examples) {
  std::vector<double> obs;
  for (int k = 1; k < 16; ++k) obs.push_back(k / 16.0);
  const auto single = simulate_lookdown(LambdaMeasure::null(), config(1, 2, 1.0, obs), 3, 0);
  const auto a = single.position(single.observation_index(0.25), 1);
  const auto b = single.position(single.observation_index(0.75), 1);
  EXPECT_NEAR(dislocation(single, 0.25, 0.75), std::hypot(a[0] - b[0], a[1] - b[1]), 1e-14);
  EXPECT_EQ(dislocation(single, 0.5, 0.5), 0.0);

  for (int rep = 0; rep < 5; ++rep) {
    const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(50, 2, 1.0, obs), 8, rep);
    const auto& times = traj.observation_times();
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t j = i; j < times.size(); ++j) {
        for (std::size_t k = j; k < times.size(); ++k) {
          EXPECT_LE(dislocation(traj, times[i], times[k]),
                    dislocation(traj, times[i], times[j]) + dislocation(traj, times[j], times[k]) +
                        1e-12);
        }
      }
    }
  }
}

TEST(Support, EmpiricalSupportExamples) {
  const auto traj = simulate_lookdown(LambdaMeasure::kingman(), config(10, 3, 1.0), 1, 0);
  const auto start = empirical_support(traj, 0.0);
  EXPECT_EQ(start.size(), 10u);
  for (double x : start.coords) EXPECT_EQ(x, 0.0);

  const auto free = simulate_lookdown(LambdaMeasure::null(), config(3, 2, 1.0), 1, 0);
  const auto cloud = empirical_support(free, 1.0);
  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    distinct.insert({cloud.point(i).begin(), cloud.point(i).end()});
    for (double x : cloud.point(i)) EXPECT_TRUE(std::isfinite(x));
  }
  EXPECT_EQ(distinct.size(), 3u);
}

TEST(Support, ExchangeableInitialLabels) {
  const int n = 20, d = 2, reps = 300;
  std::vector<double> plain, permuted;
  for (int rep = 0; rep < reps; ++rep) {
    Stream init = stream_for(50, rep, StreamRole::InitialPosition);
    std::vector<double> points(n * d);
    for (double& x : points) x = init.uniform_open();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), init);
    std::vector<double> shuffled(n * d);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) shuffled[i * d + a] = points[order[i] * d + a];
    }
    auto c = config(n, d, 0.3);
    c.init.points = points;
    const auto t1 = simulate_lookdown(LambdaMeasure::beta(1.5), c, 60, rep);
    c.init.points = shuffled;
    const auto t2 = simulate_lookdown(LambdaMeasure::beta(1.5), c, 61, rep);
    plain.push_back(diameter(t1.positions(t1.observation_index(0.3)), n, d));
    permuted.push_back(diameter(t2.positions(t2.observation_index(0.3)), n, d));
  }
  EXPECT_GT(ks_two_sample(plain, permuted).p_value, 0.01);
}

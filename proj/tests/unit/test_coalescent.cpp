#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "lfv/coalescent.hpp"
#include "lfv/errors.hpp"
#include "lfv/partition.hpp"
#include "lfv/stats.hpp"

using namespace lfv;

namespace {
std::vector<LambdaMeasure> families() {
  return {LambdaMeasure::kingman(), LambdaMeasure::uniform(), LambdaMeasure::beta(0.5),
          LambdaMeasure::beta(1.5), LambdaMeasure::beta(1.2, 0.3)};
}
}  // namespace

TEST(Partition, CanonicalOrder) {
  OrderedPartition p(5, {{4, 2}, {5}, {3, 1}});
  EXPECT_EQ(p.to_string(), "{1,3}{2,4}{5}");
  EXPECT_EQ(p.block_of(4), 1);
  EXPECT_THROW(OrderedPartition(3, {{1, 2}, {2, 3}}), InvalidPartition);
  EXPECT_THROW(OrderedPartition(3, {{1, 2}}), InvalidPartition);
  EXPECT_THROW(OrderedPartition(3, {{1, 2}, {}, {3}}), InvalidPartition);
}

TEST(Partition, MergeKeepsLeastElementOrder) {
  auto p = OrderedPartition::singletons(5);
  p.merge({1, 3});
  EXPECT_EQ(p.to_string(), "{1}{2,4}{3}{5}");
  p.merge({0, 3});
  EXPECT_EQ(p.to_string(), "{1,5}{2,4}{3}");
}

TEST(Partition, RestrictExamples) {
  EXPECT_EQ(restrict(OrderedPartition(4, {{1, 3}, {2, 4}}), 2).to_string(), "{1}{2}");
  EXPECT_EQ(restrict(OrderedPartition(4, {{1, 2, 3, 4}}), 2).to_string(), "{1,2}");
  EXPECT_EQ(restrict(OrderedPartition::singletons(7), 4), OrderedPartition::singletons(4));
  EXPECT_THROW(restrict(OrderedPartition::singletons(3), 4), OutOfRange);
  EXPECT_THROW(restrict(OrderedPartition::singletons(3), 0), OutOfRange);
}

TEST(Partition, EnumerationCountsBellNumbers) {
  const int bell[] = {1, 1, 2, 5, 15, 52, 203};
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(enumerate_partitions(n).size(), bell[n]);
}

TEST(Rates, KingmanTable) {
  const auto t = build_rate_table(LambdaMeasure::kingman(), 10);
  for (int b = 2; b <= 10; ++b) {
    EXPECT_EQ(t(b, 2), 1.0);
    for (int k = 3; k <= b; ++k) EXPECT_EQ(t(b, k), 0.0);
  }
  EXPECT_EQ(build_rate_table(LambdaMeasure::kingman(2.5), 6)(6, 2), 2.5);
}

TEST(Rates, UniformClosedForm) {
  const auto t = build_rate_table(LambdaMeasure::uniform(), 12);
  EXPECT_NEAR(t(3, 2), 0.5, 1e-14);
  for (int b = 2; b <= 12; ++b) {
    for (int k = 2; k <= b; ++k) {
      const double exact =
          std::tgamma(k - 1.0) * std::tgamma(b - k + 1.0) / std::tgamma(b + 0.0);
      EXPECT_NEAR(t(b, k), exact, 1e-12);
    }
  }
}

TEST(Rates, PairRateIsTotalMass) {
  for (const auto& m : families()) {
    EXPECT_NEAR(build_rate_table(m, 2)(2, 2), total_mass(m), 1e-10);
  }
}

TEST(Rates, ConsistencyAndMonotonicity) {
  for (const auto& m : families()) {
    const auto t = build_rate_table(m, 60);
    EXPECT_LE(t.consistency_defect(), 3 * t.tol());
    for (int n = 2; n < 60; ++n) {
      EXPECT_LE(total_rate(t, n), total_rate(t, n + 1));
      EXPECT_GE(decrease_rate(t, n), total_rate(t, n) * (1 - 1e-12));
      EXPECT_LE(decrease_rate(t, n), total_rate(t, n) * (n - 1) * (1 + 1e-12));
    }
  }
}

TEST(Rates, QuadratureAgreesWithClosedForms) {
  for (const auto& m : families()) {
    const auto a = build_rate_table(m, 25);
    const auto q = build_rate_table(m, 25, 1e-10, RateMethod::Quadrature);
    for (int b = 2; b <= 25; ++b) {
      for (int k = 2; k <= b; ++k) EXPECT_NEAR(a(b, k), q(b, k), 1e-9);
    }
  }
}

TEST(Rates, TotalsExamples) {
  const auto k = build_rate_table(LambdaMeasure::kingman(), 4);
  EXPECT_DOUBLE_EQ(total_rate(k, 4), 6.0);
  EXPECT_DOUBLE_EQ(total_rate(k, 2), 1.0);
  EXPECT_DOUBLE_EQ(decrease_rate(k, 4), 6.0);
  EXPECT_DOUBLE_EQ(decrease_rate(k, 2), 1.0);
  const auto u = build_rate_table(LambdaMeasure::uniform(), 3);
  EXPECT_NEAR(total_rate(u, 3), 2.0, 1e-12);
  EXPECT_NEAR(decrease_rate(u, 3), 2.5, 1e-12);
  EXPECT_THROW(total_rate(u, 4), OutOfRange);
}

TEST(Rates, IntegralFormsMatchTable) {
  for (const auto& m : families()) {
    const auto t = build_rate_table(m, 40);
    for (int n : {2, 5, 17, 40}) {
      EXPECT_NEAR(total_rate_integral(m, n), total_rate(t, n), 1e-7 * total_rate(t, n));
      EXPECT_NEAR(decrease_rate_integral(m, n), decrease_rate(t, n), 1e-7 * decrease_rate(t, n));
    }
  }
}

TEST(Rates, LargeBinomialsStayFinite) {
  EXPECT_NEAR(log_binomial(1000, 500), std::lgamma(1001) - 2 * std::lgamma(501), 1e-8);
  EXPECT_DOUBLE_EQ(binomial(10, 3), 120.0);
  const auto t = build_rate_table(LambdaMeasure::beta(1.5), 300);
  EXPECT_TRUE(std::isfinite(total_rate(t, 300)));
}

TEST(Coalescent, PathInvariants) {
  for (const auto& m : families()) {
    const auto t = build_rate_table(m, 20);
    for (int rep = 0; rep < 50; ++rep) {
      const auto path = simulate_coalescent(t, 20, 5.0, 3, rep);
      EXPECT_EQ(path.initial, OrderedPartition::singletons(20));
      int blocks = 20;
      double last = 0.0;
      for (const auto& e : path.events) {
        EXPECT_GT(e.time, last);
        last = e.time;
        ASSERT_GE(e.merged_blocks.size(), 2u);
        EXPECT_EQ(e.after.block_count(), blocks - static_cast<int>(e.merged_blocks.size()) + 1);
        blocks = e.after.block_count();
      }
      EXPECT_LE(last, 5.0);
    }
  }
}

TEST(Coalescent, TwoBlocksKingmanIsExponential) {
  const auto t = build_rate_table(LambdaMeasure::kingman(), 2);
  std::vector<double> times;
  for (int rep = 0; rep < 5000; ++rep) {
    const auto path = simulate_coalescent(t, 2, 1e9, 17, rep);
    ASSERT_EQ(path.events.size(), 1u);
    EXPECT_EQ(path.events[0].after.to_string(), "{1,2}");
    times.push_back(path.events[0].time);
  }
  EXPECT_GT(ks_one_sample(times, [](double x) { return 1 - std::exp(-x); }).p_value, 0.01);
}

TEST(Coalescent, FirstKingmanMergeIsUniformPair) {
  const auto t = build_rate_table(LambdaMeasure::kingman(), 3);
  std::map<std::string, int> counts;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    ++counts[simulate_coalescent(t, 3, 1e9, 5, rep).events.at(0).after.to_string()];
  }
  ASSERT_EQ(counts.size(), 3u);
  const double sigma = std::sqrt(reps * (1.0 / 3) * (2.0 / 3));
  for (const auto& [p, c] : counts) EXPECT_NEAR(c, reps / 3.0, 3 * sigma) << p;
}

TEST(Coalescent, MergeSizeDistribution) {
  const auto t = build_rate_table(LambdaMeasure::uniform(), 10);
  const MergeKernel kernel(t, 10);
  double sum = 0;
  for (int k = 2; k <= 10; ++k) {
    EXPECT_NEAR(kernel.probability(10, k), binomial(10, k) * t(10, k) / total_rate(t, 10), 1e-12);
    sum += kernel.probability(10, k);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Coalescent, Deterministic) {
  const auto t = build_rate_table(LambdaMeasure::beta(1.5), 30);
  const auto a = simulate_coalescent(t, 30, 2.0, 8, 4);
  const auto b = simulate_coalescent(t, 30, 2.0, 8, 4);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].time, b.events[i].time);
    EXPECT_EQ(a.events[i].after, b.events[i].after);
  }
}

TEST(Coalescent, NullMeasureIsDegenerate) {
  const auto t = build_rate_table(LambdaMeasure::null(), 5);
  const auto path = simulate_coalescent(t, 5, 1.0, 1, 0);
  EXPECT_TRUE(path.events.empty());
  EXPECT_TRUE(path.degenerate);
  EXPECT_EQ(block_count_path(path).final_value(), 5);
}

TEST(BlockCount, Examples) {
  const BlockCountPath empty(5, {});
  EXPECT_EQ(empty.at(0.0), 5);
  EXPECT_EQ(empty.at(100.0), 5);
  const BlockCountPath one(5, {{0.2, 3}});
  EXPECT_EQ(one.at(0.1999), 5);
  EXPECT_EQ(one.at(0.2), 3);
  EXPECT_EQ(one.at(7.0), 3);
  const auto t = build_rate_table(LambdaMeasure::uniform(), 12);
  for (int rep = 0; rep < 20; ++rep) {
    EXPECT_GE(block_count_path(simulate_coalescent(t, 12, 50.0, 2, rep)).final_value(), 1);
  }
}

TEST(Stats, ChiSquareAndKsSanity) {
  EXPECT_NEAR(chi_square_survival(3.841458820694124, 1), 0.05, 1e-9);
  EXPECT_NEAR(kolmogorov_survival(1.3580986393225505), 0.05, 1e-6);
  const auto same = chi_square_homogeneity({100, 200, 300}, {100, 200, 300});
  EXPECT_DOUBLE_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.dof, 2);
  const auto diff = chi_square_homogeneity({500, 100}, {100, 500});
  EXPECT_LT(diff.p_value, 1e-10);
}

#include <gtest/gtest.h>

#include <cmath>

#include "lfv/errors.hpp"
#include "lfv/measures.hpp"
#include "lfv/rng.hpp"

using namespace lfv;

TEST(Measures, TotalMassExamples) {
  EXPECT_DOUBLE_EQ(total_mass(LambdaMeasure::kingman()), 1.0);
  EXPECT_NEAR(total_mass(LambdaMeasure::uniform()), 1.0, 1e-10);
  EXPECT_NEAR(total_mass(LambdaMeasure::beta(1.5)), 1.0, 1e-10);
  EXPECT_NEAR(total_mass(LambdaMeasure::beta(0.5)), 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(total_mass(LambdaMeasure::null()), 0.0);
}

TEST(Measures, KingmanMomentsEvaluateAtZero) {
  const auto k = LambdaMeasure::kingman();
  for (int b = 2; b <= 12; ++b) {
    EXPECT_DOUBLE_EQ(moment_integral(k, [b](double x) { return std::pow(1 - x, b - 2); }), 1.0);
    for (int j = 3; j <= b; ++j) {
      EXPECT_DOUBLE_EQ(
          moment_integral(k, [b, j](double x) { return std::pow(x, j - 2) * std::pow(1 - x, b - j); }),
          0.0);
    }
  }
}

TEST(Measures, UniformLinearMoment) {
  EXPECT_NEAR(moment_integral(LambdaMeasure::uniform(), [](double x) { return 1 - x; }), 0.5,
              1e-10);
}

TEST(Measures, ConstantMomentEqualsMass) {
  const double tol = 1e-10;
  for (const auto& m : {LambdaMeasure::kingman(), LambdaMeasure::uniform(0.2, 0.3),
                        LambdaMeasure::beta(0.5), LambdaMeasure::beta(1.5, 0.1),
                        LambdaMeasure::piecewise_linear({{0.0, 1.0}, {1.0, 3.0}})}) {
    EXPECT_NEAR(moment_integral(m, [](double) { return 1.0; }, tol), total_mass(m, tol), 2 * tol);
  }
}

TEST(Measures, BetaMomentsMatchBetaFunction) {
  for (double beta : {0.3, 0.5, 1.0, 1.5, 1.8}) {
    const auto m = LambdaMeasure::beta(beta);
    for (int b = 2; b <= 10; ++b) {
      for (int k = 2; k <= b; ++k) {
        const double exact = std::exp(log_beta_function(k - beta, b - k + beta) -
                                      log_beta_function(2 - beta, beta));
        const double got = moment_integral(
            m, [b, k](double x, double y) { return std::pow(x, k - 2) * std::pow(y, b - k); });
        EXPECT_NEAR(got, exact, 1e-10) << "beta=" << beta << " b=" << b << " k=" << k;
      }
    }
  }
}

TEST(Measures, MomentIsLinear) {
  const double tol = 1e-10;
  Stream rng = stream_for(11, 0, StreamRole::Comparison);
  const auto m = LambdaMeasure::beta(1.2, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    double p[4], q[4];
    for (int i = 0; i < 4; ++i) {
      p[i] = rng.uniform_open() * 4 - 2;
      q[i] = rng.uniform_open() * 4 - 2;
    }
    auto poly = [](const double* c) {
      return [c0 = c[0], c1 = c[1], c2 = c[2], c3 = c[3]](double x) {
        return c0 + x * (c1 + x * (c2 + x * c3));
      };
    };
    const auto f = poly(p), g = poly(q);
    const double sum = moment_integral(m, [&](double x) { return f(x) + g(x); }, tol);
    EXPECT_LE(std::abs(sum - moment_integral(m, f, tol) - moment_integral(m, g, tol)), 3 * tol);
  }
}

TEST(Measures, Validation) {
  EXPECT_THROW(LambdaMeasure::beta(0.0), InvalidMeasure);
  EXPECT_THROW(LambdaMeasure::beta(2.0), InvalidMeasure);
  EXPECT_THROW(LambdaMeasure::kingman(-1.0), InvalidMeasure);
  EXPECT_THROW(LambdaMeasure::uniform(0.0, -0.5), InvalidMeasure);
}

TEST(Measures, SingularFunctionAtAtomThrows) {
  EXPECT_THROW(moment_integral(LambdaMeasure::kingman(), [](double x) { return 1.0 / x; }),
               SingularEndpoint);
}

TEST(Measures, BetaDensityShape) {
  const auto m = LambdaMeasure::beta(1.5);
  const double norm = std::exp(-log_beta_function(0.5, 1.5));
  EXPECT_NEAR(m.density(0.25), norm * std::pow(0.25, -0.5) * std::pow(0.75, 0.5), 1e-12);
}

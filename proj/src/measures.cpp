#include "lfv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lfv/errors.hpp"

namespace lfv {

std::string to_string(MeasureFamily family) {
  switch (family) {
    case MeasureFamily::Kingman: return "kingman";
    case MeasureFamily::Beta: return "beta";
    case MeasureFamily::Uniform: return "uniform";
    case MeasureFamily::Custom: return "custom";
  }
  return "unknown";
}

double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

void check_atoms(double atom0, double atom1) {
  if (!(atom0 >= 0.0) || !std::isfinite(atom0)) {
    throw InvalidMeasure("atom0 must be a finite nonnegative number");
  }
  if (!(atom1 >= 0.0) || !std::isfinite(atom1)) {
    throw InvalidMeasure("atom1 must be a finite nonnegative number");
  }
}

void check_density_sign(const Density& density) {
  constexpr int kSamples = 257;
  for (int i = 1; i < kSamples; ++i) {
    const double x = static_cast<double>(i) / kSamples;
    const double v = density(x, 1.0 - x);
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << "density is negative or undefined at x = " << x;
      throw InvalidMeasure(os.str());
    }
  }
}

}  // namespace

LambdaMeasure LambdaMeasure::kingman(double atom0) {
  check_atoms(atom0, 0.0);
  LambdaMeasure m;
  m.family_ = MeasureFamily::Kingman;
  m.atom0_ = atom0;
  m.description_ = "kingman";
  return m;
}

LambdaMeasure LambdaMeasure::beta(double beta, double atom0, double atom1) {
  if (!(beta > 0.0 && beta < 2.0)) {
    throw InvalidMeasure("beta must lie in (0,2)");
  }
  check_atoms(atom0, atom1);
  LambdaMeasure m;
  m.family_ = MeasureFamily::Beta;
  m.atom0_ = atom0;
  m.atom1_ = atom1;
  m.beta_ = beta;
  const double log_norm = -log_beta_function(2.0 - beta, beta);
  m.density_ = [beta, log_norm](double x, double u) {
    return std::exp(log_norm + (1.0 - beta) * std::log(x) +
                    (beta - 1.0) * std::log(u));
  };
  std::ostringstream os;
  os << "beta(" << beta << ")";
  m.description_ = os.str();
  return m;
}

LambdaMeasure LambdaMeasure::uniform(double atom0, double atom1) {
  check_atoms(atom0, atom1);
  LambdaMeasure m;
  m.family_ = MeasureFamily::Uniform;
  m.atom0_ = atom0;
  m.atom1_ = atom1;
  m.beta_ = 1.0;
  m.density_ = [](double, double) { return 1.0; };
  m.description_ = "uniform";
  return m;
}

LambdaMeasure LambdaMeasure::custom(Density density, double atom0, double atom1,
                                    std::string description) {
  check_atoms(atom0, atom1);
  LambdaMeasure m;
  m.family_ = MeasureFamily::Custom;
  m.atom0_ = atom0;
  m.atom1_ = atom1;
  if (density) {
    check_density_sign(density);
    m.density_ = std::move(density);
  }
  m.description_ = std::move(description);
  return m;
}

LambdaMeasure LambdaMeasure::piecewise_linear(
    std::vector<std::pair<double, double>> knots, double atom0, double atom1) {
  if (knots.empty()) {
    throw InvalidMeasure("density table needs at least one knot");
  }
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [x, v] = knots[i];
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidMeasure("density table abscissae must lie in [0,1]");
    }
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidMeasure("density table values must be finite and nonnegative");
    }
    if (i > 0 && knots[i - 1].first == x) {
      throw InvalidMeasure("density table abscissae must be distinct");
    }
  }
  auto table = knots;
  Density density = [table](double x, double) {
    if (x <= table.front().first) return table.front().second;
    if (x >= table.back().first) return table.back().second;
    auto it = std::upper_bound(
        table.begin(), table.end(), x,
        [](double value, const auto& knot) { return value < knot.first; });
    const auto& [x1, v1] = *it;
    const auto& [x0, v0] = *(it - 1);
    const double w = (x - x0) / (x1 - x0);
    return v0 + w * (v1 - v0);
  };
  auto m = custom(std::move(density), atom0, atom1, "piecewise-linear");
  m.knots_ = std::move(knots);
  return m;
}

LambdaMeasure LambdaMeasure::null() {
  LambdaMeasure m;
  m.family_ = MeasureFamily::Custom;
  m.description_ = "null";
  return m;
}

double LambdaMeasure::density(double x, double one_minus_x) const {
  return density_ ? density_(x, one_minus_x) : 0.0;
}

std::optional<double> LambdaMeasure::density_power_moment(double a, double c) const {
  switch (family_) {
    case MeasureFamily::Kingman:
      return 0.0;
    case MeasureFamily::Uniform:
      return std::exp(log_beta_function(a + 1.0, c + 1.0));
    case MeasureFamily::Beta:
      return std::exp(log_beta_function(a + 2.0 - beta_, c + beta_) -
                      log_beta_function(2.0 - beta_, beta_));
    case MeasureFamily::Custom:
      if (!density_) return 0.0;
      return std::nullopt;
  }
  return std::nullopt;
}

bool LambdaMeasure::is_zero() const noexcept {
  return atom0_ == 0.0 && atom1_ == 0.0 && !density_;
}

QuadratureResult density_integral(const LambdaMeasure& measure,
                                  const MomentIntegrand& f,
                                  const QuadratureOptions& opts) {
  if (!measure.has_density()) return QuadratureResult{};
  return integrate_unit(
      [&](double x, double u) {
        const double w = measure.density(x, u);
        if (w == 0.0) return 0.0;
        return f(x, u) * w;
      },
      opts);
}

double moment_integral(const LambdaMeasure& measure, const MomentIntegrand& f,
                       double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  double result = 0.0;
  if (measure.atom0() > 0.0) {
    const double f0 = f(0.0, 1.0);
    if (!std::isfinite(f0)) {
      throw SingularEndpoint("integrand has no finite value at x = 0, which carries an atom");
    }
    result += f0 * measure.atom0();
  }
  if (measure.atom1() > 0.0) {
    const double f1 = f(1.0, 0.0);
    if (!std::isfinite(f1)) {
      throw SingularEndpoint("integrand has no finite value at x = 1, which carries an atom");
    }
    result += f1 * measure.atom1();
  }
  QuadratureOptions opts;
  opts.abs_tol = tol;
  result += density_integral(measure, f, opts).value;
  return result;
}

double moment_integral(const LambdaMeasure& measure,
                       const std::function<double(double)>& f, double tol) {
  return moment_integral(
      measure, MomentIntegrand([&f](double x, double) { return f(x); }), tol);
}

double total_mass(const LambdaMeasure& measure, double tol) {
  return moment_integral(
      measure, MomentIntegrand([](double, double) { return 1.0; }), tol);
}

}  // namespace lfv

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfv/quadrature.hpp"

namespace lfv {

inline constexpr double kDefaultTol = 1e-10;

enum class MeasureFamily { Kingman, Beta, Uniform, Custom };

std::string to_string(MeasureFamily family);

// Density on (0,1), evaluated as density(x, 1 - x).
using Density = std::function<double(double x, double one_minus_x)>;

// A finite measure on [0,1]: point masses at 0 and 1 plus an absolutely
// continuous part. Immutable once built.
class LambdaMeasure {
 public:
  // delta_0 scaled by `atom0`.
  static LambdaMeasure kingman(double atom0 = 1.0);
  // Beta(2 - beta, beta) probability density, beta in (0,2), plus atoms.
  static LambdaMeasure beta(double beta, double atom0 = 0.0, double atom1 = 0.0);
  // Lebesgue measure on (0,1) plus atoms.
  static LambdaMeasure uniform(double atom0 = 0.0, double atom1 = 0.0);
  static LambdaMeasure custom(Density density, double atom0, double atom1,
                              std::string description = "custom");
  // Piecewise-linear density through (x, value) knots; constant beyond the
  // first and last knot.
  static LambdaMeasure piecewise_linear(std::vector<std::pair<double, double>> knots,
                                        double atom0 = 0.0, double atom1 = 0.0);
  // The zero measure (no reproduction at all).
  static LambdaMeasure null();

  MeasureFamily family() const noexcept { return family_; }
  double atom0() const noexcept { return atom0_; }
  double atom1() const noexcept { return atom1_; }
  // Only meaningful for the Beta family.
  double beta_parameter() const noexcept { return beta_; }
  bool has_density() const noexcept { return static_cast<bool>(density_); }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }
  const std::string& description() const noexcept { return description_; }

  double density(double x, double one_minus_x) const;
  double density(double x) const { return density(x, 1.0 - x); }

  // Closed form of the density integral of x^a (1-x)^c for the Beta and
  // Uniform families; empty for Custom.
  std::optional<double> density_power_moment(double a, double c) const;

  bool is_zero() const noexcept;

 private:
  LambdaMeasure() = default;

  MeasureFamily family_ = MeasureFamily::Custom;
  double atom0_ = 0.0;
  double atom1_ = 0.0;
  double beta_ = 0.0;
  Density density_;
  std::vector<std::pair<double, double>> knots_;
  std::string description_;
};

// Integrand evaluated as f(x, 1 - x); its values at x = 0 and x = 1 weight
// the atoms.
using MomentIntegrand = std::function<double(double x, double one_minus_x)>;

// atom0 + atom1 + integral of the density. Throws QuadratureDivergence.
double total_mass(const LambdaMeasure& measure, double tol = kDefaultTol);

// f(0) atom0 + f(1) atom1 + integral of f * density over (0,1).
// Throws SingularEndpoint when f is not finite at an endpoint carrying an
// atom, and QuadratureDivergence when the density part does not converge.
double moment_integral(const LambdaMeasure& measure, const MomentIntegrand& f,
                       double tol = kDefaultTol);
double moment_integral(const LambdaMeasure& measure,
                       const std::function<double(double)>& f,
                       double tol = kDefaultTol);

// Density part only (no atoms), by quadrature.
QuadratureResult density_integral(const LambdaMeasure& measure,
                                  const MomentIntegrand& f,
                                  const QuadratureOptions& opts);

// log of the Beta function.
double log_beta_function(double a, double b);

}  // namespace lfv

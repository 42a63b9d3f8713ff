#include "lfv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lfv/errors.hpp"

namespace lfv {
namespace {

// Kronrod abscissae and weights for the 21-point rule, Gauss weights for the
// embedded 10-point rule (QUADPACK qk21).
constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525966788, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  double abs_value;
  bool mirrored;  // true: local coordinate is 1 - x
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk21(const F& g, double lo, double hi, bool mirrored) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = g(center);
  double resg = 0.0;
  double resk = fc * kWgk[10];
  double resabs = std::abs(resk);
  double fv1[10];
  double fv2[10];
  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return Panel{lo, hi, result, err, resabs, mirrored};
}

template <class Eval>
QuadratureResult run_adaptive(const Eval& eval, std::vector<Panel> heap,
                              const QuadratureOptions& opts) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto check_finite = [](const Panel& p) {
    if (!std::isfinite(p.value) || !std::isfinite(p.error)) {
      throw QuadratureDivergence("integrand is not finite on a panel");
    }
  };
  for (const auto& p : heap) check_finite(p);
  std::make_heap(heap.begin(), heap.end());

  double total_err = 0.0;
  for (const auto& p : heap) total_err += p.error;
  for (;;) {
    const int count = static_cast<int>(heap.size());
    double total = 0.0;
    double total_abs = 0.0;
    for (const auto& p : heap) {
      total += p.value;
      total_abs += p.abs_value;
    }
    const double target =
        std::max({opts.abs_tol, opts.rel_tol * std::abs(total),
                  200.0 * eps * total_abs});
    if (total_err <= target) {
      // Confirm with an exact resum before accepting.
      double exact_err = 0.0;
      for (const auto& p : heap) exact_err += p.error;
      total_err = exact_err;
      if (exact_err <= target) {
        return QuadratureResult{total, exact_err, count};
      }
    }
    if (count >= opts.max_panels) {
      throw QuadratureDivergence(
          "adaptive quadrature did not converge: error estimate " +
          std::to_string(total_err) + " above target " +
          std::to_string(target));
    }
    const int batch = std::max(1, std::min(64, count / 8));
    for (int b = 0; b < batch; ++b) {
      std::pop_heap(heap.begin(), heap.end());
      const Panel worst = heap.back();
      heap.pop_back();
      const double mid = 0.5 * (worst.lo + worst.hi);
      if (!(mid > worst.lo && mid < worst.hi)) {
        throw QuadratureDivergence(
            "adaptive quadrature exhausted floating point resolution");
      }
      Panel left = eval(worst.lo, mid, worst.mirrored);
      Panel right = eval(mid, worst.hi, worst.mirrored);
      check_finite(left);
      check_finite(right);
      total_err += left.error + right.error - worst.error;
      heap.push_back(left);
      std::push_heap(heap.begin(), heap.end());
      heap.push_back(right);
      std::push_heap(heap.begin(), heap.end());
    }
  }
}

}  // namespace

QuadratureResult integrate_unit(const UnitIntegrand& f,
                                const QuadratureOptions& opts) {
  // Local coordinate t in (0, 1/2]: x = t for the left half, x = 1 - t for the
  // mirrored right half.
  auto eval = [&f](double lo, double hi, bool mirrored) {
    if (mirrored) {
      return gk21([&f](double t) { return f(1.0 - t, t); }, lo, hi, true);
    }
    return gk21([&f](double t) { return f(t, 1.0 - t); }, lo, hi, false);
  };
  constexpr int kLevels = 24;
  std::vector<Panel> panels;
  panels.reserve(2 * (kLevels + 1));
  for (bool mirrored : {false, true}) {
    double hi = 0.5;
    for (int level = 0; level < kLevels; ++level) {
      const double lo = 0.5 * hi;
      panels.push_back(eval(lo, hi, mirrored));
      hi = lo;
    }
    panels.push_back(eval(0.0, hi, mirrored));
  }
  return run_adaptive(eval, std::move(panels), opts);
}

QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts,
                                    bool geometric_breaks) {
  if (!(b > a)) {
    if (a == b) return QuadratureResult{0.0, 0.0, 0};
    throw DomainError("integrate_interval requires a <= b");
  }
  auto eval = [&f](double lo, double hi, bool) {
    return gk21(f, lo, hi, false);
  };
  std::vector<double> breaks{a};
  if (geometric_breaks && a > 0.0) {
    for (double x = 2.0 * a; x < b; x *= 2.0) breaks.push_back(x);
  }
  breaks.push_back(b);
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    panels.push_back(eval(breaks[i], breaks[i + 1], false));
  }
  return run_adaptive(eval, std::move(panels), opts);
}

}  // namespace lfv

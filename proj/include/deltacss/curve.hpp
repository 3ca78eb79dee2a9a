#pragma once

// The plane curve f = y^3 + c x^2 y - x^4: singular at the origin in the algebraic sense,
// yet a manifold point since near 0 it is the graph of one analytic branch.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "deltacss/errors.hpp"

namespace deltacss::curve {

/// Coefficient of x^2 y. The text's example uses 1, the figure caption 2.
inline constexpr double kDefaultCoefficient = 1.0;

inline double curve_eval(double x, double y, double c = kDefaultCoefficient) {
  const double x2 = x * x;
  return y * y * y + c * x2 * y - x2 * x2;
}

/// Roots u > 0 > v (for y > 0) of X^2 - c y X - y^3 in X = x^2: u, v = y(c +- sqrt(c^2 + 4y))/2.
inline std::pair<double, double> factor_roots(double y, double c = kDefaultCoefficient) {
  const double disc = c * c + 4.0 * y;
  if (disc < 0.0) throw DomainError("factor roots need y > -c^2/4");
  const double root = std::sqrt(disc);
  return {0.5 * y * (c + root), 0.5 * y * (c - root)};
}

/// y with x^2 = u(y): the real branch of f = 0 through the origin, for |x| < 0.5.
inline double branch(double x, double c = kDefaultCoefficient) {
  if (!(std::abs(x) < 0.5)) throw DomainError("branch is only defined for |x| < 0.5");
  if (!(c > 0.0)) throw DomainError("branch needs a positive x^2 y coefficient");
  const double x2 = x * x;
  if (x2 == 0.0) return 0.0;
  // u(y) = x^2 has its root in (0, x^2/c] since u(y) >= c y there.
  auto g = [x2, c](double y) { return factor_roots(y, c).first - x2; };
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      g, 0.0, x2 / c, boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1),
      iters);
  return 0.5 * (lo + hi);
}

/// max |f + (x^2 - u(y))(x^2 - v(y))| over the grid xs x ys.
inline double factor_identity_residual(const std::vector<double>& xs, const std::vector<double>& ys,
                                       double c = kDefaultCoefficient) {
  double worst = 0.0;
  for (double y : ys) {
    const auto [u, v] = factor_roots(y, c);
    for (double x : xs) {
      const double x2 = x * x;
      worst = std::max(worst, std::abs(curve_eval(x, y, c) + (x2 - u) * (x2 - v)));
    }
  }
  return worst;
}

/// max |f - (x^2 - y(1 + sqrt(1 + y)))(x^2 + y(1 + sqrt(1 + y)))| over the grid, the
/// factorization as printed with coefficient 1.
inline double printed_factor_residual(const std::vector<double>& xs, const std::vector<double>& ys) {
  double worst = 0.0;
  for (double y : ys) {
    if (y < -1.0) throw DomainError("printed factors need y >= -1");
    const double w = y * (1.0 + std::sqrt(1.0 + y));
    for (double x : xs) {
      const double x2 = x * x;
      worst = std::max(worst, std::abs(curve_eval(x, y, 1.0) - (x2 - w) * (x2 + w)));
    }
  }
  return worst;
}

/// `count` equally spaced values over [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw InputError("linspace needs a positive count");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (count - 1);
  return out;
}

struct CurveSample {
  double x = 0.0;
  double y = 0.0;
  double residual = 0.0;
};

/// `count` points (x, branch(x)) ordered by x over [-range, range], always including (0, 0).
/// Odd counts are symmetric about 0; even counts put the extra point on the right.
inline std::vector<CurveSample> emit_plot_samples(double range, int count, double c = kDefaultCoefficient) {
  if (!(range > 0.0 && range < 0.5)) throw DomainError("plot range must lie in (0, 0.5)");
  if (count < 1) throw InputError("sample count must be positive");
  const int left = (count - 1) / 2;
  const int right = count - 1 - left;
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (int k = left; k >= 1; --k) xs.push_back(-range * k / left);
  xs.push_back(0.0);
  for (int k = 1; k <= right; ++k) xs.push_back(range * k / right);
  std::vector<CurveSample> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const double y = branch(x, c);
    out.push_back({x, y, curve_eval(x, y, c)});
  }
  return out;
}

}  // namespace deltacss::curve

#pragma once

// Independent reference computations for the test suite. Nothing here calls into the
// library's residual, geometry or root-finding code.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;

// Table values evaluated in 40-digit arithmetic, rounded to 17 significant digits.
inline const std::array<std::array<double, 15>, 4> kTable_3_5_05 = {{
    {-0.80064076902543567, -1.3867504905630728, 4.7366546671567092, -0.80064076902543567,
     1.3867504905630728, 4.7366546671567092, 1.6012815380508713, 0, 4.7366546671567092, -0.5,
     2.958039891549808, -0.5, 2.958039891549808, -0.5, 2.958039891549808},
    {0.80064076902543567, 1.3867504905630728, 4.7366546671567092, 0.80064076902543567,
     -1.3867504905630728, 4.7366546671567092, -1.6012815380508713, 0, 4.7366546671567092, -0.5,
     -2.958039891549808, -0.5, -2.958039891549808, -0.5, -2.958039891549808},
    {0.80064076902543567, 1.3867504905630728, 4.7366546671567092, 0.80064076902543567,
     -1.3867504905630728, 4.7366546671567092, -4.936093088592484, 0, 0.79685947365235725, -0.5,
     -2.958039891549808, -0.5, -2.958039891549808, 2.8348115505416127, 0.98175530195454396},
    {-0.80064076902543567, -1.3867504905630728, 4.7366546671567092, -0.80064076902543567,
     1.3867504905630728, 4.7366546671567092, -0.20837188705004917, 0, 4.9956562288339258, -0.5,
     2.958039891549808, -0.5, 2.958039891549808, 1.3096534251009205, 2.6990383298725914},
}};

inline const std::array<std::array<double, 15>, 4> kTable_2_3_025 = {{
    {-0.36650833306891567, -0.63481105427273844, 2.9090697081995438, -0.36650833306891567,
     0.63481105427273844, 2.9090697081995438, 0.73301666613783134, 0, 2.9090697081995438, -0.25,
     1.9843134832984429, -0.25, 1.9843134832984429, -0.25, 1.9843134832984429},
    {0.36650833306891567, 0.63481105427273844, 2.9090697081995438, 0.36650833306891567,
     -0.63481105427273844, 2.9090697081995438, -0.73301666613783134, 0, 2.9090697081995438, -0.25,
     -1.9843134832984429, -0.25, -1.9843134832984429, -0.25, -1.9843134832984429},
    {0.36650833306891567, 0.63481105427273844, 2.9090697081995438, 0.36650833306891567,
     -0.63481105427273844, 2.9090697081995438, -2.9483774648184926, 0, 0.55413926494201672, -0.25,
     -1.9843134832984429, -0.25, -1.9843134832984429, 1.9653607986806612, 0.37061695995908417},
    {-0.36650833306891567, -0.63481105427273844, 2.9090697081995438, -0.36650833306891567,
     0.63481105427273844, 2.9090697081995438, -0.15011444401824385, 0, 2.9962419217575028, -0.25,
     1.9843134832984429, -0.25, 1.9843134832984429, 0.63313111015607519, 1.897141269740484},
}};

inline constexpr double kUq4_3_5_05 = 188.66496597277277;
inline constexpr double kUq3_3_5_05 = 23.664965972772769;
inline constexpr double kBranchAt03 = 0.083525397096542985;
inline constexpr double kCubicRootAt1 = 0.68232780382801933;
inline constexpr double kExcludedB_1_09 = 0.77212742343313562;

inline Vec to_vec(const std::array<double, 15>& a) {
  return Eigen::Map<const Vec>(a.data(), 15);
}

/// The twelve Delta equations written out coordinate by coordinate.
inline Vec delta_equations(const Vec& x, double a, double b, double d) {
  const double c = -0.5;
  const double s = std::sqrt(3.0) / 2.0;
  Vec f(12);
  double vx[3], vy[3], vz[3];
  for (int i = 0; i < 3; ++i) {
    const double px = x(3 * i), py = x(3 * i + 1), pz = x(3 * i + 2);
    const double ca = x(9 + 2 * i), sa = x(10 + 2 * i);
    f(i) = px * px + py * py + pz * pz - b * b;
    f(3 + i) = ca * ca + sa * sa - a * a;
    vx[i] = d + ca + px;
    vy[i] = py;
    vz[i] = pz + sa;
  }
  // v1 - A v2 with A the +120 degree rotation, v1 - A^T v3.
  f(6) = vx[0] - (c * vx[1] - s * vy[1]);
  f(7) = vy[0] - (s * vx[1] + c * vy[1]);
  f(8) = vz[0] - vz[1];
  f(9) = vx[0] - (c * vx[2] + s * vy[2]);
  f(10) = vy[0] - (-s * vx[2] + c * vy[2]);
  f(11) = vz[0] - vz[2];
  return f;
}

/// Central-difference Jacobian of delta_equations.
inline Eigen::MatrixXd delta_jacobian_fd(const Vec& x, double a, double b, double d, double h = 1e-6) {
  Eigen::MatrixXd j(12, 15);
  for (int k = 0; k < 15; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (delta_equations(xp, a, b, d) - delta_equations(xm, a, b, d)) / (2 * h);
  }
  return j;
}

/// Real root of y^3 + p y + q with p > 0 (Cardano).
inline double cardano_single_root(double p, double q) {
  const double disc = std::sqrt(q * q / 4 + p * p * p / 27);
  return std::cbrt(-q / 2 + disc) + std::cbrt(-q / 2 - disc);
}

/// All real solutions of |z|^2 = r0^2, |z - c|^2 = r^2 by Newton from a grid of starts.
inline std::vector<Eigen::Vector2d> circle_pair_brute_force(const Eigen::Vector2d& c, double r0, double r) {
  std::vector<Eigen::Vector2d> roots;
  const double span = r0 + 1.0;
  for (int gi = 0; gi < 13; ++gi) {
    for (int gj = 0; gj < 13; ++gj) {
      Eigen::Vector2d z(-span + 2 * span * gi / 12.0, -span + 2 * span * gj / 12.0);
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        const Eigen::Vector2d g(z.squaredNorm() - r0 * r0, (z - c).squaredNorm() - r * r);
        Eigen::Matrix2d jac;
        jac.row(0) = 2 * z.transpose();
        jac.row(1) = 2 * (z - c).transpose();
        if (std::abs(jac.determinant()) < 1e-14) break;
        const Eigen::Vector2d step = jac.fullPivLu().solve(g);
        z -= step;
        if (step.norm() < 1e-15 * (1 + z.norm())) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const double res = std::abs(z.squaredNorm() - r0 * r0) + std::abs((z - c).squaredNorm() - r * r);
      if (res > 1e-10) continue;
      bool seen = false;
      for (const auto& q : roots) seen = seen || (q - z).norm() < 1e-7;
      if (!seen) roots.push_back(z);
    }
  }
  return roots;
}

}  // namespace oracle

#pragma once

// Dense linear algebra helpers with explicit tolerance semantics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "deltacss/errors.hpp"

namespace deltacss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct ToleranceConfig {
  double rank_rel_tol = 1e-8;
  double residual_tol = 1e-9;
  double fd_step = 1e-5;
  double branch_match_tol = 1e-6;

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(rank_rel_tol) || !positive(residual_tol) || !positive(fd_step) ||
        !positive(branch_match_tol)) {
      throw InputError("tolerances must be finite and strictly positive");
    }
    if (rank_rel_tol >= 1.0) {
      throw InputError("rank_rel_tol must be < 1");
    }
  }
};

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what = "matrix") {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
}

/// Singular values in descending order.
inline Vector singular_values(const Eigen::Ref<const Matrix>& m) {
  require_finite(m);
  if (m.size() == 0) {
    return Vector();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline int rank_from_singular_values(const Vector& sv, const ToleranceConfig& tol) {
  if (sv.size() == 0 || sv(0) == 0.0) {
    return 0;
  }
  const double cutoff = tol.rank_rel_tol * sv(0);
  return static_cast<int>((sv.array() > cutoff).count());
}

/// Number of singular values above rank_rel_tol times the largest one.
inline int numerical_rank(const Eigen::Ref<const Matrix>& m, const ToleranceConfig& tol = {}) {
  return rank_from_singular_values(singular_values(m), tol);
}

/// Orthonormal basis of the numerical null space, one vector per column.
inline Matrix kernel_basis(const Eigen::Ref<const Matrix>& m, const ToleranceConfig& tol = {}) {
  require_finite(m);
  const auto cols = m.cols();
  if (m.rows() == 0) {
    return Matrix::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const int rank = rank_from_singular_values(svd.singularValues(), tol);
  return svd.matrixV().rightCols(cols - rank);
}

/// Numerical rank of the matrix whose columns are `vectors`.
inline int span_dimension(const std::vector<Vector>& vectors, const ToleranceConfig& tol = {}) {
  if (vectors.empty()) {
    throw InputError("span_dimension needs at least one vector");
  }
  const auto n = vectors.front().size();
  Matrix cols(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != n) {
      throw InputError("span_dimension: vectors of unequal length");
    }
    cols.col(static_cast<Eigen::Index>(k)) = vectors[k];
  }
  return numerical_rank(cols, tol);
}

/// Richardson-extrapolated central difference over steps h and h/2; O(h^4) for smooth paths.
template <typename Path>
Vector central_difference_tangent(const Path& path, double t0, const ToleranceConfig& tol = {}) {
  const double h = tol.fd_step;
  auto central = [&](double step) -> Vector {
    Vector plus = path(t0 + step);
    Vector minus = path(t0 - step);
    return (plus - minus) / (2.0 * step);
  };
  const Vector coarse = central(h);
  const Vector fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

/// Scalar convenience overload.
template <typename Fn>
double central_difference(const Fn& fn, double t0, double h) {
  auto central = [&](double step) { return (fn(t0 + step) - fn(t0 - step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

/// Central-difference Jacobian of a vector map, used as an oracle for analytic Jacobians.
template <typename Fn>
Matrix finite_difference_jacobian(const Fn& fn, const Vector& x, double h) {
  const Vector f0 = fn(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector xp = x;
    Vector xm = x;
    xp(k) += h;
    xm(k) -= h;
    jac.col(k) = (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return jac;
}

/// Unit vector orthogonal to `v` (deterministic choice).
inline Vec3 any_orthogonal(const Vec3& v) { return v.unitOrthogonal(); }

/// Rotation of `x` about the unit axis `k` by `angle` (Rodrigues).
inline Vec3 rotate_about(const Vec3& x, const Vec3& k, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return x * c + k.cross(x) * s + k * (k.dot(x)) * (1.0 - c);
}

inline double normalize_angle(double angle) {
  double r = std::remainder(angle, 2.0 * M_PI);
  if (r <= -M_PI) {
    r += 2.0 * M_PI;
  }
  return r;
}

}  // namespace deltacss

#pragma once

// The order-6 symmetry group acting on Delta configurations by signed block
// permutations: r cycles the three limbs, s mirrors every limb in its z axis
// (z_i -> -z_i, sa_i -> -sa_i).
//
// Both generators act blockwise with identical blocks, so Psi(r) and Psi(s)
// commute. Group elements therefore compose as r^i s^j * r^k s^l = r^(i+k) s^(j+l).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"

namespace deltacss {

/// Normal form r^rot s^refl with rot in {0,1,2}, refl in {0,1}.
struct GroupElement {
  int rot = 0;
  int refl = 0;

  static GroupElement identity() { return {0, 0}; }
  static GroupElement r() { return {1, 0}; }
  static GroupElement s() { return {0, 1}; }

  [[nodiscard]] GroupElement operator*(const GroupElement& o) const {
    return {(rot + o.rot) % 3, (refl + o.refl) % 2};
  }
  [[nodiscard]] GroupElement inverse() const { return {(3 - rot) % 3, refl}; }
  [[nodiscard]] bool is_identity() const { return rot == 0 && refl == 0; }
  /// Position in all_elements().
  [[nodiscard]] int index() const { return 2 * rot + refl; }

  [[nodiscard]] std::string name() const {
    if (is_identity()) return "e";
    std::string out;
    if (rot == 1) out += "r";
    if (rot == 2) out += "r2";
    if (refl == 1) out += "s";
    return out;
  }

  friend bool operator==(const GroupElement& l, const GroupElement& r) {
    return l.rot == r.rot && l.refl == r.refl;
  }
};

/// e, s, r, rs, r2, r2s
inline std::array<GroupElement, 6> all_elements() {
  return {GroupElement{0, 0}, GroupElement{0, 1}, GroupElement{1, 0},
          GroupElement{1, 1}, GroupElement{2, 0}, GroupElement{2, 1}};
}

using Rep15 = Eigen::Matrix<int, 15, 15>;

/// Signed permutation matrix of g.
inline Rep15 representation(const GroupElement& g) {
  Rep15 rot = Rep15::Zero();
  // (B1,B2,B3,A1,A2,A3) -> (B2,B3,B1,A2,A3,A1)
  for (int i = 0; i < 3; ++i) {
    const int src = (i + 1) % 3;
    for (int k = 0; k < 3; ++k) rot(3 * i + k, 3 * src + k) = 1;
    for (int k = 0; k < 2; ++k) rot(9 + 2 * i + k, 9 + 2 * src + k) = 1;
  }
  Rep15 refl = Rep15::Identity();
  for (int i = 0; i < 3; ++i) {
    refl(3 * i + 2, 3 * i + 2) = -1;
    refl(layout::sa(i), layout::sa(i)) = -1;
  }
  Rep15 out = Rep15::Identity();
  for (int k = 0; k < g.rot; ++k) out = out * rot;
  if (g.refl == 1) out = out * refl;
  return out;
}

inline Vector act(const GroupElement& g, const Vector& x) {
  if (x.size() != layout::kDim) throw InputError("Delta configuration must have 15 entries");
  return representation(g).cast<double>() * x;
}

namespace detail {
inline bool lex_less(const Vector& l, const Vector& r) {
  return std::lexicographical_compare(l.data(), l.data() + l.size(), r.data(),
                                      r.data() + r.size());
}
}  // namespace detail

/// A point of an orbit together with the representative and element that produced it.
struct OrbitPoint {
  Vector config;
  std::size_t source = 0;
  GroupElement element;
};

/// Images of every input point under all six elements, in generation order
/// (source-major, then element order of all_elements()), with near-duplicates
/// (distance <= match_tol) dropped.
inline std::vector<OrbitPoint> orbit_with_provenance(const std::vector<Vector>& points,
                                                     double match_tol) {
  std::vector<OrbitPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& g : all_elements()) {
      Vector img = act(g, points[i]);
      const bool seen = std::any_of(out.begin(), out.end(), [&](const OrbitPoint& o) {
        return (o.config - img).norm() <= match_tol;
      });
      if (!seen) out.push_back({std::move(img), i, g});
    }
  }
  return out;
}

/// Closure of `points` under the group, deduplicated within branch_match_tol and
/// sorted lexicographically on coordinates.
inline std::vector<Vector> orbit(const std::vector<Vector>& points, const ToleranceConfig& tol = {}) {
  std::vector<Vector> out;
  for (auto& o : orbit_with_provenance(points, tol.branch_match_tol)) out.push_back(std::move(o.config));
  std::sort(out.begin(), out.end(), detail::lex_less);
  return out;
}

struct FreeActionReport {
  bool free = true;
  /// (point index, element) pairs where the element moved the point by <= tol.
  std::vector<std::pair<std::size_t, GroupElement>> offending;
  double min_displacement = std::numeric_limits<double>::infinity();
};

/// True iff every non-identity element displaces every point by more than `tol`.
inline FreeActionReport is_free_on(const std::vector<Vector>& points, double tol) {
  FreeActionReport rep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& g : all_elements()) {
      if (g.is_identity()) continue;
      const double disp = (act(g, points[i]) - points[i]).norm();
      rep.min_displacement = std::min(rep.min_displacement, disp);
      if (disp <= tol) {
        rep.free = false;
        rep.offending.emplace_back(i, g);
      }
    }
  }
  return rep;
}

struct MixingFit {
  Matrix matrix;        // 12 x 12, F(Psi(g) x) ~= matrix * F(x)
  double residual = 0;  // max abs misfit over the evaluation points
  int samples = 0;
};

/// Least-squares fit of A_g with F o Psi(g) = A_g F from random evaluation points.
/// Throws InvarianceError when the fit leaves a residual above `max_residual` or is singular.
template <typename Rng>
MixingFit constraint_mixing_matrix(const FormalManipulator& m, const GroupElement& g, Rng& rng,
                                   int samples = 200, double max_residual = 1e-8) {
  const ParameterSet& prm = m.delta_params();
  if (samples < m.constraints.dim_out) throw InputError("too few evaluation points for the fit");
  std::uniform_real_distribution<double> coord(-2.0 * prm.b, 2.0 * prm.b);
  const Matrix psi = representation(g).cast<double>();
  Matrix base(samples, m.constraints.dim_out);
  Matrix moved(samples, m.constraints.dim_out);
  for (int k = 0; k < samples; ++k) {
    Vector x(layout::kDim);
    for (int i = 0; i < layout::kDim; ++i) x(i) = coord(rng);
    base.row(k) = m.constraints.evaluate(x).transpose();
    moved.row(k) = m.constraints.evaluate(psi * x).transpose();
  }
  // moved = base * A^T
  const Matrix at = base.colPivHouseholderQr().solve(moved);
  MixingFit fit;
  fit.matrix = at.transpose();
  fit.samples = samples;
  fit.residual = (moved - base * at).cwiseAbs().maxCoeff();
  if (!(fit.residual <= max_residual)) {
    throw InvarianceError("constraint set is not invariant under " + g.name() +
                          " (fit residual " + std::to_string(fit.residual) + ")");
  }
  if (numerical_rank(fit.matrix) < m.constraints.dim_out) {
    throw InvarianceError("fitted mixing matrix for " + g.name() + " is singular");
  }
  return fit;
}

}  // namespace deltacss

#pragma once

// Kinematic singularity taxonomy at a configuration: configuration-space (CSS),
// end-effector (EES) and actuator (AS) singularities.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deltacss/errors.hpp"
#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"
#include "deltacss/witness.hpp"

namespace deltacss {

enum class CssEvidence { None, RankDropOnly, Certified };

inline std::string to_string(CssEvidence e) {
  switch (e) {
    case CssEvidence::None: return "none";
    case CssEvidence::RankDropOnly: return "rank-drop-only";
    case CssEvidence::Certified: return "certified";
  }
  return "none";
}

/// Local chart of S^1 used for circle-pair actuators, rotated by `rotation` radians.
/// Angle: psi - rotation. Stereographic: s'/(1 + c') for (c', s') the point rotated by -rotation.
struct ActuatorChart {
  enum class Kind { Angle, Stereographic };
  Kind kind = Kind::Angle;
  double rotation = 0.0;
};

struct SubsetRank {
  unsigned mask = 0;  // bit k set: actuator k included
  int rank = 0;
};

struct KinematicClass {
  bool css = false;
  CssEvidence css_evidence = CssEvidence::None;
  bool ees = false;
  bool as = false;
  bool regular = false;
  int jacobian_rank = 0;
  Vector jacobian_singular_values;
  /// Dimension of the tangent space ker DF; 0 when css is set.
  int tangent_dim = 0;
  int forward_rank = 0;
  int actuator_rank = 0;
  std::vector<SubsetRank> subset_ranks;
};

/// Differential of the actuator chart coordinates at x, one row per actuator in `subset`.
inline Matrix actuator_differential(const FormalManipulator& m, const Vector& x,
                                    const std::vector<int>& subset, const ActuatorChart& chart = {}) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(subset.size()), m.constraints.dim_in);
  for (std::size_t row = 0; row < subset.size(); ++row) {
    const int k = subset[row];
    if (k < 0 || k >= static_cast<int>(m.actuators.size())) throw InputError("actuator index out of range");
    const Actuator& act = m.actuators[k];
    const auto r = static_cast<Eigen::Index>(row);
    if (act.kind == Actuator::Kind::Coordinate) {
      p(r, act.indices.at(0)) = 1.0;
      continue;
    }
    const int ic = act.indices.at(0);
    const int is = act.indices.at(1);
    const double c = x(ic);
    const double s = x(is);
    const double r2 = c * c + s * s;
    if (r2 <= 0.0) throw InputError("circle-pair actuator at the origin has no angle");
    if (chart.kind == ActuatorChart::Kind::Angle) {
      p(r, ic) = -s / r2;
      p(r, is) = c / r2;
      continue;
    }
    // Rotate by -rotation, then stereographic projection from (-1, 0) of the unit circle.
    const double rad = std::sqrt(r2);
    const double co = std::cos(chart.rotation);
    const double si = std::sin(chart.rotation);
    const double cr = (co * c + si * s) / rad;
    const double sr = (-si * c + co * s) / rad;
    if (1.0 + cr <= 1e-6) throw InputError("stereographic chart pole at the current angle");
    // u = sr / (1 + cr); du/d(cr, sr) then chain through normalization and rotation.
    const double du_dcr = -sr / ((1.0 + cr) * (1.0 + cr));
    const double du_dsr = 1.0 / (1.0 + cr);
    Eigen::Matrix2d rot;
    rot << co, si, -si, co;
    const Vec2 unit(c / rad, s / rad);
    const Eigen::Matrix2d dnorm = (Eigen::Matrix2d::Identity() - unit * unit.transpose()) / rad;
    const Eigen::RowVector2d g = Eigen::RowVector2d(du_dcr, du_dsr) * rot * dnorm;
    p(r, ic) = g(0);
    p(r, is) = g(1);
  }
  return p;
}

/// Rank of a map restricted to the orthonormal basis `tangent`, relative to the map's norm.
inline int restricted_rank(const Matrix& map, const Matrix& tangent, const ToleranceConfig& tol) {
  if (map.rows() == 0 || tangent.cols() == 0) return 0;
  const Vector full = singular_values(map);
  if (full.size() == 0 || full(0) == 0.0) return 0;
  const Vector sv = singular_values(map * tangent);
  return static_cast<int>((sv.array() > tol.rank_rel_tol * full(0)).count());
}

/// Rank of the actuator chart differential for `subset` restricted to `tangent`.
inline int actuator_chart_rank(const FormalManipulator& m, const Vector& x, const Matrix& tangent,
                               const std::vector<int>& subset, const ToleranceConfig& tol = {},
                               const ActuatorChart& chart = {}) {
  if (subset.empty()) return 0;
  return restricted_rank(actuator_differential(m, x, subset, chart), tangent, tol);
}

/// Classification at an on-variety configuration. A certificate at the same point upgrades
/// a rank-drop CSS to certified.
inline KinematicClass classify(const FormalManipulator& m, const Vector& x, const ToleranceConfig& tol = {},
                               const NonManifoldCertificate* certificate = nullptr,
                               const ActuatorChart& chart = {}) {
  tol.validate();
  if (x.size() != m.constraints.dim_in) {
    throw InputError("configuration has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(m.constraints.dim_in));
  }
  const double worst = max_residual(m, x);
  if (!(worst <= tol.residual_tol * m.constraints.scale)) {
    std::ostringstream os;
    os << "configuration is not on the variety (max residual " << worst << ")";
    throw NotOnVarietyError(os.str(), worst);
  }
  KinematicClass k;
  const Matrix jac = m.constraints.jacobian(x);
  k.jacobian_singular_values = singular_values(jac);
  k.jacobian_rank = rank_from_singular_values(k.jacobian_singular_values, tol);
  if (k.jacobian_rank < m.constraints.dim_out) {
    k.css = true;
    k.css_evidence = CssEvidence::RankDropOnly;
    if (certificate && certificate->valid && certificate->point.size() == x.size() &&
        (certificate->point - x).norm() <= tol.branch_match_tol) {
      k.css_evidence = CssEvidence::Certified;
    }
    return k;
  }
  const Matrix tangent = kernel_basis(jac, tol);
  k.tangent_dim = static_cast<int>(tangent.cols());
  k.forward_rank = restricted_rank(m.forward_jacobian(x), tangent, tol);
  k.ees = k.forward_rank < std::min(m.forward_dim, k.tangent_dim);
  const auto n = static_cast<unsigned>(m.actuators.size());
  std::vector<int> all;
  for (unsigned a = 0; a < n; ++a) all.push_back(static_cast<int>(a));
  k.actuator_rank = actuator_chart_rank(m, x, tangent, all, tol, chart);
  k.as = k.actuator_rank < k.tangent_dim;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> subset;
    for (unsigned a = 0; a < n; ++a) {
      if (mask & (1u << a)) subset.push_back(static_cast<int>(a));
    }
    k.subset_ranks.push_back({mask, actuator_chart_rank(m, x, tangent, subset, tol, chart)});
  }
  k.regular = !k.ees && !k.as;
  return k;
}

}  // namespace deltacss

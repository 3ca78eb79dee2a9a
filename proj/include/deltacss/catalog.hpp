#pragma once

// Closed-form configuration-space singularities of the Delta manipulator, their
// orbit under the symmetry group, and a local search for further rank drops.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "deltacss/errors.hpp"
#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"
#include "deltacss/sampling.hpp"
#include "deltacss/symmetry.hpp"

namespace deltacss {

enum class CatalogLabel { Q1 = 1, Q2 = 2, Q3 = 3, Q4 = 4 };

inline constexpr std::array<CatalogLabel, 4> kCatalogLabels = {CatalogLabel::Q1, CatalogLabel::Q2,
                                                              CatalogLabel::Q3, CatalogLabel::Q4};

inline std::string to_string(CatalogLabel l) { return "q" + std::to_string(static_cast<int>(l)); }

inline CatalogLabel parse_label(const std::string& s) {
  for (auto l : kCatalogLabels) {
    if (to_string(l) == s) return l;
  }
  throw InputError("unknown catalog label '" + s + "' (expected q1..q4)");
}

/// Denominators of the q3/q4 closed forms and the discriminant proving they never vanish.
struct DenominatorGuard {
  /// 2b(a^2 - 3d^2) + q(a^2 + b^2), the q4 denominator.
  double u_q4 = 0.0;
  /// -2b(a^2 - 3d^2) + q(a^2 + b^2), the q3 denominator.
  double u_q3 = 0.0;
  /// -9 a^2 d^2 + 9 d^4: discriminant of u as a quadratic in b, divided by 4.
  double discriminant = 0.0;
  bool proof_holds = false;
};

inline DenominatorGuard denominator_guard(const ParameterSet& prm) {
  prm.validate();
  const double a2 = prm.a * prm.a;
  const double d2 = prm.d * prm.d;
  const double q = prm.q();
  DenominatorGuard g;
  g.u_q4 = 2.0 * prm.b * (a2 - 3.0 * d2) + q * (a2 + prm.b * prm.b);
  g.u_q3 = -2.0 * prm.b * (a2 - 3.0 * d2) + q * (a2 + prm.b * prm.b);
  g.discriminant = -9.0 * a2 * d2 + 9.0 * d2 * d2;
  g.proof_holds = g.discriminant < 0.0 && g.u_q4 != 0.0 && g.u_q3 != 0.0;
  return g;
}

/// Critical lower-arm length |3d^2 - a^2|/q. For 3d^2 > a^2 the q4 witness intersections
/// turn tangential there, for 3d^2 < a^2 the q3 ones.
inline double excluded_b(const ParameterSet& prm) {
  return std::abs(3.0 * prm.d * prm.d - prm.a * prm.a) / prm.q();
}

/// Relative distance to excluded_b below which witness certificates are not attempted.
inline constexpr double kExcludedRelTol = 1e-4;

inline bool excluded_case(const ParameterSet& prm) {
  prm.validate();
  return std::abs(prm.b - excluded_b(prm)) <= kExcludedRelTol * prm.b;
}

/// Table coordinates of the four orbit representatives (original coordinates).
inline Vector closed_form_point(CatalogLabel label, const ParameterSet& prm) {
  prm.validate();
  const double a = prm.a;
  const double b = prm.b;
  const double d = prm.d;
  const double q = prm.q();
  const double h = prm.elbow_height();
  const double r3 = std::sqrt(3.0);
  const double a2 = a * a;
  const double b2 = b * b;
  const double d2 = d * d;
  const DenominatorGuard g = denominator_guard(prm);

  Vector x(layout::kDim);
  // q1/q4 share limbs 1-2 and elbows 1-2; q2/q3 likewise with mirrored signs.
  const bool upper = label == CatalogLabel::Q1 || label == CatalogLabel::Q4;
  const double sgn = upper ? 1.0 : -1.0;
  x.segment<3>(0) = Vec3(-sgn * d * b / q, -sgn * r3 * d * b / q, h * b / q);
  x.segment<3>(3) = Vec3(-sgn * d * b / q, sgn * r3 * d * b / q, h * b / q);
  for (int i = 0; i < 3; ++i) {
    x(layout::ca(i)) = -d;
    x(layout::sa(i)) = sgn * h;
  }
  switch (label) {
    case CatalogLabel::Q1:
    case CatalogLabel::Q2:
      x.segment<3>(6) = Vec3(sgn * 2.0 * d * b / q, 0.0, h * b / q);
      break;
    case CatalogLabel::Q3: {
      const double den = -g.u_q3;  // 2b(a^2-3d^2) - q(a^2+b^2)
      x(6) = 2.0 * b * d * (b * q - 2.0 * a2 + b2 + 3.0 * d2) / den;
      x(7) = 0.0;
      x(8) = -b * h * (2.0 * b * q - a2 - b2 + 6.0 * d2) / g.u_q3;
      x(layout::ca(2)) = 6.0 * b * d * (a2 - d2) * (b - q) / (q * g.u_q3) - d;
      x(layout::sa(2)) = 6.0 * b * d2 * h * (q + 2.0 * b) / (q * g.u_q3) - h;
      break;
    }
    case CatalogLabel::Q4: {
      x(6) = -2.0 * b * d * (b * q + 2.0 * a2 - b2 - 3.0 * d2) / g.u_q4;
      x(7) = 0.0;
      x(8) = b * h * (2.0 * b * q + a2 + b2 - 6.0 * d2) / g.u_q4;
      x(layout::ca(2)) = 6.0 * b * d * (a2 - d2) * (b + q) / (q * g.u_q4) - d;
      x(layout::sa(2)) = 6.0 * b * d2 * h * (q - 2.0 * b) / (q * g.u_q4) + h;
      break;
    }
  }
  return x;
}

struct SingularPointRecord {
  std::optional<CatalogLabel> label;
  GroupElement element;
  ParameterSet params;
  Vector config;
  double residual_max = 0.0;
  Vector singular_values;
  int rank = 0;
  DenominatorGuard guards;
  bool excluded = false;
  /// True for q3/q4 orbit points when the witness construction does not apply.
  bool certificate_unavailable = false;
  bool passed = false;
};

/// Residual and Jacobian-rank check at `x`; passes iff rank DF is below full.
inline SingularPointRecord verify_rank_drop(const FormalManipulator& m, const Vector& x,
                                            const ToleranceConfig& tol = {}) {
  const ParameterSet& prm = m.delta_params();
  if (m.variant != DeltaVariant::Original) {
    throw InputError("verify_rank_drop expects the original Delta system");
  }
  SingularPointRecord rec;
  rec.params = prm;
  rec.config = x;
  rec.residual_max = max_residual(m, x);
  if (!(rec.residual_max <= tol.residual_tol * m.constraints.scale)) {
    std::ostringstream os;
    os << "point is not on the variety (max residual " << rec.residual_max << ")";
    throw NotOnVarietyError(os.str(), rec.residual_max);
  }
  rec.singular_values = singular_values(m.constraints.jacobian(x));
  rec.rank = rank_from_singular_values(rec.singular_values, tol);
  rec.guards = denominator_guard(prm);
  rec.excluded = excluded_case(prm);
  rec.passed = rec.rank < m.constraints.dim_out;
  return rec;
}

/// The four representatives followed by their orbits, deduplicated.
inline std::vector<OrbitPoint> catalog_orbit(const ParameterSet& prm, const ToleranceConfig& tol = {}) {
  std::vector<Vector> reps;
  for (auto l : kCatalogLabels) reps.push_back(closed_form_point(l, prm));
  return orbit_with_provenance(reps, tol.branch_match_tol);
}

/// All 24 singular points, verified, ordered by label then group element.
inline std::vector<SingularPointRecord> full_catalog(const ParameterSet& prm,
                                                     const ToleranceConfig& tol = {}) {
  tol.validate();
  const FormalManipulator m = build_delta(prm);
  const auto points = catalog_orbit(prm, tol);
  if (points.size() != 24) {
    throw CatalogError("orbit of the four representatives has " + std::to_string(points.size()) +
                       " points instead of 24");
  }
  std::vector<Vector> configs;
  for (const auto& o : points) configs.push_back(o.config);
  const FreeActionReport freeness = is_free_on(configs, tol.branch_match_tol);
  if (!freeness.free) {
    throw CatalogError("group action is not free on the catalog");
  }
  const bool excluded = excluded_case(prm);
  std::vector<SingularPointRecord> records;
  records.reserve(points.size());
  for (const auto& o : points) {
    SingularPointRecord rec = verify_rank_drop(m, o.config, tol);
    rec.label = kCatalogLabels[o.source];
    rec.element = o.element;
    rec.certificate_unavailable =
        excluded && (rec.label == CatalogLabel::Q3 || rec.label == CatalogLabel::Q4);
    if (!rec.passed) {
      throw CatalogError("catalog point " + to_string(*rec.label) + "/" + o.element.name() +
                         " has full Jacobian rank " + std::to_string(rec.rank));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// Distance from `x` to the nearest of `catalog`, with its index.
inline std::pair<std::size_t, double> nearest_point(const std::vector<Vector>& catalog,
                                                    const Vector& x) {
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const double dd = (catalog[i] - x).norm();
    if (dd < dist) {
      dist = dd;
      best = i;
    }
  }
  return {best, dist};
}

struct SearchCandidate {
  Vector config;
  double sigma_ratio = 0.0;
  std::size_t seed_index = 0;
  std::size_t nearest_catalog = 0;
  double catalog_distance = 0.0;
  bool matched = false;
};

struct SearchResult {
  std::vector<SearchCandidate> candidates;
  std::size_t seeds_run = 0;
  std::uint64_t rng_seed = 0;
};

namespace detail {

/// Gauss-Newton projection onto F = 0 (minimum-norm steps).
inline Vector newton_project(const FormalManipulator& m, Vector x, int max_iter = 30) {
  const double target = 1e-14 * m.constraints.scale;
  for (int it = 0; it < max_iter; ++it) {
    const Vector f = m.constraints.evaluate(x);
    if (f.cwiseAbs().maxCoeff() <= target) break;
    const Matrix j = m.constraints.jacobian(x);
    x -= j.completeOrthogonalDecomposition().solve(f);
  }
  return x;
}

/// Gradient with respect to x of u^T J(x) v. The directional difference is exact for
/// quadratic constraint systems.
inline Vector bilinear_gradient(const FormalManipulator& m, const Vector& x, const Vector& u,
                                const Vector& v) {
  const Matrix dj = 0.5 * (m.constraints.jacobian(x + v) - m.constraints.jacobian(x - v));
  return dj.transpose() * u;
}

inline bool near_variety(const FormalManipulator& m, const Vector& x, double rel = 1e-12) {
  return x.allFinite() && m.constraints.evaluate(x).cwiseAbs().maxCoeff() <= rel * m.constraints.scale;
}

inline double smallest_ratio(const FormalManipulator& m, const Vector& x) {
  const Vector sv = singular_values(m.constraints.jacobian(x));
  return sv(sv.size() - 1) / sv(0);
}

/// Gauss-Newton on F(x) = 0, J(x)^T u = 0, |u| = 1. Returns the refined x on success.
inline std::optional<Vector> polish_singular(const FormalManipulator& m, Vector x, Vector u,
                                             int max_iter = 40) {
  const int n = m.constraints.dim_in;
  const int k = m.constraints.dim_out;
  const double scale = m.constraints.scale;
  for (int it = 0; it < max_iter; ++it) {
    const Matrix j = m.constraints.jacobian(x);
    Vector g(k + n + 1);
    g.head(k) = m.constraints.evaluate(x) / scale;
    g.segment(k, n) = j.transpose() * u / std::sqrt(scale);
    g(k + n) = 0.5 * (u.squaredNorm() - 1.0);
    if (!g.allFinite()) return std::nullopt;
    if (g.cwiseAbs().maxCoeff() < 1e-15) break;
    Matrix dg = Matrix::Zero(k + n + 1, n + k);
    dg.block(0, 0, k, n) = j / scale;
    for (int c = 0; c < n; ++c) {
      const Vector e = Vector::Unit(n, c);
      const Matrix dj = 0.5 * (m.constraints.jacobian(x + e) - m.constraints.jacobian(x - e));
      dg.block(k, c, n, 1) = dj.transpose() * u / std::sqrt(scale);
    }
    dg.block(k, n, n, k) = j.transpose() / std::sqrt(scale);
    dg.block(k + n, n, 1, k) = u.transpose();
    const Vector step = dg.colPivHouseholderQr().solve(g);
    x -= step.head(n);
    u -= step.tail(k);
    if (step.norm() < 1e-15 * (1.0 + x.norm())) break;
  }
  if (near_variety(m, x)) return x;
  return std::nullopt;
}

/// Projected descent on the smallest singular value of DF along the variety, then a
/// Newton polish on the augmented singular system. Empty when the seed stalls.
inline std::optional<Vector> descend_to_rank_drop(const FormalManipulator& m, const Vector& seed,
                                                  int budget, const ToleranceConfig& tol) {
  const int n = m.constraints.dim_in;
  const int k = m.constraints.dim_out;
  const double step_cap = 0.25 * std::sqrt(m.constraints.scale);
  Vector x = newton_project(m, seed);
  if (!near_variety(m, x)) return std::nullopt;
  bool polished = false;
  for (int it = 0; it < budget; ++it) {
    const Matrix j = m.constraints.jacobian(x);
    if (!j.allFinite()) return std::nullopt;
    Eigen::JacobiSVD<Matrix> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const double sigma = sv(k - 1);
    const double ratio = sigma / sv(0);
    if (ratio < tol.rank_rel_tol) return x;
    const Vector u = svd.matrixU().col(k - 1);
    const Vector v = svd.matrixV().col(k - 1);
    if (ratio < 1e-2 && !polished) {
      polished = true;
      if (auto refined = polish_singular(m, x, u)) {
        if (smallest_ratio(m, *refined) < tol.rank_rel_tol) return refined;
      }
    }
    const Matrix tangent = svd.matrixV().rightCols(n - k);
    const Vector grad = tangent * (tangent.transpose() * bilinear_gradient(m, x, u, v));
    const double g2 = grad.squaredNorm();
    if (g2 == 0.0) return std::nullopt;
    Vector step = -(sigma / g2) * grad;
    if (step.norm() > step_cap) step *= step_cap / step.norm();
    bool improved = false;
    for (int halving = 0; halving < 12; ++halving) {
      const Vector trial = newton_project(m, x + step);
      const Matrix jt = m.constraints.jacobian(trial);
      const double f_ok = m.constraints.evaluate(trial).cwiseAbs().maxCoeff();
      if (jt.allFinite() && f_ok <= tol.residual_tol * m.constraints.scale) {
        const Vector svt = singular_values(jt);
        if (svt(k - 1) < sigma) {
          x = trial;
          improved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!improved) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

/// Local rank-deficiency search from explicit seeds. Candidates are matched against the
/// 24-point catalog within branch_match_tol.
inline SearchResult rank_deficiency_search_from(const FormalManipulator& m,
                                                const std::vector<Vector>& seeds, int budget,
                                                const ToleranceConfig& tol = {}) {
  const ParameterSet& prm = m.delta_params();
  SearchResult result;
  if (budget <= 0) return result;
  std::vector<Vector> catalog;
  for (const auto& o : catalog_orbit(prm, tol)) catalog.push_back(o.config);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    ++result.seeds_run;
    auto found = detail::descend_to_rank_drop(m, seeds[s], budget, tol);
    if (!found) continue;
    SearchCandidate c;
    c.config = *found;
    c.sigma_ratio = detail::smallest_ratio(m, c.config);
    c.seed_index = s;
    std::tie(c.nearest_catalog, c.catalog_distance) = nearest_point(catalog, c.config);
    c.matched = c.catalog_distance <= tol.branch_match_tol;
    result.candidates.push_back(std::move(c));
  }
  return result;
}

/// Local rank-deficiency search from `seeds` random on-variety configurations.
inline SearchResult rank_deficiency_search(const FormalManipulator& m, int seeds, int budget,
                                           const ToleranceConfig& tol = {},
                                           std::uint64_t rng_seed = 20240601) {
  const ParameterSet& prm = m.delta_params();
  std::mt19937_64 rng(rng_seed);
  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(std::max(seeds, 0)));
  for (int s = 0; s < seeds; ++s) starts.push_back(random_on_variety(prm, rng));
  SearchResult result = rank_deficiency_search_from(m, starts, budget, tol);
  result.rng_seed = rng_seed;
  return result;
}

}  // namespace deltacss

#pragma once

// Analytic paths through a singular configuration and the tangent-span certificate
// showing it is not a manifold point.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "deltacss/catalog.hpp"
#include "deltacss/errors.hpp"
#include "deltacss/geometry.hpp"
#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"

namespace deltacss {

enum class CoincidenceKind { AllThree, TwoOfThree };

inline std::string to_string(CoincidenceKind k) {
  return k == CoincidenceKind::AllThree ? "all-three" : "two-of-three";
}

struct CoincidencePattern {
  CoincidenceKind kind = CoincidenceKind::TwoOfThree;
  PlatformPose pose;
  /// Coincident limbs (0-based, ascending) and the remaining limb. For all-three the
  /// pair is (0,1) and `other` is 2.
  int first = 0;
  int second = 1;
  int other = 2;
  /// Common elbow position of the coincident limbs.
  Vec3 center = Vec3::Zero();
  /// Shared arm angle of the coincident limbs.
  double angle = 0.0;
};

/// Which elbows m_i(psi_i) coincide at an original-coordinate configuration.
inline CoincidencePattern coincidence_pattern(const Vector& point, const ParameterSet& prm,
                                              const ToleranceConfig& tol = {}) {
  if (point.size() != layout::kDim) throw InputError("Delta configuration must have 15 entries");
  CoincidencePattern pat;
  pat.pose = pose_of(prm, to_tilde(point), tol);
  std::array<Vec3, 3> m;
  for (int i = 0; i < 3; ++i) m[i] = arm_center(prm, i + 1, pat.pose.psi[i]);
  const double thr = 1e-8 * prm.a;
  const bool c01 = (m[0] - m[1]).norm() <= thr;
  const bool c02 = (m[0] - m[2]).norm() <= thr;
  const bool c12 = (m[1] - m[2]).norm() <= thr;
  const int hits = int(c01) + int(c02) + int(c12);
  if (hits == 0) {
    throw PreconditionError("no two elbows coincide; not a catalog singularity");
  }
  if (hits >= 2) {
    pat.kind = CoincidenceKind::AllThree;
  } else if (c01) {
    pat.first = 0, pat.second = 1, pat.other = 2;
  } else if (c02) {
    pat.first = 0, pat.second = 2, pat.other = 1;
  } else {
    pat.first = 1, pat.second = 2, pat.other = 0;
  }
  pat.center = m[pat.first];
  pat.angle = pat.pose.psi[pat.first];
  return pat;
}

struct WitnessPath {
  std::string label;
  Vector base_point;  // tilde coordinates
  double t0 = 0.0;
  double half_width = 0.05;
  std::function<Vector(double)> evaluate;  // tilde coordinates
  std::string recipe;
};

namespace detail {

inline std::function<Vec3(double)> elbow_path(const ParameterSet& prm, int limb) {
  return [prm, limb](double t) { return arm_center(prm, limb + 1, t); };
}

inline std::function<Vec3(double)> fixed_elbow(const ParameterSet& prm, int limb, double psi) {
  const Vec3 c = arm_center(prm, limb + 1, psi);
  return [c](double) { return c; };
}

inline Sphere elbow_sphere(const ParameterSet& prm, int limb, double psi) {
  return {arm_center(prm, limb + 1, psi), prm.b};
}

/// Path t -> lift_pose(point(t), psi(t)) where limbs in `moving` follow t.
inline std::function<Vector(double)> lifted(const ParameterSet& prm, const PlatformPose& base,
                                            std::function<Vec3(double)> point,
                                            std::array<bool, 3> moving) {
  return [prm, base, point = std::move(point), moving](double t) {
    PlatformPose pose = base;
    pose.p = point(t);
    for (int i = 0; i < 3; ++i) {
      if (moving[i]) pose.psi[i] = t;
    }
    return lift_pose(prm, pose);
  };
}

inline std::string limb_name(int limb) { return std::to_string(limb + 1); }

inline std::array<WitnessPath, 4> two_of_three_paths(const ParameterSet& prm,
                                                     const CoincidencePattern& pat) {
  if (excluded_case(prm)) {
    throw CertificateUnavailableError(
        "witness construction is unavailable for b = |3d^2 - a^2|/q");
  }
  const int i = pat.first;
  const int j = pat.second;
  const int k = pat.other;
  const double phi = pat.angle;
  const double phik = pat.pose.psi[k];
  const Vec3 p = pat.pose.p;
  const Vec3 c = pat.center;
  const Sphere sk = elbow_sphere(prm, k, phik);
  const std::string si = limb_name(i), sj = limb_name(j), sk_name = limb_name(k);
  std::array<WitnessPath, 4> out;

  {
    auto family = equal_radius_pencil(elbow_path(prm, i), elbow_path(prm, j), prm.b, phi);
    auto point = [family, sk, p](double t) { return circle_sphere_branch(family, sk, p, t); };
    std::array<bool, 3> mv{};
    mv[i] = mv[j] = true;
    out[0] = {"gamma1", Vector(), phi, 0.05, lifted(prm, pat.pose, point, mv),
              "pencil(m" + si + "(t), m" + sj + "(t)) cap S" + sk_name + "(phi" + sk_name + ")"};
  }
  {
    auto point = [prm, i, phi, k, p](double t) {
      auto family = equal_radius_pencil(fixed_elbow(prm, i, phi), elbow_path(prm, k), prm.b);
      return nearest_on_circle(family(t), p);
    };
    std::array<bool, 3> mv{};
    mv[k] = true;
    out[1] = {"gamma2", Vector(), phik, 0.05, lifted(prm, pat.pose, point, mv),
              "S" + si + "(phi) cap S" + sk_name + "(t), nearest to p"};
  }
  {
    const Vec3 axis = (sk.center - c).normalized();
    auto point = [c, axis, p](double t) { return Vec3(c + rotate_about(p - c, axis, t)); };
    out[2] = {"gamma3", Vector(), 0.0, 0.05, lifted(prm, pat.pose, point, {false, false, false}),
              "rotation of p about m" + si + "(phi) m" + sk_name + "(phi" + sk_name + ")"};
  }
  {
    auto family = equal_radius_pencil(elbow_path(prm, i), fixed_elbow(prm, j, phi), prm.b, phi);
    const Circle3 limit = family(phi);
    const double off = std::abs((p - limit.center).dot(limit.normal));
    if (off > 1e-8 * prm.b) {
      std::ostringstream os;
      os << "base point is off the limiting circle plane by " << off;
      throw ContinuationError(os.str());
    }
    auto point = [family, sk, p](double t) { return circle_sphere_branch(family, sk, p, t); };
    std::array<bool, 3> mv{};
    mv[i] = true;
    out[3] = {"gamma4", Vector(), phi, 0.05, lifted(prm, pat.pose, point, mv),
              "pencil(m" + si + "(t), m" + sj + "(phi)) cap S" + sk_name + "(phi" + sk_name + ")"};
  }
  return out;
}

inline std::array<WitnessPath, 4> all_three_paths(const ParameterSet& prm,
                                                  const CoincidencePattern& pat) {
  const double phi = pat.angle;
  const Vec3 p = pat.pose.p;
  const Vec3 c = pat.center;
  const Vec3 w = p - c;
  const Vec3 e1 = any_orthogonal(w);
  const Vec3 e2 = w.cross(e1).normalized();
  std::array<WitnessPath, 4> out;
  const std::array<Vec3, 2> axes{e1, e2};
  for (int n = 0; n < 2; ++n) {
    const Vec3 axis = axes[n];
    auto point = [c, axis, p](double t) { return Vec3(c + rotate_about(p - c, axis, t)); };
    out[n] = {"gamma" + std::to_string(n + 1), Vector(), 0.0, 0.05,
              lifted(prm, pat.pose, point, {false, false, false}),
              "rotation of p about a tangent axis of the common sphere"};
  }

  // Pair whose pencil plane at phi contains p.
  int best_i = -1, best_j = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const Vec3 rate = arm_center_derivative(prm, i + 1, phi) - arm_center_derivative(prm, j + 1, phi);
      const double cosine = std::abs(rate.normalized().dot(w)) / w.norm();
      if (cosine < best) best = cosine, best_i = i, best_j = j;
    }
  }
  if (best > 1e-8) {
    throw CertificateUnavailableError("no pencil plane through the base point");
  }
  const int i = best_i, j = best_j, k = 3 - best_i - best_j;
  const std::string si = limb_name(i), sj = limb_name(j), sk = limb_name(k);
  {
    auto family = equal_radius_pencil(elbow_path(prm, i), elbow_path(prm, j), prm.b, phi);
    auto moving = [family](double t) {
      const Circle3 circ = family(t);
      return Sphere{circ.center, circ.radius};
    };
    const ReducedProblem red = plane_reduce(elbow_sphere(prm, k, phi), moving, phi, p);
    auto point = [red](double t) { return red.point(t); };
    std::array<bool, 3> mv{};
    mv[i] = mv[j] = true;
    out[2] = {"gamma3", Vector(), phi, 0.05, lifted(prm, pat.pose, point, mv),
              "pencil(m" + si + "(t), m" + sj + "(t)) cap S" + sk + "(phi), planar reduction"};
  }
  {
    std::optional<ReducedProblem> red;
    int mover = i, keeper = j;
    for (int attempt = 0; attempt < 2 && !red; ++attempt) {
      try {
        red = plane_reduce(elbow_sphere(prm, keeper, phi),
                           [prm, mover](double t) { return elbow_sphere(prm, mover, t); }, phi, p);
      } catch (const PreconditionError&) {
        std::swap(mover, keeper);
      }
    }
    if (!red) throw CertificateUnavailableError("no single-arm planar reduction at the base point");
    auto point = [r = *red](double t) { return r.point(t); };
    std::array<bool, 3> mv{};
    mv[mover] = true;
    out[3] = {"gamma4", Vector(), phi, 0.05, lifted(prm, pat.pose, point, mv),
              "S" + limb_name(mover) + "(t) cap S" + limb_name(keeper) + "(phi), planar reduction"};
  }
  return out;
}

}  // namespace detail

/// The four witness paths through an original-coordinate catalog configuration.
inline std::array<WitnessPath, 4> witness_paths(const Vector& point, const ParameterSet& prm,
                                                const ToleranceConfig& tol = {}) {
  prm.validate();
  const CoincidencePattern pat = coincidence_pattern(point, prm, tol);
  auto paths = pat.kind == CoincidenceKind::AllThree ? detail::all_three_paths(prm, pat)
                                                     : detail::two_of_three_paths(prm, pat);
  const Vector base = to_tilde(point);
  for (auto& path : paths) path.base_point = base;
  return paths;
}

struct PathSample {
  double t = 0.0;
  Vector config;
  double residual = 0.0;
};

/// `count` equally spaced samples over [t0 - half_width, t0 + half_width], swept in order.
inline std::vector<PathSample> sample_path(const WitnessPath& path,
                                           const std::function<Vector(const Vector&)>& residuals,
                                           int count) {
  if (count < 2) throw InputError("path sampling needs at least two samples");
  std::vector<PathSample> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n) {
    const double t = path.t0 + path.half_width * (2.0 * n / (count - 1) - 1.0);
    PathSample s;
    s.t = t;
    s.config = path.evaluate(t);
    s.residual = residuals(s.config).cwiseAbs().maxCoeff();
    out.push_back(std::move(s));
  }
  return out;
}

struct CertifyOptions {
  int samples = 41;
  double half_width = 0.05;
  /// Paths that leave their branch inside the window are retried on halved windows
  /// down to this width.
  double min_half_width = 1e-3;
  /// Bound on path residuals relative to the constraint scale.
  double residual_bound = 1e-8;
};

struct NonManifoldCertificate {
  std::string mechanism;
  Vector point;        // original coordinates
  Vector base_point;   // coordinates the paths live in
  std::string pattern;
  std::vector<std::string> labels;
  std::vector<std::string> recipes;
  std::vector<double> t0;
  std::vector<double> half_widths;
  std::vector<Vector> tangents;
  Vector tangent_singular_values;
  int span_rank = 0;
  double max_path_residual = 0.0;
  int assumed_local_dimension = 3;
  bool valid = false;

  [[nodiscard]] double span_ratio() const {
    const auto n = tangent_singular_values.size();
    if (n == 0 || tangent_singular_values(0) == 0.0) return 0.0;
    return tangent_singular_values(n - 1) / tangent_singular_values(0);
  }
};

namespace detail {

template <std::size_t N>
void fill_certificate(NonManifoldCertificate& cert, const std::array<WitnessPath, N>& paths,
                      const std::function<Vector(const Vector&)>& residuals, double scale,
                      const ToleranceConfig& tol, const CertifyOptions& opt) {
  for (const auto& path0 : paths) {
    WitnessPath path = path0;
    const Vector at0 = path.evaluate(path.t0);
    if ((at0 - path.base_point).norm() > 1e-9 * std::max(1.0, path.base_point.norm())) {
      throw PathInvalidError(path.label + " does not pass through the base point");
    }
    double path_residual = 0.0;
    for (path.half_width = opt.half_width;; path.half_width *= 0.5) {
      try {
        path_residual = 0.0;
        for (const auto& s : sample_path(path, residuals, opt.samples)) {
          path_residual = std::max(path_residual, s.residual);
        }
        break;
      } catch (const EmptyIntersectionError&) {
        if (path.half_width * 0.5 < opt.min_half_width) throw;
      } catch (const DegenerateIntersectionError&) {
        if (path.half_width * 0.5 < opt.min_half_width) throw;
      }
    }
    cert.max_path_residual = std::max(cert.max_path_residual, path_residual);
    if (!(path_residual <= opt.residual_bound * scale)) {
      std::ostringstream os;
      os << path.label << " leaves the variety (residual " << path_residual << ")";
      throw PathInvalidError(os.str());
    }
    cert.half_widths.push_back(path.half_width);
    cert.labels.push_back(path.label);
    cert.recipes.push_back(path.recipe);
    cert.t0.push_back(path.t0);
    cert.tangents.push_back(central_difference_tangent(path.evaluate, path.t0, tol));
  }
  Matrix cols(cert.tangents.front().size(), static_cast<Eigen::Index>(cert.tangents.size()));
  for (std::size_t n = 0; n < cert.tangents.size(); ++n) cols.col(Eigen::Index(n)) = cert.tangents[n];
  cert.tangent_singular_values = singular_values(cols);
  cert.span_rank = rank_from_singular_values(cert.tangent_singular_values, tol);
  cert.valid = cert.span_rank > cert.assumed_local_dimension;
}

}  // namespace detail

/// Witness paths, on-variety sampling and tangent span at a Delta singular point.
/// Throws PathInvalidError on residual breaches and CertificateFailureError when the span
/// does not exceed the local dimension.
inline NonManifoldCertificate certify(const FormalManipulator& m, const Vector& point,
                                      const ToleranceConfig& tol = {},
                                      const CertifyOptions& opt = {}) {
  tol.validate();
  const ParameterSet& prm = m.delta_params();
  const auto pat = coincidence_pattern(point, prm, tol);
  const auto paths = witness_paths(point, prm, tol);
  NonManifoldCertificate cert;
  cert.mechanism = m.name;
  cert.point = point;
  cert.base_point = to_tilde(point);
  cert.pattern = to_string(pat.kind);
  cert.assumed_local_dimension = 3;
  auto residuals = [prm](const Vector& y) { return delta_residuals(prm, y, DeltaVariant::Tilde); };
  detail::fill_certificate(cert, paths, residuals, prm.residual_scale(), tol, opt);
  if (!cert.valid) {
    throw CertificateFailureError("tangent span " + std::to_string(cert.span_rank) +
                                  " does not exceed the local dimension 3");
  }
  return cert;
}

/// Paths (l cos t, l sin t, 2 l cos t) and (l cos t, l sin t, 0) through (0, l, 0) at t = pi/2.
inline std::array<WitnessPath, 2> crank_slider_paths(double l) {
  if (!(std::isfinite(l) && l > 0.0)) throw ParameterError("crank length must be positive (l > 0)");
  const double t0 = M_PI / 2.0;
  const Vector base = Vector(Vec3(0.0, l, 0.0));
  std::array<WitnessPath, 2> out;
  out[0] = {"gamma1", base, t0, 0.05,
            [l](double t) { return Vector(Vec3(l * std::cos(t), l * std::sin(t), 2.0 * l * std::cos(t))); },
            "C mirrored through B"};
  out[1] = {"gamma2", base, t0, 0.05,
            [l](double t) { return Vector(Vec3(l * std::cos(t), l * std::sin(t), 0.0)); },
            "C fixed at the origin"};
  return out;
}

inline NonManifoldCertificate crank_slider_witness(double l1, double l2,
                                                   const ToleranceConfig& tol = {},
                                                   const CertifyOptions& opt = {}) {
  tol.validate();
  const FormalManipulator m = build_crank_slider(l1, l2);
  if (std::abs(l1 - l2) > 1e-12 * std::max(l1, l2)) {
    throw CertificateUnavailableError("crank slider with l1 != l2 has no singular point");
  }
  const auto paths = crank_slider_paths(l1);
  NonManifoldCertificate cert;
  cert.mechanism = m.name;
  cert.point = paths[0].base_point;
  cert.base_point = paths[0].base_point;
  cert.pattern = "crossing";
  cert.assumed_local_dimension = m.local_dimension();
  detail::fill_certificate(cert, paths, m.constraints.evaluate, m.constraints.scale, tol, opt);
  if (!cert.valid) throw CertificateFailureError("crank slider tangents are dependent");
  return cert;
}

inline NonManifoldCertificate crank_slider_witness(double l, const ToleranceConfig& tol = {},
                                                   const CertifyOptions& opt = {}) {
  return crank_slider_witness(l, l, tol, opt);
}

}  // namespace deltacss

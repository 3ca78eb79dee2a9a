#pragma once

// Analytic intersection branches of circles and spheres, including the removable
// singularities that appear when two sphere centers pass through each other.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>

#include "deltacss/errors.hpp"
#include "deltacss/linalg.hpp"

namespace deltacss {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct PlanarFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();

  [[nodiscard]] Vec3 normal() const { return u.cross(v); }
  [[nodiscard]] Vec2 to_local(const Vec3& x) const {
    const Vec3 r = x - origin;
    return {u.dot(r), v.dot(r)};
  }
  [[nodiscard]] Vec3 to_world(const Vec2& y) const { return origin + y.x() * u + y.y() * v; }
};

/// Circle in space: center, radius and unit normal of its plane.
struct Circle3 {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 normal = Vec3::UnitZ();

  [[nodiscard]] PlanarFrame frame() const {
    PlanarFrame f;
    f.origin = center;
    f.u = any_orthogonal(normal);
    f.v = normal.cross(f.u);
    return f;
  }
};

struct PlanarCircle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

enum class Branch { Plus, Minus };

inline double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

inline Vec2 perp(const Vec2& p) { return {-p.y(), p.x()}; }

/// Below this fraction of the radius two centers count as coincident.
inline constexpr double kCoincidenceFraction = 1e-7;
/// Step for derivatives of center paths at removable singularities.
inline constexpr double kContinuationStep = 1e-3;

/// Richardson central derivative of a vector-valued path.
template <typename Path>
auto path_derivative(const Path& path, double t, double h = kContinuationStep) {
  auto central = [&](double step) { return ((path(t + step) - path(t - step)) / (2.0 * step)).eval(); };
  return ((4.0 * central(0.5 * h) - central(h)) / 3.0).eval();
}

/// Intersection of the circles (c0, r0) and (c1, r1): the points
/// c0 + l e +- h perp(e) with e the unit vector from c0 towards c1.
/// Returns {Plus, Minus} and the half chord h. Tangency yields h = 0.
struct CirclePairIntersection {
  Vec2 plus;
  Vec2 minus;
  double half_chord = 0.0;
};

inline CirclePairIntersection intersect_circles(const Vec2& c0, double r0, const Vec2& c1, double r1) {
  const Vec2 delta = c1 - c0;
  const double dist = delta.norm();
  const double scale = std::max(r0, r1);
  if (dist <= 1e-14 * scale) {
    throw DegenerateIntersectionError("concentric circles have no isolated intersection");
  }
  const Vec2 e = delta / dist;
  const double l = (r0 * r0 + dist * dist - r1 * r1) / (2.0 * dist);
  double h2 = r0 * r0 - l * l;
  if (h2 < -1e-12 * scale * scale) {
    std::ostringstream os;
    os << "circles do not intersect (center distance " << dist << ", radii " << r0 << ", " << r1 << ")";
    throw EmptyIntersectionError(os.str());
  }
  const double h = std::sqrt(std::max(h2, 0.0));
  return {c0 + l * e + h * perp(e), c0 + l * e - h * perp(e), h};
}

/// A circle moving in the plane. When `degenerate_at` is set its center passes through the
/// origin there, and branches are continued analytically across that instant.
struct MovingCircle2 {
  std::function<PlanarCircle(double)> at;
  std::optional<double> degenerate_at;
};

/// Limit points +-r0 perp(p')/|p'| of the two branches at the degenerate instant.
inline Vec2 degenerate_limit(double r0, const MovingCircle2& moving, Branch branch) {
  const double ts = moving.degenerate_at.value();
  const Vec2 dp = path_derivative([&](double s) { return moving.at(s).center; }, ts);
  const double speed = dp.norm();
  if (speed <= 1e-12 * r0) {
    throw ContinuationError("moving center has zero velocity at the coincidence");
  }
  return branch_sign(branch) * r0 / speed * perp(dp);
}

/// Branch point of the fixed circle |x| = r0 and a moving circle at parameter t.
/// Away from the degenerate instant this is (l/d) p +- (sqrt(r0^2 - l^2)/d) perp(p) with
/// l = (r0^2 + |p|^2 - r^2)/(2 d); d carries the sign of p . p'(t*) so that each branch is
/// analytic through t*. At t* the limit point is returned.
inline Vec2 circle_circle_branch(double r0, const MovingCircle2& moving, Branch branch, double t) {
  const PlanarCircle c = moving.at(t);
  const Vec2& p = c.center;
  const double dist = p.norm();
  if (moving.degenerate_at) {
    if (dist <= kCoincidenceFraction * r0) {
      return degenerate_limit(r0, moving, branch);
    }
    const Vec2 dp = path_derivative([&](double s) { return moving.at(s).center; }, *moving.degenerate_at);
    const double signed_dist = p.dot(dp) >= 0.0 ? dist : -dist;
    const Vec2 e = p / signed_dist;
    const double l = (r0 * r0 + dist * dist - c.radius * c.radius) / (2.0 * signed_dist);
    const double h2 = r0 * r0 - l * l;
    if (h2 < -1e-12 * r0 * r0) {
      throw EmptyIntersectionError("moving circle no longer meets the fixed circle");
    }
    const double h = std::sqrt(std::max(h2, 0.0));
    return l * e + branch_sign(branch) * h * perp(e);
  }
  const auto hit = intersect_circles(Vec2::Zero(), r0, p, c.radius);
  return branch == Branch::Plus ? hit.plus : hit.minus;
}

/// Circles S(c1(t), b) cap S(c2(t), b) as an analytic family. The center is the midpoint,
/// the radius sqrt(b^2 - |D|^2/4) and the normal D/|D| with D = c1 - c2. At a coincidence
/// t* the normal is D'(t*)/|D'(t*)|, oriented continuously.
class AnalyticCircleFamily {
 public:
  using CenterPath = std::function<Vec3(double)>;

  AnalyticCircleFamily(CenterPath c1, CenterPath c2, double radius, std::optional<double> coincidence)
      : c1_(std::move(c1)), c2_(std::move(c2)), radius_(radius), coincidence_(coincidence) {
    if (!(radius_ > 0.0)) throw InputError("sphere radius must be positive");
    if (coincidence_) {
      const Vec3 gap = c1_(*coincidence_) - c2_(*coincidence_);
      if (gap.norm() > kCoincidenceFraction * radius_) {
        throw PreconditionError("centers do not coincide at the designated parameter");
      }
      const Vec3 rate = chord_rate(*coincidence_);
      if (rate.norm() <= 1e-12 * radius_) {
        throw ContinuationError("centers coincide with zero relative velocity");
      }
      anchor_ = rate.normalized();
    }
  }

  [[nodiscard]] Circle3 operator()(double t) const {
    const Vec3 a = c1_(t);
    const Vec3 b = c2_(t);
    const Vec3 chord = a - b;
    const double len = chord.norm();
    if (len > 2.0 * radius_ * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "spheres are disjoint at t=" << t << " (center distance " << len << ")";
      throw EmptyIntersectionError(os.str());
    }
    Circle3 c;
    c.center = 0.5 * (a + b);
    c.radius = std::sqrt(std::max(radius_ * radius_ - 0.25 * len * len, 0.0));
    if (len < kCoincidenceFraction * radius_) {
      const Vec3 rate = chord_rate(t);
      if (rate.norm() <= 1e-12 * radius_) {
        throw ContinuationError("coincident centers with vanishing chord derivative");
      }
      c.normal = rate.normalized();
    } else {
      c.normal = chord / len;
    }
    if (anchor_ && c.normal.dot(*anchor_) < 0.0) c.normal = -c.normal;
    return c;
  }

  [[nodiscard]] std::optional<double> coincidence() const { return coincidence_; }
  [[nodiscard]] double sphere_radius() const { return radius_; }

 private:
  [[nodiscard]] Vec3 chord_rate(double t) const {
    return path_derivative([this](double s) { return Vec3(c1_(s) - c2_(s)); }, t);
  }

  CenterPath c1_;
  CenterPath c2_;
  double radius_;
  std::optional<double> coincidence_;
  std::optional<Vec3> anchor_;
};

inline AnalyticCircleFamily equal_radius_pencil(AnalyticCircleFamily::CenterPath c1,
                                                AnalyticCircleFamily::CenterPath c2, double b,
                                                std::optional<double> coincidence = std::nullopt) {
  return AnalyticCircleFamily(std::move(c1), std::move(c2), b, coincidence);
}

/// Both points of circle cap sphere, in the circle's plane.
inline CirclePairIntersection circle_sphere_points(const Circle3& circle, const Sphere& sphere,
                                                   PlanarFrame* frame_out = nullptr) {
  const PlanarFrame frame = circle.frame();
  const Vec3 offset = sphere.center - circle.center;
  const double height = offset.dot(circle.normal);
  const double scale = std::max(circle.radius, sphere.radius);
  if (std::abs(height) > sphere.radius) {
    throw EmptyIntersectionError("sphere does not reach the circle's plane");
  }
  const double section = std::sqrt(sphere.radius * sphere.radius - height * height);
  const Vec2 c2 = frame.to_local(sphere.center);
  if (c2.norm() <= 1e-12 * scale) {
    if (std::abs(section - circle.radius) <= 1e-12 * scale) {
      throw DegenerateIntersectionError("circle lies on the sphere");
    }
    throw EmptyIntersectionError("concentric circle and sphere section of different radii");
  }
  if (frame_out) *frame_out = frame;
  return intersect_circles(Vec2::Zero(), circle.radius, c2, section);
}

/// Point of family(t) cap sphere on the branch through `seed`. Tangential intersections
/// (half chord below 1e-7 of the circle radius) are rejected.
inline Vec3 circle_sphere_branch(const AnalyticCircleFamily& family, const Sphere& sphere,
                                 const Vec3& seed, double t) {
  const Circle3 circle = family(t);
  PlanarFrame frame;
  const auto hit = circle_sphere_points(circle, sphere, &frame);
  if (hit.half_chord <= 1e-7 * std::max(circle.radius, 1e-300)) {
    throw DegenerateIntersectionError("circle touches the sphere tangentially");
  }
  const Vec3 p = frame.to_world(hit.plus);
  const Vec3 m = frame.to_world(hit.minus);
  return (p - seed).norm() <= (m - seed).norm() ? p : m;
}

/// Point of `circle` closest to `x` (x off the circle's axis).
inline Vec3 nearest_on_circle(const Circle3& circle, const Vec3& x) {
  Vec3 r = x - circle.center;
  r -= r.dot(circle.normal) * circle.normal;
  const double len = r.norm();
  if (len <= 1e-14 * std::max(circle.radius, 1.0)) {
    throw DegenerateIntersectionError("point lies on the circle axis");
  }
  return circle.center + circle.radius / len * r;
}

/// Planar reduction of a fixed sphere and a moving sphere whose centers coincide at t*.
struct ReducedProblem {
  PlanarFrame frame;
  double r0 = 0.0;
  MovingCircle2 moving;
  Branch branch = Branch::Plus;

  [[nodiscard]] Vec3 point(double t) const {
    return frame.to_world(circle_circle_branch(r0, moving, branch, t));
  }
};

/// Reduce S(fixed) cap S(moving(t)) near t* to the planar lemma in the plane through the
/// common center spanned by p - center and the center velocity. Requires p on the fixed
/// sphere and p - center perpendicular to that velocity.
inline ReducedProblem plane_reduce(const Sphere& fixed, std::function<Sphere(double)> moving,
                                   double t_star, const Vec3& p) {
  const double r0 = fixed.radius;
  const Sphere at_star = moving(t_star);
  if ((at_star.center - fixed.center).norm() > kCoincidenceFraction * r0 ||
      std::abs(at_star.radius - r0) > 1e-9 * r0) {
    throw PreconditionError("moving sphere does not coincide with the fixed sphere at t*");
  }
  const Vec3 w = p - fixed.center;
  if (std::abs(w.norm() - r0) > 1e-8 * r0) {
    throw PreconditionError("point is not on the fixed sphere");
  }
  const Vec3 velocity = path_derivative([&](double s) { return moving(s).center; }, t_star);
  if (velocity.norm() <= 1e-12 * r0) {
    throw ContinuationError("moving sphere center has zero velocity at t*");
  }
  const double cosine = w.dot(velocity) / (w.norm() * velocity.norm());
  if (std::abs(cosine) > 1e-8) {
    std::ostringstream os;
    os << "point is not perpendicular to the center velocity (cosine " << cosine << ")";
    throw PreconditionError(os.str());
  }
  ReducedProblem red;
  red.r0 = r0;
  red.frame.origin = fixed.center;
  red.frame.u = w.normalized();
  red.frame.v = (velocity - velocity.dot(red.frame.u) * red.frame.u).normalized();
  const PlanarFrame frame = red.frame;
  const Vec3 center = fixed.center;
  red.moving.at = [frame, center, moving](double t) {
    const Sphere s = moving(t);
    const Vec3 off = s.center - center;
    const double height = off.dot(frame.normal());
    PlanarCircle c;
    c.center = Vec2(frame.u.dot(off), frame.v.dot(off));
    c.radius = std::sqrt(std::max(s.radius * s.radius - height * height, 0.0));
    return c;
  };
  red.moving.degenerate_at = t_star;
  const Vec2 target = red.frame.to_local(p);
  const double dp = (degenerate_limit(r0, red.moving, Branch::Plus) - target).norm();
  const double dm = (degenerate_limit(r0, red.moving, Branch::Minus) - target).norm();
  red.branch = dp <= dm ? Branch::Plus : Branch::Minus;
  return red;
}

}  // namespace deltacss

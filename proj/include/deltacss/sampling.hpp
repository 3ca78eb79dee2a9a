#pragma once

// Random on-variety Delta configurations via sphere trilateration.

#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"

namespace deltacss {

/// Points at distance b from three centers. Empty when the centers are (nearly)
/// collinear or the spheres have no common point.
inline std::optional<std::array<Vec3, 2>> trilaterate(const std::array<Vec3, 3>& c, double b) {
  const Vec3 e1 = c[1] - c[0];
  const Vec3 e2 = c[2] - c[0];
  const Vec3 n = e1.cross(e2);
  const double nn = n.squaredNorm();
  if (nn < 1e-20 * std::pow(e1.norm() + e2.norm() + 1.0, 4)) return std::nullopt;
  // Equal radii: 2 (c_j - c_0) . p = |c_j|^2 - |c_0|^2, plus n . p = n . c_0.
  Mat3 lhs;
  lhs.row(0) = 2.0 * e1.transpose();
  lhs.row(1) = 2.0 * e2.transpose();
  lhs.row(2) = n.transpose();
  const Vec3 rhs(c[1].squaredNorm() - c[0].squaredNorm(), c[2].squaredNorm() - c[0].squaredNorm(),
                 n.dot(c[0]));
  const Vec3 p0 = lhs.fullPivLu().solve(rhs);
  const double h2 = b * b - (p0 - c[0]).squaredNorm();
  if (h2 < 0.0) return std::nullopt;
  const Vec3 off = std::sqrt(h2 / nn) * n;
  return std::array<Vec3, 2>{p0 + off, p0 - off};
}

/// Random pose whose lift lies on the tilde variety (arm angles uniform on the circle).
template <typename Rng>
PlatformPose random_pose_on_variety(const ParameterSet& prm, Rng& rng, int max_tries = 10000) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::bernoulli_distribution branch(0.5);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    PlatformPose pose;
    std::array<Vec3, 3> centers;
    for (int i = 0; i < 3; ++i) {
      pose.psi[i] = angle(rng);
      centers[i] = arm_center(prm, i + 1, pose.psi[i]);
    }
    auto pts = trilaterate(centers, prm.b);
    const bool pick = branch(rng);
    if (!pts) continue;
    pose.p = (*pts)[pick ? 0 : 1];
    return pose;
  }
  throw Error("could not sample an on-variety pose");
}

/// Random on-variety configuration in original coordinates.
template <typename Rng>
Vector random_on_variety(const ParameterSet& prm, Rng& rng) {
  return from_tilde(lift_pose(prm, random_pose_on_variety(prm, rng)));
}

}  // namespace deltacss

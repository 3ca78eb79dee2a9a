#pragma once

// Formal manipulators: constraint systems, actuators and forward maps for the
// Delta manipulator (original and tilde coordinates) and the crank slider.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deltacss/errors.hpp"
#include "deltacss/linalg.hpp"

namespace deltacss {

/// Delta design parameters: upper arm a, lower arm b, radius difference d = r1 - r2.
struct ParameterSet {
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;

  void validate() const {
    auto fail = [this](const char* rule) {
      std::ostringstream os;
      os << "invalid parameters (a=" << a << ", b=" << b << ", d=" << d << "): " << rule
         << " violated";
      throw ParameterError(os.str());
    };
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(d)) fail("finiteness");
    if (!(a > 0.0)) fail("a > 0");
    if (!(b > 0.0)) fail("b > 0");
    if (!(d > 0.0)) fail("d > 0");
    if (!(a > d)) fail("a > d");
  }

  /// sqrt(a^2 + 3 d^2)
  [[nodiscard]] double q() const { return std::sqrt(a * a + 3.0 * d * d); }
  /// sqrt(a^2 - d^2), the elbow height when the elbow sits on the vertical axis.
  [[nodiscard]] double elbow_height() const { return std::sqrt(a * a - d * d); }
  /// Constraint scale used to make residual tolerances unit-free.
  [[nodiscard]] double residual_scale() const { return b * b; }
};

inline bool operator==(const ParameterSet& l, const ParameterSet& r) {
  return l.a == r.a && l.b == r.b && l.d == r.d;
}

/// Coordinate layout of a Delta configuration:
/// x1,y1,z1,x2,y2,z2,x3,y3,z3,ca1,sa1,ca2,sa2,ca3,sa3.
namespace layout {
inline constexpr int kDim = 15;
inline constexpr int kConstraints = 12;
inline constexpr int block(int limb) { return 3 * limb; }       // limb in {0,1,2}
inline constexpr int ca(int limb) { return 9 + 2 * limb; }
inline constexpr int sa(int limb) { return 10 + 2 * limb; }
}  // namespace layout

/// Rotation by 120 degrees about the z axis.
inline const Mat3& rotation_a() {
  static const Mat3 kA = [] {
    const double h = std::sqrt(3.0) / 2.0;
    Mat3 m;
    m << -0.5, -h, 0.0,
         h, -0.5, 0.0,
         0.0, 0.0, 1.0;
    return m;
  }();
  return kA;
}

enum class DeltaVariant { Original, Tilde };

/// Residuals in the fixed order (s1,s2,s3,c1,c2,c3,l1..l6).
inline Vector delta_residuals(const ParameterSet& prm, const Vector& x, DeltaVariant variant) {
  using namespace layout;
  if (x.size() != kDim) throw InputError("Delta configuration must have 15 entries");
  const Mat3& A = rotation_a();
  Vector f(kConstraints);
  std::array<Vec3, 3> pos;
  std::array<Vec3, 3> arm;
  for (int i = 0; i < 3; ++i) {
    pos[i] = x.segment<3>(block(i));
    arm[i] = Vec3(prm.d + x(ca(i)), 0.0, x(sa(i)));
    f(i) = pos[i].squaredNorm() - prm.b * prm.b;
    f(3 + i) = x(ca(i)) * x(ca(i)) + x(sa(i)) * x(sa(i)) - prm.a * prm.a;
  }
  const Vec3 v1 = arm[0] + pos[0];
  Vec3 top;
  Vec3 bottom;
  if (variant == DeltaVariant::Original) {
    top = v1 - A * (arm[1] + pos[1]);
    bottom = v1 - A.transpose() * (arm[2] + pos[2]);
  } else {
    top = v1 - A * arm[1] - pos[1];
    bottom = v1 - A.transpose() * arm[2] - pos[2];
  }
  f.segment<3>(6) = top;
  f.segment<3>(9) = bottom;
  return f;
}

inline Matrix delta_jacobian(const ParameterSet& prm, const Vector& x, DeltaVariant variant) {
  using namespace layout;
  (void)prm;
  if (x.size() != kDim) throw InputError("Delta configuration must have 15 entries");
  const Mat3& A = rotation_a();
  const Mat3 Ai = A.transpose();
  Matrix jac = Matrix::Zero(kConstraints, kDim);
  for (int i = 0; i < 3; ++i) {
    jac.block<1, 3>(i, block(i)) = 2.0 * x.segment<3>(block(i)).transpose();
    jac(3 + i, ca(i)) = 2.0 * x(ca(i));
    jac(3 + i, sa(i)) = 2.0 * x(sa(i));
  }
  const Vec3 ex = Vec3::UnitX();
  const Vec3 ez = Vec3::UnitZ();
  const bool original = variant == DeltaVariant::Original;
  // Rows 6..8: limb 1 against limb 2; rows 9..11: limb 1 against limb 3.
  const std::array<Mat3, 2> arm_rot = {A, Ai};
  for (int k = 0; k < 2; ++k) {
    const int row = 6 + 3 * k;
    const int other = 1 + k;
    jac.block<3, 3>(row, block(0)) = Mat3::Identity();
    jac.block<3, 1>(row, ca(0)) = ex;
    jac.block<3, 1>(row, sa(0)) = ez;
    jac.block<3, 3>(row, block(other)) = original ? Mat3(-arm_rot[k]) : Mat3(-Mat3::Identity());
    jac.block<3, 1>(row, ca(other)) = -arm_rot[k] * ex;
    jac.block<3, 1>(row, sa(other)) = -arm_rot[k] * ez;
  }
  return jac;
}

/// Original -> tilde coordinates: rotate the limb-2 block by A and the limb-3 block by A^-1.
inline Vector to_tilde(const Vector& x) {
  if (x.size() != layout::kDim) throw InputError("Delta configuration must have 15 entries");
  Vector y = x;
  y.segment<3>(3) = rotation_a() * x.segment<3>(3);
  y.segment<3>(6) = rotation_a().transpose() * x.segment<3>(6);
  return y;
}

inline Vector from_tilde(const Vector& y) {
  if (y.size() != layout::kDim) throw InputError("Delta configuration must have 15 entries");
  Vector x = y;
  x.segment<3>(3) = rotation_a().transpose() * y.segment<3>(3);
  x.segment<3>(6) = rotation_a() * y.segment<3>(6);
  return x;
}

/// Elbow position of limb `limb` (1, 2 or 3) at arm angle psi:
/// m1 = A w, m2 = A^-1 w, m3 = w with w = (d + a cos psi, 0, a sin psi).
inline Vec3 arm_center(const ParameterSet& prm, int limb, double psi) {
  const Vec3 w(prm.d + prm.a * std::cos(psi), 0.0, prm.a * std::sin(psi));
  switch (limb) {
    case 1: return rotation_a() * w;
    case 2: return rotation_a().transpose() * w;
    case 3: return w;
    default: throw InputError("limb index must be 1, 2 or 3");
  }
}

/// d/dpsi of arm_center.
inline Vec3 arm_center_derivative(const ParameterSet& prm, int limb, double psi) {
  const Vec3 w(-prm.a * std::sin(psi), 0.0, prm.a * std::cos(psi));
  switch (limb) {
    case 1: return rotation_a() * w;
    case 2: return rotation_a().transpose() * w;
    case 3: return w;
    default: throw InputError("limb index must be 1, 2 or 3");
  }
}

/// Platform point p (in the frame where limb i's elbow is m_i) and the three arm angles.
struct PlatformPose {
  Vec3 p = Vec3::Zero();
  std::array<double, 3> psi{0.0, 0.0, 0.0};
};

/// Tilde-coordinate configuration of a pose. Position block i is A^-1 (p - m_i(psi_i)),
/// which makes every tilde l-residual vanish identically; the s-residuals vanish iff
/// |p - m_i(psi_i)| = b.
inline Vector lift_pose(const ParameterSet& prm, const PlatformPose& pose) {
  using namespace layout;
  Vector y(kDim);
  const Mat3 Ai = rotation_a().transpose();
  for (int i = 0; i < 3; ++i) {
    y.segment<3>(block(i)) = Ai * (pose.p - arm_center(prm, i + 1, pose.psi[i]));
    y(ca(i)) = prm.a * std::cos(pose.psi[i]);
    y(sa(i)) = prm.a * std::sin(pose.psi[i]);
  }
  return y;
}

/// Inverse of lift_pose on the tilde variety; angles normalized to (-pi, pi].
inline PlatformPose pose_of(const ParameterSet& prm, const Vector& tilde_config,
                            const ToleranceConfig& tol = {}) {
  using namespace layout;
  const Vector f = delta_residuals(prm, tilde_config, DeltaVariant::Tilde);
  const double worst = f.cwiseAbs().maxCoeff();
  if (worst > tol.residual_tol * prm.residual_scale()) {
    std::ostringstream os;
    os << "configuration is off the tilde variety (worst residual " << worst << ")";
    throw ConsistencyError(os.str(), worst);
  }
  PlatformPose pose;
  for (int i = 0; i < 3; ++i) {
    pose.psi[i] = normalize_angle(std::atan2(tilde_config(sa(i)), tilde_config(ca(i))));
  }
  pose.p = rotation_a() * tilde_config.segment<3>(block(0)) + arm_center(prm, 1, pose.psi[0]);
  return pose;
}

/// Evaluatable constraint map with analytic Jacobian.
struct ConstraintSystem {
  int dim_in = 0;
  int dim_out = 0;
  std::function<Vector(const Vector&)> evaluate;
  std::function<Matrix(const Vector&)> jacobian;
  std::string order_tag;
  /// Residual magnitudes are compared against tolerance * scale.
  double scale = 1.0;
};

struct Actuator {
  enum class Kind { Coordinate, CirclePair };
  Kind kind = Kind::Coordinate;
  /// One index for Coordinate; (cos-like, sin-like) indices for CirclePair.
  std::vector<int> indices;
};

enum class MechanismKind { Delta, CrankSlider };

struct FormalManipulator {
  std::string name;
  MechanismKind kind = MechanismKind::Delta;
  ConstraintSystem constraints;
  std::vector<Actuator> actuators;
  int forward_dim = 0;
  std::function<Vector(const Vector&)> forward;
  std::function<Matrix(const Vector&)> forward_jacobian;
  /// Set for Delta mechanisms only.
  std::optional<ParameterSet> params;
  DeltaVariant variant = DeltaVariant::Original;

  /// Expected local dimension of the configuration space at regular points.
  [[nodiscard]] int local_dimension() const { return constraints.dim_in - constraints.dim_out; }

  [[nodiscard]] const ParameterSet& delta_params() const {
    if (kind != MechanismKind::Delta || !params) {
      throw InputError("operation requires a Delta mechanism");
    }
    return *params;
  }
};

inline FormalManipulator build_delta(const ParameterSet& prm,
                                     DeltaVariant variant = DeltaVariant::Original) {
  prm.validate();
  FormalManipulator m;
  m.name = variant == DeltaVariant::Original ? "delta" : "delta-tilde";
  m.kind = MechanismKind::Delta;
  m.params = prm;
  m.variant = variant;
  m.constraints.dim_in = layout::kDim;
  m.constraints.dim_out = layout::kConstraints;
  m.constraints.order_tag = "s1,s2,s3,c1,c2,c3,l1,l2,l3,l4,l5,l6";
  m.constraints.scale = prm.residual_scale();
  m.constraints.evaluate = [prm, variant](const Vector& x) {
    return delta_residuals(prm, x, variant);
  };
  m.constraints.jacobian = [prm, variant](const Vector& x) {
    return delta_jacobian(prm, x, variant);
  };
  for (int i = 0; i < 3; ++i) {
    m.actuators.push_back({Actuator::Kind::CirclePair, {layout::ca(i), layout::sa(i)}});
  }
  // Forward kinematics: v1 = (d + ca1 + x1, y1, z1 + sa1).
  m.forward_dim = 3;
  m.forward = [prm](const Vector& x) -> Vector {
    return Vector(Vec3(prm.d + x(layout::ca(0)) + x(0), x(1), x(2) + x(layout::sa(0))));
  };
  m.forward_jacobian = [](const Vector&) {
    Matrix g = Matrix::Zero(3, layout::kDim);
    g.block<3, 3>(0, 0) = Mat3::Identity();
    g(0, layout::ca(0)) = 1.0;
    g(2, layout::sa(0)) = 1.0;
    return g;
  };
  return m;
}

/// Crank slider with coordinates (x_B, y_B, x_C):
/// f1 = x_B^2 + y_B^2 - l1^2, f2 = (x_C - x_B)^2 + y_B^2 - l2^2.
inline FormalManipulator build_crank_slider(double l1, double l2) {
  if (!(std::isfinite(l1) && l1 > 0.0) || !(std::isfinite(l2) && l2 > 0.0)) {
    throw ParameterError("crank slider lengths must be positive (l1 > 0, l2 > 0)");
  }
  FormalManipulator m;
  m.name = "crank-slider";
  m.kind = MechanismKind::CrankSlider;
  m.constraints.dim_in = 3;
  m.constraints.dim_out = 2;
  m.constraints.order_tag = "f1,f2";
  m.constraints.scale = std::max(l1, l2) * std::max(l1, l2);
  m.constraints.evaluate = [l1, l2](const Vector& x) -> Vector {
    if (x.size() != 3) throw InputError("crank slider configuration must have 3 entries");
    const double dx = x(2) - x(0);
    return Vector(Vec2(x(0) * x(0) + x(1) * x(1) - l1 * l1, dx * dx + x(1) * x(1) - l2 * l2));
  };
  m.constraints.jacobian = [](const Vector& x) -> Matrix {
    if (x.size() != 3) throw InputError("crank slider configuration must have 3 entries");
    const double dx = x(2) - x(0);
    Matrix j(2, 3);
    j << 2.0 * x(0), 2.0 * x(1), 0.0,
         -2.0 * dx, 2.0 * x(1), 2.0 * dx;
    return j;
  };
  m.actuators.push_back({Actuator::Kind::Coordinate, {2}});
  m.forward_dim = 2;
  m.forward = [](const Vector& x) -> Vector { return Vector(x.head<2>()); };
  m.forward_jacobian = [](const Vector&) {
    Matrix g = Matrix::Zero(2, 3);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    return g;
  };
  return m;
}

/// Max absolute residual of `x` under the manipulator's constraints.
inline double max_residual(const FormalManipulator& m, const Vector& x) {
  return m.constraints.evaluate(x).cwiseAbs().maxCoeff();
}

}  // namespace deltacss

#pragma once

// Rotation algebra shared by the filter, the kinematics layer and the simulator.
//
// Conventions:
//  * quaternions are Hamilton, scalar-first (w, x, y, z), and map body vectors
//    into the reference frame: v_ref = q ⊗ v_body ⊗ q*;
//  * Euler angles are intrinsic Z-Y-X (yaw, then pitch, then roll), so
//    R = Rz(yaw) · Ry(pitch) · Rx(roll);
//  * angles are radians internally. Use to_degrees() at reporting boundaries.

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gaitkit/error.hpp"

namespace gaitkit {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using QuaternionT = Eigen::Quaternion<Scalar>;
template <typename Scalar>
using RotationMatrixT = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Quaternion = QuaternionT<double>;
using RotationMatrix = RotationMatrixT<double>;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Z-Y-X Euler angles in radians. `gimbal_locked` is set by rotmat_to_euler when
/// |pitch| >= 89 degrees; roll is then pinned to zero and yaw absorbs the rest.
template <typename Scalar>
struct EulerAnglesT {
  Scalar roll{0};
  Scalar pitch{0};
  Scalar yaw{0};
  bool gimbal_locked{false};

  EulerAnglesT to_degrees() const {
    return {rad_to_deg(roll), rad_to_deg(pitch), rad_to_deg(yaw), gimbal_locked};
  }
};

using EulerAngles = EulerAnglesT<double>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Scalar>
bool all_finite(const QuaternionT<Scalar>& q) {
  return q.coeffs().allFinite();
}

template <typename Scalar>
QuaternionT<Scalar> quat_identity() {
  return QuaternionT<Scalar>(Scalar(1), Scalar(0), Scalar(0), Scalar(0));
}

/// Hamilton product a ⊗ b.
template <typename Scalar>
QuaternionT<Scalar> quat_multiply(const QuaternionT<Scalar>& a, const QuaternionT<Scalar>& b) {
  return QuaternionT<Scalar>(a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
                             a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
                             a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
                             a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w());
}

template <typename Scalar>
QuaternionT<Scalar> quat_conjugate(const QuaternionT<Scalar>& q) {
  return QuaternionT<Scalar>(q.w(), -q.x(), -q.y(), -q.z());
}

template <typename Scalar>
QuaternionT<Scalar> quat_normalize(const QuaternionT<Scalar>& q) {
  const Scalar n = q.coeffs().norm();
  if (!(n > Scalar(0)) || !std::isfinite(n)) {
    throw Error(ErrorKind::NonFinite, "cannot normalize a zero or non-finite quaternion");
  }
  return QuaternionT<Scalar>(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
}

/// Quaternion for a rotation of |rotvec| radians about rotvec's direction.
template <typename Scalar>
QuaternionT<Scalar> quat_from_rotation_vector(const Vec3T<Scalar>& rotvec) {
  const Scalar angle = rotvec.norm();
  if (angle < Scalar(1e-12)) {
    // second-order series keeps the map smooth through zero
    const Vec3T<Scalar> half = rotvec / Scalar(2);
    return quat_normalize(QuaternionT<Scalar>(Scalar(1) - half.squaredNorm() / Scalar(2), half.x(),
                                              half.y(), half.z()));
  }
  const Scalar s = std::sin(angle / Scalar(2)) / angle;
  return QuaternionT<Scalar>(std::cos(angle / Scalar(2)), s * rotvec.x(), s * rotvec.y(),
                             s * rotvec.z());
}

template <typename Scalar>
QuaternionT<Scalar> quat_from_axis_angle(const Vec3T<Scalar>& axis, Scalar angle) {
  return quat_from_rotation_vector<Scalar>(axis.normalized() * angle);
}

/// Direction cosine matrix of a unit quaternion. Inputs off the unit sphere by
/// more than 1e-6 are normalized first.
template <typename Scalar>
RotationMatrixT<Scalar> quat_to_rotmat(const QuaternionT<Scalar>& q_in) {
  if (!all_finite(q_in)) {
    throw Error(ErrorKind::NonFinite, "quat_to_rotmat: non-finite quaternion");
  }
  const QuaternionT<Scalar> q =
      std::abs(q_in.coeffs().norm() - Scalar(1)) > Scalar(1e-6) ? quat_normalize(q_in) : q_in;
  const Scalar w = q.w(), x = q.x(), y = q.y(), z = q.z();
  RotationMatrixT<Scalar> r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Rotates v by q via the sandwich product q ⊗ (0, v) ⊗ q*.
template <typename Scalar>
Vec3T<Scalar> quat_rotate(const QuaternionT<Scalar>& q, const Vec3T<Scalar>& v) {
  const QuaternionT<Scalar> p(Scalar(0), v.x(), v.y(), v.z());
  const QuaternionT<Scalar> r = quat_multiply(quat_multiply(q, p), quat_conjugate(q));
  return {r.x(), r.y(), r.z()};
}

template <typename Scalar>
RotationMatrixT<Scalar> rot_x(Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  RotationMatrixT<Scalar> r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

template <typename Scalar>
RotationMatrixT<Scalar> rot_y(Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  RotationMatrixT<Scalar> r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

template <typename Scalar>
RotationMatrixT<Scalar> rot_z(Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  RotationMatrixT<Scalar> r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

template <typename Scalar>
RotationMatrixT<Scalar> euler_to_rotmat(const EulerAnglesT<Scalar>& e) {
  return rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll);
}

template <typename Scalar>
QuaternionT<Scalar> euler_to_quat(const EulerAnglesT<Scalar>& e) {
  const Scalar cr = std::cos(e.roll / 2), sr = std::sin(e.roll / 2);
  const Scalar cp = std::cos(e.pitch / 2), sp = std::sin(e.pitch / 2);
  const Scalar cy = std::cos(e.yaw / 2), sy = std::sin(e.yaw / 2);
  return QuaternionT<Scalar>(cy * cp * cr + sy * sp * sr, cy * cp * sr - sy * sp * cr,
                             cy * sp * cr + sy * cp * sr, sy * cp * cr - cy * sp * sr);
}

namespace detail {
// atan2 lands on -pi for a negative-zero numerator; fold it onto +pi.
template <typename Scalar>
Scalar wrap_half_open(Scalar angle) {
  return angle <= -std::numbers::pi_v<Scalar> ? angle + 2 * std::numbers::pi_v<Scalar> : angle;
}
}  // namespace detail

/// Z-Y-X decomposition. pitch ∈ [-90°, 90°], roll and yaw ∈ (-180°, 180°].
template <typename Scalar>
EulerAnglesT<Scalar> rotmat_to_euler(const RotationMatrixT<Scalar>& r) {
  if (!all_finite(r)) {
    throw Error(ErrorKind::NonFinite, "rotmat_to_euler: non-finite matrix");
  }
  constexpr Scalar kGimbalBand = deg_to_rad(Scalar(89));
  EulerAnglesT<Scalar> e;
  e.pitch = std::atan2(-r(2, 0), std::hypot(r(2, 1), r(2, 2)));
  if (std::abs(e.pitch) >= kGimbalBand) {
    e.gimbal_locked = true;
    e.roll = Scalar(0);
    e.yaw = detail::wrap_half_open(std::atan2(-r(0, 1), r(1, 1)));
    return e;
  }
  e.roll = detail::wrap_half_open(std::atan2(r(2, 1), r(2, 2)));
  e.yaw = detail::wrap_half_open(std::atan2(r(1, 0), r(0, 0)));
  return e;
}

/// Orientation of the distal frame expressed in the proximal frame:
/// rotmat(conj(q_proximal) ⊗ q_distal).
template <typename Scalar>
RotationMatrixT<Scalar> relative_rotation(const QuaternionT<Scalar>& q_proximal,
                                          const QuaternionT<Scalar>& q_distal) {
  return quat_to_rotmat(quat_multiply(quat_conjugate(q_proximal), q_distal));
}

template <typename Scalar>
RotationMatrixT<Scalar> skew(const Vec3T<Scalar>& v) {
  RotationMatrixT<Scalar> m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Roll/pitch attitude (yaw = 0) whose body frame sees the reference "up" axis
/// along the measured specific force.
template <typename Scalar>
QuaternionT<Scalar> attitude_from_gravity(const Vec3T<Scalar>& accel) {
  EulerAnglesT<Scalar> e;
  e.roll = std::atan2(accel.y(), accel.z());
  e.pitch = std::atan2(-accel.x(), std::hypot(accel.y(), accel.z()));
  return euler_to_quat(e);
}

/// Geodesic angle between two orientations, radians in [0, pi].
template <typename Scalar>
Scalar quat_angle_between(const QuaternionT<Scalar>& a, const QuaternionT<Scalar>& b) {
  const QuaternionT<Scalar> d = quat_multiply(quat_conjugate(a), b);
  const Scalar vec = Vec3T<Scalar>(d.x(), d.y(), d.z()).norm();
  return Scalar(2) * std::atan2(vec, std::abs(d.w()));
}

}  // namespace gaitkit

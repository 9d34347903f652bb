#pragma once

// Unit quaternions stored scalar-first (w, x, y, z) with the Hamilton product.
// Functions are templated so they can be evaluated on dual numbers.

#include "morphco/ad/dual.hpp"
#include "morphco/common/types.hpp"

#include <cmath>
#include <type_traits>

namespace morphco::dynamics {

// Rotation vectors with ‖φ‖ below this use the Taylor branch of Exp.
inline constexpr double kExpSmallAngle = 1e-8;

template <class S>
Vec4<S> quat_identity() {
  return Vec4<S>(S(1.0), S(0.0), S(0.0), S(0.0));
}

template <class S>
Vec4<S> quat_multiply(const Vec4<S>& a, const Vec4<S>& b) {
  return Vec4<S>(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                 a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                 a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                 a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

template <class S>
Vec4<S> quat_conjugate(const Vec4<S>& q) {
  return Vec4<S>(q[0], -q[1], -q[2], -q[3]);
}

// Rotation matrix of a (not necessarily normalized) quaternion; the result is
// orthonormal only when ‖q‖ = 1.
template <class S>
Mat3<S> quat_to_rotation(const Vec4<S>& q) {
  const S w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3<S> r;
  r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  r(0, 1) = 2.0 * (x * y - w * z);
  r(0, 2) = 2.0 * (x * z + w * y);
  r(1, 0) = 2.0 * (x * y + w * z);
  r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  r(1, 2) = 2.0 * (y * z - w * x);
  r(2, 0) = 2.0 * (x * z - w * y);
  r(2, 1) = 2.0 * (y * z + w * x);
  r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return r;
}

inline Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
  if (out[0] < 0.0) out = -out;
  return out;
}

// Exp: rotation vector φ (axis · angle) to unit quaternion.
template <class S>
Vec4<S> quat_exp(const Vec3<S>& phi) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const S theta2 = phi.squaredNorm();
  if (ad::value(theta2) < kExpSmallAngle * kExpSmallAngle) {
    // cos(θ/2) ≈ 1 − θ²/8, sin(θ/2)/θ ≈ 1/2 − θ²/48
    const S k = 0.5 - theta2 / 48.0;
    return Vec4<S>(1.0 - theta2 / 8.0, k * phi[0], k * phi[1], k * phi[2]);
  }
  const S theta = sqrt(theta2);
  const S k = sin(0.5 * theta) / theta;
  return Vec4<S>(cos(0.5 * theta), k * phi[0], k * phi[1], k * phi[2]);
}

// Log: unit quaternion to rotation vector (double only, used by diagnostics).
inline Eigen::Vector3d quat_log(const Eigen::Vector4d& q) {
  Eigen::Vector4d u = q.normalized();
  if (u[0] < 0.0) u = -u;
  const Eigen::Vector3d v = u.tail<3>();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  return 2.0 * std::atan2(s, u[0]) / s * v;
}

// Integrates a world-frame angular velocity over Δt: Exp(ω·Δt) ∘ q,
// renormalized to unit length.
template <class S>
Vec4<S> quat_exp_integrate(const Vec4<S>& quat, const Vec3<S>& omega, const S& dt) {
  if constexpr (std::is_same_v<S, double>) {
    if ((omega * dt).isZero(0.0)) return quat;
  }
  Vec4<S> out = quat_multiply<S>(quat_exp<S>(Vec3<S>(omega * dt)), quat);
  using std::sqrt;
  return out / sqrt(out.squaredNorm());
}

inline Eigen::Vector4d quat_exp_integrate(const Eigen::Vector4d& quat, const Eigen::Vector3d& omega,
                                          double dt) {
  return quat_exp_integrate<double>(quat, omega, dt);
}

// Elementary rotations about the coordinate axes.
template <class S>
Mat3<S> rot_x(const S& a) {
  using std::cos;
  using std::sin;
  Mat3<S> r;
  r << S(1.0), S(0.0), S(0.0), S(0.0), cos(a), -sin(a), S(0.0), sin(a), cos(a);
  return r;
}
template <class S>
Mat3<S> rot_y(const S& a) {
  using std::cos;
  using std::sin;
  Mat3<S> r;
  r << cos(a), S(0.0), sin(a), S(0.0), S(1.0), S(0.0), -sin(a), S(0.0), cos(a);
  return r;
}
template <class S>
Mat3<S> rot_z(const S& a) {
  using std::cos;
  using std::sin;
  Mat3<S> r;
  r << cos(a), -sin(a), S(0.0), sin(a), cos(a), S(0.0), S(0.0), S(0.0), S(1.0);
  return r;
}

// Rotation about an arbitrary unit axis (Rodrigues).
template <class S>
Mat3<S> axis_angle(const Eigen::Vector3d& axis, const S& angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle), s = sin(angle);
  const S t = 1.0 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  Mat3<S> r;
  r(0, 0) = c + t * (x * x);
  r(0, 1) = t * (x * y) - s * z;
  r(0, 2) = t * (x * z) + s * y;
  r(1, 0) = t * (x * y) + s * z;
  r(1, 1) = c + t * (y * y);
  r(1, 2) = t * (y * z) - s * x;
  r(2, 0) = t * (x * z) - s * y;
  r(2, 1) = t * (y * z) + s * x;
  r(2, 2) = c + t * (z * z);
  return r;
}

}  // namespace morphco::dynamics

#pragma once

// Floating-base rigid multibody kinematics and dynamics.
//
// Velocity convention (mixed representation): ν = (v_B, ω_B, ṡ) where v_B is
// the linear velocity of the base-frame origin and ω_B the base angular
// velocity, both in world coordinates. Frame Jacobians stack (v_C; ω_C) with
// the same convention, and the generalized forces conjugate to ν are
// (force, moment about the base origin, joint torques).
//
// All algorithms are templates on the scalar type so they can be evaluated on
// dual numbers.

#include "morphco/ad/dual.hpp"
#include "morphco/common/types.hpp"
#include "morphco/dynamics/kinematic_tree.hpp"
#include "morphco/dynamics/quaternion.hpp"

#include <vector>

namespace morphco::dynamics {

template <class S>
struct Configuration {
  Vec3<S> base_position = Vec3<S>::Zero();
  Vec4<S> base_quaternion = quat_identity<S>();
  VecX<S> joint_positions;
};

template <class S>
struct Velocity {
  Vec3<S> base_linear = Vec3<S>::Zero();
  Vec3<S> base_angular = Vec3<S>::Zero();
  VecX<S> joint_velocities;

  VecX<S> stacked() const {
    VecX<S> nu(6 + joint_velocities.size());
    nu << base_linear, base_angular, joint_velocities;
    return nu;
  }
  static Velocity from_stacked(const VecX<S>& nu) {
    Velocity v;
    v.base_linear = nu.template head<3>();
    v.base_angular = nu.template segment<3>(3);
    v.joint_velocities = nu.tail(nu.size() - 6);
    return v;
  }
};

template <class S>
struct Pose {
  Vec3<S> position;
  Mat3<S> rotation;
};

template <class S>
using Jacobian = Eigen::Matrix<S, 6, Eigen::Dynamic>;

// World poses of every body frame plus the world joint axis of each body.
template <class S>
struct BodyPoses {
  std::vector<Vec3<S>> origin;
  std::vector<Mat3<S>> rotation;
  std::vector<Vec3<S>> axis;
};

// Throws if the configuration does not match the tree or the quaternion is not
// unit within 1e-9.
void validate(const KinematicTree& tree, const Configuration<double>& q);
void validate(const KinematicTree& tree, const Velocity<double>& v);

template <class S>
Configuration<S> zero_configuration(const KinematicTree& tree) {
  Configuration<S> q;
  q.joint_positions = VecX<S>::Zero(tree.dof_count());
  return q;
}

template <class S>
Velocity<S> zero_velocity(const KinematicTree& tree) {
  Velocity<S> v;
  v.joint_velocities = VecX<S>::Zero(tree.dof_count());
  return v;
}

template <class S>
BodyPoses<S> body_poses(const KinematicTree& tree, const Configuration<S>& q) {
  const int nb = tree.body_count();
  BodyPoses<S> out;
  out.origin.resize(nb);
  out.rotation.resize(nb);
  out.axis.assign(nb, Vec3<S>::Zero());
  out.origin[0] = q.base_position;
  out.rotation[0] = quat_to_rotation<S>(q.base_quaternion);
  for (int b = 1; b < nb; ++b) {
    const Body& body = tree.body(b);
    const int p = body.parent;
    const Joint& j = body.joint;
    out.origin[b] = out.origin[p] + out.rotation[p] * j.offset_translation.cast<S>();
    const Mat3<S> frame = out.rotation[p] * j.offset_rotation.cast<S>();
    if (body.dof >= 0) {
      out.rotation[b] = frame * axis_angle<S>(j.axis, q.joint_positions[body.dof]);
      out.axis[b] = frame * j.axis.cast<S>();
    } else {
      out.rotation[b] = frame;
    }
  }
  return out;
}

template <class S>
Pose<S> frame_pose(const KinematicTree& tree, const BodyPoses<S>& poses, int frame) {
  const Frame& f = tree.frame(frame);
  return {poses.origin[f.body] + poses.rotation[f.body] * f.translation.cast<S>(),
          poses.rotation[f.body] * f.rotation.cast<S>()};
}

template <class S>
Pose<S> forward_kinematics(const KinematicTree& tree, const Configuration<S>& q, int frame) {
  return frame_pose(tree, body_poses(tree, q), frame);
}

inline Pose<double> forward_kinematics(const KinematicTree& tree, const Configuration<double>& q,
                                       const std::string& frame) {
  return forward_kinematics<double>(tree, q, tree.frame_index(frame));
}

// Jacobian of a point rigidly attached to `body`, located at world position
// `point`: (v_point; ω_body) = J ν.
template <class S>
Jacobian<S> point_jacobian(const KinematicTree& tree, const BodyPoses<S>& poses, int body,
                           const Vec3<S>& point) {
  Jacobian<S> jac = Jacobian<S>::Zero(6, tree.velocity_size());
  jac.template block<3, 3>(0, 0).setIdentity();
  const Vec3<S> r = point - poses.origin[0];
  // v = v_B + ω_B × r  →  columns of −[r]×
  jac(0, 4) = r.z();
  jac(0, 5) = -r.y();
  jac(1, 3) = -r.z();
  jac(1, 5) = r.x();
  jac(2, 3) = r.y();
  jac(2, 4) = -r.x();
  jac.template block<3, 3>(3, 3).setIdentity();
  for (int b = body; b > 0; b = tree.body(b).parent) {
    const int dof = tree.body(b).dof;
    if (dof < 0) continue;
    const Vec3<S>& z = poses.axis[b];
    jac.template block<3, 1>(0, 6 + dof) = z.cross(Vec3<S>(point - poses.origin[b]));
    jac.template block<3, 1>(3, 6 + dof) = z;
  }
  return jac;
}

template <class S>
Jacobian<S> frame_jacobian(const KinematicTree& tree, const BodyPoses<S>& poses, int frame) {
  const Pose<S> pose = frame_pose(tree, poses, frame);
  return point_jacobian(tree, poses, tree.frame(frame).body, pose.position);
}

template <class S>
Jacobian<S> frame_jacobian(const KinematicTree& tree, const Configuration<S>& q, int frame) {
  return frame_jacobian(tree, body_poses(tree, q), frame);
}

inline Jacobian<double> frame_jacobian(const KinematicTree& tree, const Configuration<double>& q,
                                       const std::string& frame) {
  return frame_jacobian<double>(tree, q, tree.frame_index(frame));
}

// Generalized force produced by a force applied at a world point of `body`
// plus a free moment: Jᵀ (f; m).
template <class S>
VecX<S> point_wrench_to_generalized(const KinematicTree& tree, const BodyPoses<S>& poses, int body,
                                    const Vec3<S>& point, const Vec3<S>& force,
                                    const Vec3<S>& moment) {
  VecX<S> out = VecX<S>::Zero(tree.velocity_size());
  out.template head<3>() = force;
  out.template segment<3>(3) = moment + Vec3<S>(point - poses.origin[0]).cross(force);
  for (int b = body; b > 0; b = tree.body(b).parent) {
    const int dof = tree.body(b).dof;
    if (dof < 0) continue;
    out[6 + dof] =
        poses.axis[b].dot(Vec3<S>(moment + Vec3<S>(point - poses.origin[b]).cross(force)));
  }
  return out;
}

namespace detail {

template <class S>
Mat3<S> skew(const Vec3<S>& v) {
  Mat3<S> m;
  m << S(0.0), -v.z(), v.y(), v.z(), S(0.0), -v.x(), -v.y(), v.x(), S(0.0);
  return m;
}

}  // namespace detail

// Mass matrix by the composite-rigid-body algorithm. Spatial quantities are
// expressed in world coordinates about the world origin, ordered
// (angular; linear).
template <class S>
MatX<S> mass_matrix(const KinematicTree& tree, const BodyPoses<S>& poses) {
  using detail::skew;
  const int nb = tree.body_count();
  const int nv = tree.velocity_size();

  std::vector<Mat6<S>> composite(nb);
  for (int b = 0; b < nb; ++b) {
    const SpatialInertia& in = tree.body(b).inertia;
    const Mat3<S>& rot = poses.rotation[b];
    const Vec3<S> c = poses.origin[b] + rot * in.com.cast<S>();
    const Mat3<S> ic = rot * in.inertia.cast<S>() * rot.transpose();
    const Mat3<S> cx = skew<S>(c);
    Mat6<S> spatial;
    spatial.template block<3, 3>(0, 0) = ic + in.mass * cx * cx.transpose();
    spatial.template block<3, 3>(0, 3) = in.mass * cx;
    spatial.template block<3, 3>(3, 0) = in.mass * cx.transpose();
    spatial.template block<3, 3>(3, 3) = Mat3<S>::Identity() * S(in.mass);
    composite[b] = spatial;
  }
  for (int b = nb - 1; b > 0; --b) composite[tree.body(b).parent] += composite[b];

  // Motion subspace columns (angular; linear) for every velocity coordinate.
  Eigen::Matrix<S, 6, Eigen::Dynamic> motion = Eigen::Matrix<S, 6, Eigen::Dynamic>::Zero(6, nv);
  std::vector<int> owner(nv, 0);
  const Vec3<S>& pb = poses.origin[0];
  for (int k = 0; k < 3; ++k) {
    motion(3 + k, k) = S(1.0);
    Vec3<S> e = Vec3<S>::Zero();
    e[k] = S(1.0);
    motion.template block<3, 1>(0, 3 + k) = e;
    motion.template block<3, 1>(3, 3 + k) = pb.cross(e);
  }
  for (int dof = 0; dof < tree.dof_count(); ++dof) {
    const int b = tree.dof_body(dof);
    owner[6 + dof] = b;
    motion.template block<3, 1>(0, 6 + dof) = poses.axis[b];
    motion.template block<3, 1>(3, 6 + dof) = poses.origin[b].cross(poses.axis[b]);
  }

  MatX<S> m = MatX<S>::Zero(nv, nv);
  for (int j = 0; j < nv; ++j) {
    const Vec6<S> f = composite[owner[j]] * motion.col(j);
    for (int i = 0; i <= j; ++i) {
      // Coordinate i must act on a body that supports owner[j].
      if (!tree.supports(owner[i], owner[j])) continue;
      m(i, j) = motion.col(i).dot(f);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

template <class S>
MatX<S> mass_matrix(const KinematicTree& tree, const Configuration<S>& q) {
  return mass_matrix(tree, body_poses(tree, q));
}

// Recursive Newton-Euler inverse dynamics: returns M(q) ν̇ + h(q, ν) where h
// contains velocity-product terms, gravity and viscous joint friction b_v·ṡ.
template <class S>
VecX<S> inverse_dynamics(const KinematicTree& tree, const BodyPoses<S>& poses,
                         const Velocity<S>& nu, const VecX<S>& nu_dot,
                         const Eigen::Vector3d& gravity, const Eigen::VectorXd& joint_viscous) {
  const int nb = tree.body_count();
  std::vector<Vec3<S>> omega(nb), omega_dot(nb), accel(nb);
  std::vector<Vec3<S>> force(nb), moment(nb);

  omega[0] = nu.base_angular;
  omega_dot[0] = nu_dot.template segment<3>(3);
  accel[0] = nu_dot.template head<3>();
  for (int b = 1; b < nb; ++b) {
    const Body& body = tree.body(b);
    const int p = body.parent;
    const Vec3<S> r = poses.origin[b] - poses.origin[p];
    accel[b] = accel[p] + omega_dot[p].cross(r) + omega[p].cross(Vec3<S>(omega[p].cross(r)));
    if (body.dof >= 0) {
      const Vec3<S>& z = poses.axis[b];
      const S qd = nu.joint_velocities[body.dof];
      const S qdd = nu_dot[6 + body.dof];
      omega[b] = omega[p] + z * qd;
      omega_dot[b] = omega_dot[p] + z * qdd + omega[p].cross(z) * qd;
    } else {
      omega[b] = omega[p];
      omega_dot[b] = omega_dot[p];
    }
  }

  const Vec3<S> g = gravity.cast<S>();
  for (int b = 0; b < nb; ++b) {
    const SpatialInertia& in = tree.body(b).inertia;
    const Mat3<S>& rot = poses.rotation[b];
    const Vec3<S> d = rot * in.com.cast<S>();
    const Vec3<S> acom =
        accel[b] + omega_dot[b].cross(d) + omega[b].cross(Vec3<S>(omega[b].cross(d)));
    const Mat3<S> ic = rot * in.inertia.cast<S>() * rot.transpose();
    const Vec3<S> f = (acom - g) * S(in.mass);
    force[b] = f;
    moment[b] = ic * omega_dot[b] + omega[b].cross(Vec3<S>(ic * omega[b])) + d.cross(f);
  }
  for (int b = nb - 1; b > 0; --b) {
    const int p = tree.body(b).parent;
    force[p] += force[b];
    moment[p] += moment[b] + Vec3<S>(poses.origin[b] - poses.origin[p]).cross(force[b]);
  }

  VecX<S> out(tree.velocity_size());
  out.template head<3>() = force[0];
  out.template segment<3>(3) = moment[0];
  for (int dof = 0; dof < tree.dof_count(); ++dof) {
    const int b = tree.dof_body(dof);
    const double bv = joint_viscous.size() > 0 ? joint_viscous[dof] : 0.0;
    out[6 + dof] = poses.axis[b].dot(moment[b]) + nu.joint_velocities[dof] * bv;
  }
  return out;
}

template <class S>
VecX<S> inverse_dynamics(const KinematicTree& tree, const Configuration<S>& q,
                         const Velocity<S>& nu, const VecX<S>& nu_dot,
                         const Eigen::Vector3d& gravity, const Eigen::VectorXd& joint_viscous) {
  return inverse_dynamics(tree, body_poses(tree, q), nu, nu_dot, gravity, joint_viscous);
}

// h(q, ν): Coriolis/centrifugal terms, gravity and viscous joint friction.
template <class S>
VecX<S> bias_forces(const KinematicTree& tree, const Configuration<S>& q, const Velocity<S>& nu,
                    const Eigen::Vector3d& gravity, const Eigen::VectorXd& joint_viscous) {
  return inverse_dynamics(tree, q, nu, VecX<S>(VecX<S>::Zero(tree.velocity_size())), gravity,
                          joint_viscous);
}

// Kinetic energy ½ νᵀ M ν and gravitational potential −Σ m gᵀ c.
double kinetic_energy(const KinematicTree& tree, const Configuration<double>& q,
                      const Velocity<double>& nu);
double potential_energy(const KinematicTree& tree, const Configuration<double>& q,
                        const Eigen::Vector3d& gravity);
Eigen::Vector3d center_of_mass(const KinematicTree& tree, const Configuration<double>& q);

}  // namespace morphco::dynamics

#pragma once

#include "morphco/dynamics/multibody.hpp"

#include <random>

namespace morphco::testing {

using dynamics::Configuration;
using dynamics::Joint;
using dynamics::JointType;
using dynamics::KinematicTree;
using dynamics::SpatialInertia;
using dynamics::Velocity;

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return dynamics::quat_to_rotation<double>(q);
}

inline SpatialInertia random_inertia(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> c(-0.2, 0.2);
  SpatialInertia box = SpatialInertia::solid_box(u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)),
                                                 Eigen::Vector3d(c(rng), c(rng), c(rng)));
  const Eigen::Matrix3d r = random_rotation(rng);
  box.inertia = r * box.inertia * r.transpose();
  return box;
}

// Fuselage plus two mirrored wing chains of `chain` revolute joints each.
// Chains use random (mirrored) axes so every code path is exercised.
inline KinematicTree mirrored_tree(std::mt19937_64& rng, int chain) {
  KinematicTree::Builder builder("fuselage", random_inertia(rng));
  builder.add_frame("base", "fuselage", Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> axes;
  for (int i = 0; i < chain; ++i) axes.push_back(random_unit(rng));
  const Eigen::Vector3d root(-0.3, 0.05, 0.02);
  std::uniform_real_distribution<double> u(0.02, 0.3);
  std::vector<SpatialInertia> inertias;
  for (int i = 0; i <= chain; ++i) {
    SpatialInertia in = SpatialInertia::solid_box(u(rng), Eigen::Vector3d(0.2, 0.5, 0.02),
                                                  Eigen::Vector3d(-0.05, 0.25, 0.0));
    inertias.push_back(in);
  }
  const Eigen::Matrix3d mirror = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();
  for (int side = 0; side < 2; ++side) {
    const std::string prefix = side == 0 ? "left" : "right";
    const Eigen::Matrix3d m = side == 0 ? Eigen::Matrix3d::Identity() : mirror;
    std::string parent = "fuselage";
    for (int i = 0; i <= chain; ++i) {
      Joint j;
      j.name = prefix + "_j" + std::to_string(i);
      if (i < chain) {
        j.type = JointType::Revolute;
        // Mirrored revolute axis: −M·a keeps motions mirror-symmetric for equal angles.
        j.axis = side == 0 ? axes[i] : Eigen::Vector3d(-(mirror * axes[i]));
      }
      if (i == 0) j.offset_translation = m * root;
      SpatialInertia in = inertias[i];
      in.com = m * in.com;
      in.inertia = m * in.inertia * m;
      const std::string name = i == chain ? prefix + "_wing" : prefix + "_link" + std::to_string(i);
      builder.add_body(name, in, parent, j);
      parent = name;
    }
    builder.add_frame(prefix + "_tip", prefix + "_wing", m * Eigen::Vector3d(0.0, 0.5, 0.0));
  }
  return std::move(builder).build();
}

inline Configuration<double> random_configuration(std::mt19937_64& rng, const KinematicTree& tree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  Configuration<double> q;
  q.base_position = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 5.0;
  q.base_quaternion = Eigen::Vector4d(n(rng), n(rng), n(rng), n(rng)).normalized();
  q.joint_positions = Eigen::VectorXd(tree.dof_count());
  for (int i = 0; i < tree.dof_count(); ++i) q.joint_positions[i] = u(rng) * 1.2;
  return q;
}

inline Velocity<double> random_velocity(std::mt19937_64& rng, const KinematicTree& tree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Velocity<double> v;
  v.base_linear = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 10.0;
  v.base_angular = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 2.0;
  v.joint_velocities = Eigen::VectorXd(tree.dof_count());
  for (int i = 0; i < tree.dof_count(); ++i) v.joint_velocities[i] = u(rng) * 3.0;
  return v;
}

// Moves a configuration along ν for time t (exact flow for constant ν on the
// base translation/joints, exponential map on the base rotation).
inline Configuration<double> advance(const Configuration<double>& q, const Velocity<double>& v,
                                     double t) {
  Configuration<double> out = q;
  out.base_position += v.base_linear * t;
  out.base_quaternion = dynamics::quat_multiply<double>(
      dynamics::quat_exp<double>(Eigen::Vector3d(v.base_angular * t)), q.base_quaternion);
  out.joint_positions += v.joint_velocities * t;
  return out;
}

}  // namespace morphco::testing

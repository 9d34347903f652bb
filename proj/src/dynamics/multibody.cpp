#include "morphco/dynamics/multibody.hpp"

#include <cmath>

namespace morphco::dynamics {

void validate(const KinematicTree& tree, const Configuration<double>& q) {
  if (q.joint_positions.size() != tree.dof_count())
    throw Error("configuration has " + std::to_string(q.joint_positions.size()) +
                " joint positions, tree has " + std::to_string(tree.dof_count()) + " joints");
  if (std::abs(q.base_quaternion.norm() - 1.0) > 1e-9)
    throw Error("base quaternion is not unit norm");
  if (!q.base_position.allFinite() || !q.joint_positions.allFinite())
    throw Error("configuration contains non-finite values");
}

void validate(const KinematicTree& tree, const Velocity<double>& v) {
  if (v.joint_velocities.size() != tree.dof_count())
    throw Error("velocity has " + std::to_string(v.joint_velocities.size()) +
                " joint velocities, tree has " + std::to_string(tree.dof_count()) + " joints");
}

double kinetic_energy(const KinematicTree& tree, const Configuration<double>& q,
                      const Velocity<double>& nu) {
  const Eigen::VectorXd v = nu.stacked();
  return 0.5 * v.dot(mass_matrix<double>(tree, q) * v);
}

Eigen::Vector3d center_of_mass(const KinematicTree& tree, const Configuration<double>& q) {
  const auto poses = body_poses<double>(tree, q);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double m = 0.0;
  for (int b = 0; b < tree.body_count(); ++b) {
    const SpatialInertia& in = tree.body(b).inertia;
    c += in.mass * (poses.origin[b] + poses.rotation[b] * in.com);
    m += in.mass;
  }
  return m > 0.0 ? Eigen::Vector3d(c / m) : c;
}

double potential_energy(const KinematicTree& tree, const Configuration<double>& q,
                        const Eigen::Vector3d& gravity) {
  return -tree.total_mass() * gravity.dot(center_of_mass(tree, q));
}

}  // namespace morphco::dynamics

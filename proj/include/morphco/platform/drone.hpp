#pragma once

// Assembled drone: fuselage plus two mirrored wings, each attached by a chain
// of revolute joints (or rigidly when the chain is empty), with one
// aerodynamic model per body and a nose-mounted propeller.
//
// Equations of motion: M(q) ν̇ + h(q, ν) = (0; τ) + f*, with
//   f* = Σ_i J_Aᵢᵀ (f_Aᵢ; m_Aᵢ) + J_Bᵀ (x_B; k_u x_B) u.

#include "morphco/actuation/components.hpp"
#include "morphco/aero/coefficient_model.hpp"
#include "morphco/aero/library.hpp"
#include "morphco/dynamics/multibody.hpp"
#include "morphco/platform/design.hpp"

#include <array>
#include <string>
#include <vector>

namespace morphco::platform {

class AssemblyError : public Error {
 public:
  using Error::Error;
};

struct AeroBody {
  std::string name;
  int body = 0;
  int frame = 0;
  aero::AeroGeometry geometry;
  aero::CoefficientModel model;
};

struct MassBreakdown {
  double fuselage = 0.0;
  double payload = 0.0;
  double propulsion = 0.0;
  double wings = 0.0;   // both wings
  double servos = 0.0;  // all servos
  double total() const { return fuselage + payload + propulsion + wings + servos; }
};

enum AeroBodyIndex : int { kFuselage = 0, kLeftWing = 1, kRightWing = 2 };

struct DroneModel {
  DesignParams design;
  dynamics::KinematicTree tree;
  std::array<AeroBody, 3> aero;
  std::vector<actuation::ServoModel> servos;  // one per joint coordinate
  actuation::PropulsionModel propulsion;
  aero::AirProperties air;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  Eigen::VectorXd joint_viscous;
  MassBreakdown masses;
  double mass = 0.0;
  // Frames checked against obstacles: nose, tail, left tip, right tip.
  std::vector<int> points;

  int joint_count() const { return tree.dof_count(); }
  double controller_weight() const { return design.controller_weight; }
};

// Left-wing chain coordinates come first, then the mirrored right-wing ones.
DroneModel assemble_drone(const DesignParams& design, const actuation::ComponentCatalog& catalog,
                          const aero::AeroLibrary& library, const Materials& materials = {});

// Static wing orientation of the left wing; the right wing is its mirror.
Eigen::Matrix3d static_wing_rotation(double dihedral, double incidence, double sweep);
// Joint axis of the left wing in its joint frame.
Eigen::Vector3d joint_axis(JointAxis axis);

struct DynamicsOptions {
  bool aerodynamics = true;  // false: vacuum
  bool propulsion = true;
};

template <class S>
struct ExternalForce {
  VecX<S> generalized;
  std::array<aero::AeroState<S>, 3> states;
  std::array<aero::Wrench<S>, 3> wrenches;  // world frame, at the aero frame origins
};

// Aerodynamic state of every body from its own frame velocity.
template <class S>
std::array<aero::AeroState<S>, 3> aero_states(const DroneModel& model,
                                              const dynamics::BodyPoses<S>& poses,
                                              const VecX<S>& nu, const Eigen::Vector3d& wind) {
  std::array<aero::AeroState<S>, 3> out;
  for (int i = 0; i < 3; ++i) {
    const AeroBody& ab = model.aero[i];
    const dynamics::Pose<S> pose = dynamics::frame_pose(model.tree, poses, ab.frame);
    const dynamics::Jacobian<S> jac =
        dynamics::point_jacobian(model.tree, poses, ab.body, pose.position);
    const Vec3<S> velocity = jac.template topRows<3>() * nu;
    out[i] = aero::compute_aero_state<S>(pose.rotation, velocity, wind, ab.geometry, model.air);
  }
  return out;
}

template <class S>
ExternalForce<S> external_force(const DroneModel& model, const dynamics::BodyPoses<S>& poses,
                                const VecX<S>& nu, const S& u, const Eigen::Vector3d& wind,
                                const DynamicsOptions& options = {}) {
  const dynamics::KinematicTree& tree = model.tree;
  ExternalForce<S> out;
  out.generalized = VecX<S>::Zero(tree.velocity_size());
  if (options.aerodynamics) {
    out.states = aero_states<S>(model, poses, nu, wind);
    for (int i = 0; i < 3; ++i) {
      const AeroBody& ab = model.aero[i];
      const dynamics::Pose<S> pose = dynamics::frame_pose(tree, poses, ab.frame);
      out.wrenches[i] = aero::body_wrench<S>(out.states[i], ab.model, ab.geometry, model.air.density);
      out.generalized += dynamics::point_wrench_to_generalized<S>(
          tree, poses, ab.body, pose.position, out.wrenches[i].force, out.wrenches[i].moment);
    }
  }
  if (options.propulsion)
    out.generalized += actuation::thrust_generalized_force<S>(tree, poses, model.propulsion, u);
  return out;
}

// M ν̇ + h − (0; τ) − f*. Zero along any dynamically consistent motion.
template <class S>
VecX<S> dynamics_residual(const DroneModel& model, const dynamics::Configuration<S>& q,
                          const dynamics::Velocity<S>& nu, const VecX<S>& nu_dot,
                          const VecX<S>& tau, const S& u, const Eigen::Vector3d& wind,
                          const DynamicsOptions& options = {}) {
  const dynamics::BodyPoses<S> poses = dynamics::body_poses(model.tree, q);
  VecX<S> r = dynamics::inverse_dynamics<S>(model.tree, poses, nu, nu_dot, model.gravity,
                                            model.joint_viscous);
  r.tail(model.joint_count()) -= tau;
  r -= external_force<S>(model, poses, nu.stacked(), u, wind, options).generalized;
  return r;
}

// Solves M ν̇ = (0; τ) + f* − h for ν̇. Throws NumericError if M is not
// positive definite or the result is not finite.
Eigen::VectorXd forward_dynamics(const DroneModel& model, const dynamics::Configuration<double>& q,
                                 const dynamics::Velocity<double>& nu, const Eigen::VectorXd& tau,
                                 double u, const Eigen::Vector3d& wind,
                                 const DynamicsOptions& options = {});

// Straight and level flight along world x at constant ground speed: finds the
// pitch angle and thrust that zero the x and z force rows. Joint torques hold
// s = 0. The pitching-moment row is reported, not solved (no elevator).
struct TrimResult {
  double pitch = 0.0;   // nose up [rad]
  double thrust = 0.0;  // [N]
  Eigen::VectorXd residual;
  Eigen::VectorXd joint_torques;
  double lift = 0.0;    // world-z aerodynamic force [N]
  double weight = 0.0;  // [N]
  bool converged = false;
  int iterations = 0;
};

TrimResult level_trim(const DroneModel& model, double speed,
                      const Eigen::Vector3d& wind = Eigen::Vector3d::Zero(),
                      double pitch_guess = 0.05, double thrust_guess = 1.0);

// Base quaternion for a nose-up pitch θ and heading (yaw) ψ.
Eigen::Vector4d attitude_quaternion(double pitch, double yaw = 0.0, double roll = 0.0);

}  // namespace morphco::platform

#pragma once

// Servo and propulsion models and their power consumption.
//
// Servo power:      W_s = ṡτ + ṡτ_f + R k_v² τ² + R k_v² τ_f²,  τ_f = b_v ṡ
// Propulsion power: W_p = ξ₀ + ξ₁u + ξ₂u²
//
// k_v enters the Joule terms as the current per unit torque [A/(N·m)].

#include "morphco/common/types.hpp"
#include "morphco/dynamics/multibody.hpp"

#include <string>
#include <vector>

namespace morphco::actuation {

struct ServoModel {
  std::string id;
  double resistance = 0.0;   // R [Ω]
  double k_v = 0.0;
  double viscous = 1e-3;     // b_v [N·m·s/rad]
  double tau_max = 0.0;      // [N·m]
  double omega_max = 0.0;    // [rad/s]
  double mass = 0.0;         // [kg]

  void validate() const;
};

struct PropulsionModel {
  std::string id;
  double xi0 = 0.0, xi1 = 0.0, xi2 = 0.0;
  double k_u = 0.01;   // reaction torque per unit thrust [m]
  double u_max = 0.0;  // [N]
  double mass = 0.0;   // [kg]

  void validate() const;
};

// Evaluated exactly as written; negative mechanical power reduces the total
// unless `rectified` is set, which clips ṡ(τ + τ_f) at zero.
template <class S>
S servo_power(const ServoModel& servo, const S& joint_velocity, const S& torque,
              bool rectified = false) {
  const S tau_f = servo.viscous * joint_velocity;
  S mechanical = joint_velocity * torque + joint_velocity * tau_f;
  if (rectified && mechanical < 0.0) mechanical = S(0.0);
  const double joule = servo.resistance * servo.k_v * servo.k_v;
  return mechanical + joule * torque * torque + joule * tau_f * tau_f;
}

// Logs a warning when |ṡ| or |τ| exceed the servo limits.
double servo_power(const ServoModel& servo, double joint_velocity, double torque);

template <class S>
S propulsion_power(const PropulsionModel& prop, const S& u) {
  return prop.xi0 + prop.xi1 * u + prop.xi2 * u * u;
}

// Throws BoundViolation unless 0 ≤ u ≤ u_max.
double propeller_power(const PropulsionModel& prop, double u);

// Generalized force of thrust u along the base x axis plus the reaction torque
// k_u·u about the same axis, applied at the base origin.
template <class S>
VecX<S> thrust_generalized_force(const dynamics::KinematicTree& tree,
                                 const dynamics::BodyPoses<S>& poses, const PropulsionModel& prop,
                                 const S& u) {
  const Vec3<S> axis = poses.rotation[0].col(0);
  const Vec3<S> force = axis * u;
  const Vec3<S> moment = axis * (prop.k_u * u);
  return dynamics::point_wrench_to_generalized<S>(tree, poses, 0, poses.origin[0], force, moment);
}

inline Eigen::VectorXd thrust_generalized_force(const dynamics::KinematicTree& tree,
                                                const dynamics::Configuration<double>& q,
                                                const PropulsionModel& prop, double u) {
  if (u < 0.0 || u > prop.u_max)
    throw BoundViolation("thrust " + std::to_string(u) + " N outside [0, u_max]");
  return thrust_generalized_force<double>(tree, dynamics::body_poses<double>(tree, q), prop, u);
}

class ComponentCatalog {
 public:
  ComponentCatalog() = default;
  ComponentCatalog(std::vector<ServoModel> servos, std::vector<PropulsionModel> propulsion);

  const std::vector<ServoModel>& servos() const { return servos_; }
  const std::vector<PropulsionModel>& propulsion() const { return propulsion_; }
  const ServoModel& servo(const std::string& id) const;
  const PropulsionModel& propulsion(const std::string& id) const;

 private:
  std::vector<ServoModel> servos_;
  std::vector<PropulsionModel> propulsion_;
};

// Catalog file: a YAML stream with one document per component, each carrying
// `kind: servo` or `kind: propulsion`.
ComponentCatalog parse_catalog(const std::string& text, const std::string& source);
ComponentCatalog load_catalog(const std::string& path);
std::string catalog_to_yaml(const ComponentCatalog& catalog);

}  // namespace morphco::actuation

#pragma once

// Flight scenario: initial condition, constant wind, obstacles, ordered
// checkpoints and the bounds used by the transcription. Angles are radians
// here and degrees in scenario files.

#include "morphco/common/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace morphco::trajopt {

// Scenario cannot be transcribed for the requested knot count or model.
class TranscriptionError : public Error {
 public:
  using Error::Error;
};

struct InitialCondition {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector4d quaternion{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z)
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  // Empty means zero for every joint of the model.
  Eigen::VectorXd joints, joint_velocities, joint_accelerations;
};

enum class ObstacleKind { Cylinder, Sphere, Ground };

struct Obstacle {
  ObstacleKind kind = ObstacleKind::Sphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // cylinder: z ignored
  double radius = 0.0;
  double level = 0.0;  // ground plane height

  static Obstacle cylinder(double x, double y, double radius);
  static Obstacle sphere(const Eigen::Vector3d& center, double radius);
  static Obstacle ground(double level);
};

struct PositionBall {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.5;
};

struct VelocityBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d tolerance = Eigen::Vector3d::Ones();
};

// Body x axis within `cone` of the unit `heading`.
struct OrientationCone {
  Eigen::Vector3d heading = Eigen::Vector3d::UnitX();
  double cone = deg2rad(15.0);
};

struct AngularVelocityBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d tolerance = Eigen::Vector3d::Ones();
};

struct Checkpoint {
  std::string name;
  // Either a fraction of the horizon or an explicit knot index.
  std::optional<double> fraction;
  std::optional<int> knot;
  std::optional<PositionBall> position;
  std::optional<VelocityBox> velocity;
  std::optional<OrientationCone> orientation;
  std::optional<AngularVelocityBox> angular_velocity;

  int knot_index(int knots) const;
};

struct ScenarioBounds {
  double alpha_min = deg2rad(-10.0), alpha_max = deg2rad(10.0);
  double beta_min = deg2rad(-30.0), beta_max = deg2rad(30.0);
  double joint_min = deg2rad(-30.0), joint_max = deg2rad(30.0);
  double joint_acceleration = deg2rad(6000.0);  // |s̈| [rad/s²]
  double torque_rate = 50.0;                    // |τ̇| [N·m/s]
  double thrust_rate = 50.0;                    // |u̇| [N/s]
  double thrust_min = 0.0;                      // [N]
  double dt_max = 0.1;                          // [s]
};

struct Scenario {
  std::string name;
  int knots = 60;
  Eigen::Vector3d wind = Eigen::Vector3d::Zero();
  InitialCondition initial;
  std::vector<Obstacle> obstacles;
  std::vector<Checkpoint> checkpoints;
  ScenarioBounds bounds;
  double margin = 0.05;  // obstacle clearance [m]

  // Knot indices of all checkpoints for `knots`, strictly increasing.
  // Throws TranscriptionError when they do not fit the horizon.
  std::vector<int> checkpoint_knots(int knots) const;
  void validate() const;
};

Scenario parse_scenario(const std::string& text, const std::string& source);
Scenario load_scenario(const std::string& path);
std::string scenario_to_yaml(const Scenario& scenario);

}  // namespace morphco::trajopt

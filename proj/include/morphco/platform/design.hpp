#pragma once

// Design parameters of a winged morphing drone and the material/environment
// constants used to turn them into a multibody model.

#include "morphco/aero/aero_state.hpp"
#include "morphco/common/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace morphco::platform {

enum class JointAxis { Dihedral, Sweep, Incidence };

std::string to_string(JointAxis axis);
JointAxis parse_joint_axis(const std::string& name);

// Discrete search grids. Lengths in metres, angles in degrees.
struct DesignGrid {
  double min, max, step;
  int size() const;
  double value(int index) const;
  // Index of `x` on the grid, or nullopt when x is off-grid.
  std::optional<int> index_of(double x) const;
  bool contains(double x) const { return x >= min - 1e-9 && x <= max + 1e-9; }
};

inline constexpr DesignGrid kChordGrid{0.10, 0.40, 0.05};
inline constexpr DesignGrid kAspectRatioGrid{2.0, 5.0, 0.5};
inline constexpr DesignGrid kVerticalOffsetGrid{-0.03, 0.03, 0.01};
inline constexpr DesignGrid kHorizontalOffsetGrid{-0.40, -0.10, 0.05};
inline constexpr DesignGrid kStaticAngleGrid{-10.0, 10.0, 2.0};

struct DesignParams {
  std::string name;
  double chord = 0.24;               // [m]
  double aspect_ratio = 4.5;         // span of one wing / chord
  double vertical_offset = 0.0;      // wing root z [m]
  double horizontal_offset = -0.25;  // wing root x behind the nose [m]
  // Static wing orientation at s = 0 [rad], applied dihedral, incidence, sweep.
  double dihedral = 0.0;
  double incidence = 0.0;
  double sweep = 0.0;
  // Joint chain of one wing, root to tip; mirrored on the other wing.
  std::vector<JointAxis> joint_chain;
  std::vector<std::string> servo_ids;  // one per chain entry
  std::string propulsion_id;
  double controller_weight = 1.0;      // ψ [W]

  double span() const { return aspect_ratio * chord; }
  double wing_area() const { return span() * chord; }

  // Values inside the search ranges, distinct axes, one servo per joint, ψ ≥ 0.
  void validate() const;
  // True when every continuous parameter sits exactly on its search grid.
  bool on_grid() const;
  bool operator==(const DesignParams&) const = default;
};

struct Materials {
  double wing_density = 30.0;      // EPS [kg/m³]
  double fuselage_density = 30.0;  // [kg/m³]
  // Solid wing prism of thickness ratio·c scaled by the airfoil area factor.
  double wing_thickness_ratio = 0.09;
  double airfoil_area_factor = 0.685;
  Eigen::Vector3d fuselage_size{0.75, 0.1, 0.1};
  double payload_mass = 0.35;
  double servo_size = 0.03;        // cube edge [m]
  aero::AirProperties air;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};

  void validate() const;
};

DesignParams parse_design(const std::string& text, const std::string& source);
DesignParams load_design(const std::string& path);
std::string design_to_yaml(const DesignParams& design);

Materials parse_materials(const std::string& text, const std::string& source);
Materials load_materials(const std::string& path);

}  // namespace morphco::platform

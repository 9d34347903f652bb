#pragma once

#include "morphco/common/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace morphco::dynamics {

// Mass properties of a rigid body in its own frame: rotational inertia is
// taken about the center of mass.
struct SpatialInertia {
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();

  static SpatialInertia point_mass(double mass, const Eigen::Vector3d& at);
  static SpatialInertia solid_box(double mass, const Eigen::Vector3d& size,
                                  const Eigen::Vector3d& center);

  // Rotational inertia about the body-frame origin.
  Eigen::Matrix3d inertia_about_origin() const;

  // Sum of two inertias expressed in the same frame.
  SpatialInertia operator+(const SpatialInertia& other) const;
};

enum class JointType { Revolute, Fixed };

// Attachment of a child body to its parent. The joint frame sits at
// `offset_translation` in parent coordinates and is rotated by
// `offset_rotation`; revolute joints then rotate about `axis` (joint-frame
// coordinates). The child body frame coincides with the joint frame.
struct Joint {
  std::string name;
  JointType type = JointType::Fixed;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d offset_translation = Eigen::Vector3d::Zero();
  Eigen::Matrix3d offset_rotation = Eigen::Matrix3d::Identity();
};

struct Body {
  std::string name;
  SpatialInertia inertia;
  int parent = -1;  // -1 for the floating base
  Joint joint;      // ignored for the base
  int dof = -1;     // joint coordinate index, -1 for fixed joints and the base
};

// A frame rigidly attached to a body.
struct Frame {
  std::string name;
  int body = 0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

// Floating-base tree of rigid bodies connected by revolute or fixed joints.
// Body 0 is the floating base; every other body names an earlier body as its
// parent, so the structure is acyclic by construction. Immutable once built.
class KinematicTree {
 public:
  class Builder;

  int body_count() const { return static_cast<int>(bodies_.size()); }
  int dof_count() const { return dof_count_; }
  int velocity_size() const { return 6 + dof_count_; }

  const Body& body(int i) const { return bodies_.at(i); }
  const std::vector<Body>& bodies() const { return bodies_; }
  const std::vector<Frame>& frames() const { return frames_; }
  const Frame& frame(int i) const { return frames_.at(i); }

  // Body owning a joint coordinate.
  int dof_body(int dof) const { return dof_body_.at(dof); }

  int body_index(const std::string& name) const;
  int frame_index(const std::string& name) const;
  std::optional<int> find_frame(const std::string& name) const;

  double total_mass() const;

  // True if `ancestor` lies on the path from the base to `body` (inclusive).
  bool supports(int ancestor, int body) const;

 private:
  std::vector<Body> bodies_;
  std::vector<Frame> frames_;
  std::vector<int> dof_body_;
  int dof_count_ = 0;
};

class KinematicTree::Builder {
 public:
  Builder(std::string base_name, const SpatialInertia& base_inertia);

  // Adds a body attached to `parent` and returns its index.
  int add_body(const std::string& name, const SpatialInertia& inertia, const std::string& parent,
               const Joint& joint);
  void add_frame(const std::string& name, const std::string& body,
                 const Eigen::Vector3d& translation,
                 const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity());

  KinematicTree build() &&;

 private:
  KinematicTree tree_;
};

}  // namespace morphco::dynamics

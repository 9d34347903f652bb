#include "morphco/dynamics/kinematic_tree.hpp"

#include <cmath>

namespace morphco::dynamics {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

void check_rotation(const Eigen::Matrix3d& r, const std::string& what) {
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(r.determinant() - 1.0) > 1e-9)
    throw Error(what + ": rotation is not orthonormal");
}

}  // namespace

SpatialInertia SpatialInertia::point_mass(double mass, const Eigen::Vector3d& at) {
  return {mass, at, Eigen::Matrix3d::Zero()};
}

SpatialInertia SpatialInertia::solid_box(double mass, const Eigen::Vector3d& size,
                                         const Eigen::Vector3d& center) {
  const double x2 = size.x() * size.x(), y2 = size.y() * size.y(), z2 = size.z() * size.z();
  Eigen::Matrix3d inertia = Eigen::Vector3d(y2 + z2, x2 + z2, x2 + y2).asDiagonal();
  return {mass, center, inertia * (mass / 12.0)};
}

Eigen::Matrix3d SpatialInertia::inertia_about_origin() const {
  const Eigen::Matrix3d c = skew(com);
  return inertia + mass * c * c.transpose();
}

SpatialInertia SpatialInertia::operator+(const SpatialInertia& other) const {
  const double m = mass + other.mass;
  if (m <= 0.0) return {};
  const Eigen::Vector3d c = (mass * com + other.mass * other.com) / m;
  const Eigen::Matrix3d da = skew(com - c), db = skew(other.com - c);
  const Eigen::Matrix3d inertia_sum =
      inertia + mass * da * da.transpose() + other.inertia + other.mass * db * db.transpose();
  return {m, c, inertia_sum};
}

int KinematicTree::body_index(const std::string& name) const {
  for (int i = 0; i < body_count(); ++i)
    if (bodies_[i].name == name) return i;
  throw LookupError("unknown body '" + name + "'");
}

std::optional<int> KinematicTree::find_frame(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(frames_.size()); ++i)
    if (frames_[i].name == name) return i;
  return std::nullopt;
}

int KinematicTree::frame_index(const std::string& name) const {
  if (auto i = find_frame(name)) return *i;
  throw LookupError("unknown frame '" + name + "'");
}

double KinematicTree::total_mass() const {
  double m = 0.0;
  for (const auto& b : bodies_) m += b.inertia.mass;
  return m;
}

bool KinematicTree::supports(int ancestor, int body) const {
  for (int b = body; b >= 0; b = bodies_[b].parent)
    if (b == ancestor) return true;
  return false;
}

KinematicTree::Builder::Builder(std::string base_name, const SpatialInertia& base_inertia) {
  Body base;
  base.name = std::move(base_name);
  base.inertia = base_inertia;
  tree_.bodies_.push_back(std::move(base));
}

int KinematicTree::Builder::add_body(const std::string& name, const SpatialInertia& inertia,
                                     const std::string& parent, const Joint& joint) {
  for (const auto& b : tree_.bodies_)
    if (b.name == name) throw Error("duplicate body '" + name + "'");
  Body body;
  body.name = name;
  body.inertia = inertia;
  body.parent = tree_.body_index(parent);
  body.joint = joint;
  check_rotation(joint.offset_rotation, "joint '" + joint.name + "'");
  if (joint.type == JointType::Revolute) {
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
      throw Error("joint '" + joint.name + "': revolute axis must be unit norm");
    body.dof = tree_.dof_count_++;
    tree_.dof_body_.push_back(static_cast<int>(tree_.bodies_.size()));
  }
  tree_.bodies_.push_back(std::move(body));
  return static_cast<int>(tree_.bodies_.size()) - 1;
}

void KinematicTree::Builder::add_frame(const std::string& name, const std::string& body,
                                       const Eigen::Vector3d& translation,
                                       const Eigen::Matrix3d& rotation) {
  if (tree_.find_frame(name)) throw Error("duplicate frame '" + name + "'");
  check_rotation(rotation, "frame '" + name + "'");
  tree_.frames_.push_back({name, tree_.body_index(body), translation, rotation});
}

KinematicTree KinematicTree::Builder::build() && {
  for (const auto& b : tree_.bodies_) {
    if (!(b.inertia.mass >= 0.0) || !b.inertia.com.allFinite() || !b.inertia.inertia.allFinite())
      throw Error("body '" + b.name + "': invalid inertia");
  }
  return std::move(tree_);
}

}  // namespace morphco::dynamics

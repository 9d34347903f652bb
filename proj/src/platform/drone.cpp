#include "morphco/platform/drone.hpp"

#include "morphco/dynamics/quaternion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

namespace morphco::platform {

using dynamics::Joint;
using dynamics::JointType;
using dynamics::KinematicTree;
using dynamics::SpatialInertia;

namespace {

const Eigen::Matrix3d kMirror = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();

}  // namespace

Eigen::Matrix3d static_wing_rotation(double dihedral, double incidence, double sweep) {
  // Positive incidence raises the leading edge, positive sweep moves the tip aft.
  return dynamics::rot_x(dihedral) * dynamics::rot_y(-incidence) * dynamics::rot_z(sweep);
}

Eigen::Vector3d joint_axis(JointAxis axis) {
  switch (axis) {
    case JointAxis::Dihedral: return Eigen::Vector3d::UnitX();
    case JointAxis::Incidence: return -Eigen::Vector3d::UnitY();
    case JointAxis::Sweep: return Eigen::Vector3d::UnitZ();
  }
  return Eigen::Vector3d::UnitZ();
}

Eigen::Vector4d attitude_quaternion(double pitch, double yaw, double roll) {
  const Eigen::Matrix3d r = dynamics::rot_z(yaw) * dynamics::rot_y(-pitch) * dynamics::rot_x(roll);
  return dynamics::rotation_to_quat(r);
}

DroneModel assemble_drone(const DesignParams& design, const actuation::ComponentCatalog& catalog,
                          const aero::AeroLibrary& library, const Materials& materials) {
  design.validate();
  materials.validate();

  DroneModel m;
  m.design = design;
  m.air = materials.air;
  m.gravity = materials.gravity;

  // Resolve every external reference first so the error lists all of them.
  std::vector<std::string> missing;
  std::vector<actuation::ServoModel> chain_servos;
  for (const std::string& id : design.servo_ids) {
    try {
      chain_servos.push_back(catalog.servo(id));
    } catch (const LookupError&) {
      missing.push_back("servo '" + id + "'");
    }
  }
  try {
    m.propulsion = catalog.propulsion(design.propulsion_id);
  } catch (const LookupError&) {
    missing.push_back("propulsion '" + design.propulsion_id + "'");
  }
  const aero::CoefficientModel* wing_model = nullptr;
  const aero::CoefficientModel* fuselage_model = nullptr;
  try {
    wing_model = &library.wing(design.aspect_ratio);
  } catch (const LookupError&) {
    missing.push_back("wing aero model for aspect ratio " + std::to_string(design.aspect_ratio));
  }
  if (library.has_fuselage())
    fuselage_model = &library.fuselage();
  else
    missing.push_back("fuselage aero model");
  if (!missing.empty()) {
    std::string msg = "cannot assemble drone";
    if (!design.name.empty()) msg += " '" + design.name + "'";
    msg += ": unresolved ";
    for (size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw AssemblyError(msg);
  }

  // Fuselage box with the base frame at the nose, payload at the centroid and
  // the propulsion unit as a point mass at the nose.
  const Eigen::Vector3d fsize = materials.fuselage_size;
  const Eigen::Vector3d centroid(-0.5 * fsize.x(), 0.0, 0.0);
  m.masses.fuselage = materials.fuselage_density * fsize.prod();
  m.masses.payload = materials.payload_mass;
  m.masses.propulsion = m.propulsion.mass;
  const SpatialInertia base = SpatialInertia::solid_box(m.masses.fuselage, fsize, centroid) +
                              SpatialInertia::point_mass(m.masses.payload, centroid) +
                              SpatialInertia::point_mass(m.masses.propulsion, Eigen::Vector3d::Zero());
  KinematicTree::Builder builder("fuselage", base);

  const double c = design.chord, b = design.span();
  const double thickness = materials.wing_thickness_ratio * materials.airfoil_area_factor * c;
  const double wing_mass = materials.wing_density * b * c * thickness;
  m.masses.wings = 2.0 * wing_mass;
  const double cube = materials.servo_size;
  auto servo_block = [cube](double mass) {
    return SpatialInertia::solid_box(mass, Eigen::Vector3d::Constant(cube), Eigen::Vector3d::Zero());
  };

  const Eigen::Matrix3d r0 = static_wing_rotation(design.dihedral, design.incidence, design.sweep);
  const int n = static_cast<int>(design.joint_chain.size());
  for (int side = 0; side < 2; ++side) {
    const bool left = side == 0;
    const std::string prefix = left ? "left" : "right";
    const double sign = left ? 1.0 : -1.0;
    const Eigen::Vector3d root(design.horizontal_offset, sign * 0.5 * fsize.y(),
                               design.vertical_offset);
    const Eigen::Matrix3d rot = left ? r0 : Eigen::Matrix3d(kMirror * r0 * kMirror);
    const SpatialInertia prism = SpatialInertia::solid_box(
        wing_mass, Eigen::Vector3d(c, b, thickness), Eigen::Vector3d(-0.25 * c, sign * 0.5 * b, 0.0));

    std::string parent = "fuselage";
    const std::string wing = prefix + "_wing";
    if (n == 0) {
      Joint j;
      j.name = prefix + "_root";
      j.type = JointType::Fixed;
      j.offset_translation = root;
      j.offset_rotation = rot;
      builder.add_body(wing, prism, parent, j);
    }
    for (int k = 0; k < n; ++k) {
      Joint j;
      j.name = prefix + "_" + to_string(design.joint_chain[k]);
      j.type = JointType::Revolute;
      const Eigen::Vector3d a = joint_axis(design.joint_chain[k]);
      j.axis = left ? a : Eigen::Vector3d(-(kMirror * a));
      if (k == 0) {
        j.offset_translation = root;
        j.offset_rotation = rot;
      }
      const actuation::ServoModel& servo = chain_servos[k];
      m.masses.servos += servo.mass;
      const bool last = k == n - 1;
      const std::string name = last ? wing : prefix + "_link" + std::to_string(k);
      const SpatialInertia inertia = last ? prism + servo_block(servo.mass) : servo_block(servo.mass);
      builder.add_body(name, inertia, parent, j);
      parent = name;
    }
    builder.add_frame(prefix + "_wing_aero", wing, Eigen::Vector3d(0.0, sign * 0.5 * b, 0.0));
    builder.add_frame(prefix + "_tip", wing, Eigen::Vector3d(0.0, sign * b, 0.0));
  }
  builder.add_frame("fuselage_aero", "fuselage", Eigen::Vector3d(-0.25 * fsize.x(), 0.0, 0.0));
  builder.add_frame("nose", "fuselage", Eigen::Vector3d::Zero());
  builder.add_frame("tail", "fuselage", Eigen::Vector3d(-fsize.x(), 0.0, 0.0));
  m.tree = std::move(builder).build();

  // Joint coordinates were numbered in insertion order: left chain, right chain.
  m.servos.clear();
  for (int side = 0; side < 2; ++side)
    for (int k = 0; k < n; ++k) m.servos.push_back(chain_servos[k]);
  m.joint_viscous.resize(2 * n);
  for (int i = 0; i < 2 * n; ++i) m.joint_viscous[i] = m.servos[i].viscous;

  const aero::AeroGeometry fuselage_geometry = aero::fuselage_reference_geometry();
  aero::AeroGeometry wing_geometry;
  wing_geometry.area = b * c;
  wing_geometry.chord = c;
  wing_geometry.span = b;
  wing_geometry.reynolds_length = c;
  const dynamics::KinematicTree& tree = m.tree;
  m.aero[kFuselage] = {"fuselage", 0, tree.frame_index("fuselage_aero"), fuselage_geometry,
                       *fuselage_model};
  m.aero[kLeftWing] = {"left_wing", tree.body_index("left_wing"),
                       tree.frame_index("left_wing_aero"), wing_geometry, *wing_model};
  m.aero[kRightWing] = {"right_wing", tree.body_index("right_wing"),
                        tree.frame_index("right_wing_aero"), wing_geometry, *wing_model};
  m.points = {tree.frame_index("nose"), tree.frame_index("tail"), tree.frame_index("left_tip"),
              tree.frame_index("right_tip")};
  m.mass = tree.total_mass();
  return m;
}

Eigen::VectorXd forward_dynamics(const DroneModel& model, const dynamics::Configuration<double>& q,
                                 const dynamics::Velocity<double>& nu, const Eigen::VectorXd& tau,
                                 double u, const Eigen::Vector3d& wind,
                                 const DynamicsOptions& options) {
  const int nv = model.tree.velocity_size();
  if (tau.size() != model.joint_count()) throw Error("forward dynamics: wrong torque count");
  const dynamics::BodyPoses<double> poses = dynamics::body_poses(model.tree, q);
  const Eigen::MatrixXd mass = dynamics::mass_matrix(model.tree, poses);
  const Eigen::VectorXd h = dynamics::inverse_dynamics<double>(
      model.tree, poses, nu, Eigen::VectorXd::Zero(nv), model.gravity, model.joint_viscous);
  Eigen::VectorXd rhs = external_force<double>(model, poses, nu.stacked(), u, wind, options).generalized - h;
  rhs.tail(model.joint_count()) += tau;
  const Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw NumericError("forward dynamics: mass matrix not positive definite");
  Eigen::VectorXd acc = llt.solve(rhs);
  if (!acc.allFinite()) throw NumericError("forward dynamics: non-finite acceleration");
  return acc;
}

TrimResult level_trim(const DroneModel& model, double speed, const Eigen::Vector3d& wind,
                      double pitch_guess, double thrust_guess) {
  using D = ad::ADScalar;
  const int nj = model.joint_count();
  const int nv = model.tree.velocity_size();
  TrimResult out;
  out.weight = model.mass * model.gravity.norm();

  auto evaluate = [&](const D& pitch, const D& thrust, ExternalForce<D>* ext) {
    dynamics::Configuration<D> q = dynamics::zero_configuration<D>(model.tree);
    q.base_quaternion = dynamics::quat_exp<D>(Vec3<D>(D(0.0), -pitch, D(0.0)));
    dynamics::Velocity<D> nu = dynamics::zero_velocity<D>(model.tree);
    nu.base_linear = Vec3<D>(D(speed), D(0.0), D(0.0));
    const dynamics::BodyPoses<D> poses = dynamics::body_poses(model.tree, q);
    VecX<D> r = dynamics::inverse_dynamics<D>(model.tree, poses, nu, VecX<D>::Zero(nv),
                                              model.gravity, model.joint_viscous);
    *ext = external_force<D>(model, poses, nu.stacked(), thrust, wind);
    r -= ext->generalized;
    return r;
  };

  double x[2] = {pitch_guess, thrust_guess};
  VecX<D> r;
  ExternalForce<D> ext;
  for (out.iterations = 0; out.iterations < 100; ++out.iterations) {
    r = evaluate(D::variable(x[0], 0), D::variable(x[1], 1), &ext);
    const Eigen::Vector2d f(r[0].v, r[2].v);
    if (f.norm() < 1e-11 * std::max(1.0, out.weight)) {
      out.converged = true;
      break;
    }
    Eigen::Matrix2d jac;
    jac << r[0].d[0], r[0].d[1], r[2].d[0], r[2].d[1];
    Eigen::Vector2d step = -jac.fullPivLu().solve(f);
    if (!step.allFinite()) break;
    // Keep pitch updates modest; the lift curve is only locally linear.
    const double scale = std::min(1.0, 0.1 / std::max(1e-300, std::abs(step[0])));
    x[0] += scale * step[0];
    x[1] += scale * step[1];
  }
  out.pitch = x[0];
  out.thrust = x[1];
  out.residual.resize(nv);
  for (int i = 0; i < nv; ++i) out.residual[i] = r[i].v;
  // Holding torques make the joint rows vanish.
  out.joint_torques = out.residual.tail(nj);
  out.residual.tail(nj).setZero();
  out.lift = 0.0;
  for (const auto& w : ext.wrenches) out.lift += w.force.z().v;
  return out;
}

}  // namespace morphco::platform

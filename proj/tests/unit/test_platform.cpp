#include "model_support.hpp"

#include "morphco/dynamics/quaternion.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace morphco;
using namespace morphco::platform;
using morphco::testing::assemble;

namespace {

struct State {
  dynamics::Configuration<double> q;
  dynamics::Velocity<double> nu;
  Eigen::VectorXd tau;
  double u = 0.0;
  Eigen::Vector3d wind;
};

State random_state(std::mt19937_64& rng, const DroneModel& m) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0), unit(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  const int nj = m.joint_count();
  State s;
  s.q = dynamics::zero_configuration<double>(m.tree);
  s.q.base_position = Eigen::Vector3d(20 * sym(rng), 5 * sym(rng), 5 * sym(rng));
  s.q.base_quaternion = Eigen::Vector4d(n(rng), n(rng), n(rng), n(rng)).normalized();
  for (int j = 0; j < nj; ++j) s.q.joint_positions[j] = 0.5 * sym(rng);
  s.nu = dynamics::zero_velocity<double>(m.tree);
  s.nu.base_linear = Eigen::Vector3d(12 * sym(rng), 4 * sym(rng), 4 * sym(rng));
  s.nu.base_angular = Eigen::Vector3d(2 * sym(rng), 2 * sym(rng), 2 * sym(rng));
  for (int j = 0; j < nj; ++j) s.nu.joint_velocities[j] = 3 * sym(rng);
  s.tau.resize(nj);
  for (int j = 0; j < nj; ++j) s.tau[j] = m.servos[j].tau_max * sym(rng);
  s.u = m.propulsion.u_max * unit(rng);
  s.wind = Eigen::Vector3d(2 * sym(rng), 2 * sym(rng), 0.5 * sym(rng));
  return s;
}

DesignParams chord_024() {
  DesignParams d = morphco::testing::fixed_wing_design();
  d.chord = 0.24;
  d.aspect_ratio = 4.5;
  return d;
}

}  // namespace

TEST(Assembly, FixedWingHasNoJoints) {
  const DroneModel m = assemble(morphco::testing::fixed_wing_design());
  EXPECT_EQ(m.joint_count(), 0);
  EXPECT_EQ(m.tree.velocity_size(), 6);
  EXPECT_EQ(m.aero.size(), 3u);
  EXPECT_EQ(m.points.size(), 4u);
}

TEST(Assembly, JointCountIsTwiceTheChain) {
  EXPECT_EQ(assemble(morphco::testing::energy_design()).joint_count(), 4);
  EXPECT_EQ(assemble(morphco::testing::agile_design()).joint_count(), 6);
}

TEST(Assembly, RectangularWingGeometry) {
  const DroneModel m = assemble(chord_024());
  for (int i : {kLeftWing, kRightWing}) {
    EXPECT_NEAR(m.aero[i].geometry.span, 1.08, 1e-12);
    EXPECT_NEAR(m.aero[i].geometry.area, 0.2592, 1e-12);
    EXPECT_NEAR(m.aero[i].geometry.span * m.aero[i].geometry.span / m.aero[i].geometry.area, 4.5,
                1e-12);
  }
}

TEST(Assembly, MassBreakdownMatchesHandComputation) {
  const DroneModel m = assemble(morphco::testing::energy_design());
  // Fuselage 30·0.75·0.1·0.1, payload, prop-4, two EPS wing prisms
  // 30·(4.5·0.25)·0.25·(0.09·0.685·0.25), servos 2·(0.021 + 0.018).
  const double wing = 30.0 * 1.125 * 0.25 * (0.09 * 0.685 * 0.25);
  EXPECT_NEAR(m.masses.fuselage, 0.225, 1e-15);
  EXPECT_NEAR(m.masses.payload, 0.35, 1e-15);
  EXPECT_NEAR(m.masses.propulsion, 0.045, 1e-15);
  EXPECT_NEAR(m.masses.wings, 2 * wing, 1e-15);
  EXPECT_NEAR(m.masses.servos, 0.078, 1e-15);
  EXPECT_NEAR(m.mass, m.masses.total(), 1e-14);
  EXPECT_NEAR(m.mass, 0.225 + 0.35 + 0.045 + 2 * wing + 0.078, 1e-14);
}

TEST(Assembly, EnergyDesignLighterThanAgile) {
  const double energy = assemble(morphco::testing::energy_design()).mass;
  const double agile = assemble(morphco::testing::agile_design()).mass;
  EXPECT_LT(energy, agile);
  EXPECT_NEAR(energy, 0.8, 0.25 * 0.8);
  EXPECT_NEAR(agile, 1.0, 0.25 * 1.0);
}

TEST(Assembly, SymmetricAboutTheMidPlaneAtRest) {
  for (const DesignParams& d : {morphco::testing::fixed_wing_design(),
                                morphco::testing::energy_design(), morphco::testing::agile_design()}) {
    const DroneModel m = assemble(d);
    const auto q = dynamics::zero_configuration<double>(m.tree);
    EXPECT_NEAR(dynamics::center_of_mass(m.tree, q).y(), 0.0, 1e-15) << d.name;
    const auto l = dynamics::forward_kinematics(m.tree, q, "left_tip");
    const auto r = dynamics::forward_kinematics(m.tree, q, "right_tip");
    EXPECT_NEAR(l.position.x(), r.position.x(), 1e-15);
    EXPECT_NEAR(l.position.y(), -r.position.y(), 1e-15);
    EXPECT_NEAR(l.position.z(), r.position.z(), 1e-15);
  }
}

TEST(Assembly, UnresolvedReferencesAreListed) {
  DesignParams d = morphco::testing::energy_design();
  d.servo_ids[1] = "no-such-servo";
  d.propulsion_id = "no-such-prop";
  try {
    assemble(d);
    FAIL();
  } catch (const AssemblyError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("no-such-servo"), std::string::npos) << msg;
    EXPECT_NE(msg.find("no-such-prop"), std::string::npos) << msg;
  }
  aero::AeroLibrary empty;
  EXPECT_THROW(assemble_drone(morphco::testing::fixed_wing_design(),
                              morphco::testing::default_catalog(), empty),
               AssemblyError);
}

TEST(Assembly, DesignFileRoundTripAndStrictness) {
  const DesignParams d = morphco::testing::agile_design();
  EXPECT_TRUE(d.on_grid());
  EXPECT_EQ(parse_design(design_to_yaml(d), "rt"), d);
  EXPECT_FALSE(chord_024().on_grid());
  std::string text = design_to_yaml(d);
  EXPECT_THROW(parse_design(text + "wingspan: 3\n", "x.yaml"), SchemaError);
  DesignParams bad = d;
  bad.joint_chain[1] = JointAxis::Dihedral;
  EXPECT_THROW(bad.validate(), SchemaError);
  bad = d;
  bad.horizontal_offset = -0.45;
  EXPECT_THROW(bad.validate(), SchemaError);
  bad = d;
  bad.controller_weight = -1;
  EXPECT_THROW(bad.validate(), SchemaError);
}

TEST(Assembly, MaterialsFileMatchesDefaults) {
  const Materials m = load_materials(std::string(MORPHCO_DATA_DIR) + "/materials.yaml");
  const Materials def;
  EXPECT_EQ(m.wing_density, def.wing_density);
  EXPECT_EQ(m.payload_mass, def.payload_mass);
  EXPECT_EQ(m.fuselage_size, def.fuselage_size);
  EXPECT_EQ(m.air.density, def.air.density);
  EXPECT_EQ(m.gravity, def.gravity);
}

TEST(Dynamics, FreeFallInVacuum) {
  std::mt19937_64 rng(11);
  DynamicsOptions vacuum;
  vacuum.aerodynamics = false;
  for (const DesignParams& d : {morphco::testing::fixed_wing_design(),
                                morphco::testing::agile_design()}) {
    const DroneModel m = assemble(d);
    for (int i = 0; i < 20; ++i) {
      State s = random_state(rng, m);
      s.nu = dynamics::zero_velocity<double>(m.tree);
      const Eigen::VectorXd acc =
          forward_dynamics(m, s.q, s.nu, Eigen::VectorXd::Zero(m.joint_count()), 0.0, s.wind, vacuum);
      EXPECT_TRUE(acc.head<3>().isApprox(m.gravity, 1e-12)) << acc.transpose();
      // Light servo cubes make the mass matrix poorly conditioned.
      EXPECT_LT(acc.tail(acc.size() - 3).norm(), 1e-9);
    }
  }
}

TEST(Dynamics, ForwardInverseRoundTrip) {
  std::mt19937_64 rng(12);
  for (const DesignParams& d : {morphco::testing::fixed_wing_design(),
                                morphco::testing::energy_design(), morphco::testing::agile_design()}) {
    const DroneModel m = assemble(d);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const State s = random_state(rng, m);
      const Eigen::VectorXd acc = forward_dynamics(m, s.q, s.nu, s.tau, s.u, s.wind);
      const Eigen::VectorXd r = dynamics_residual<double>(m, s.q, s.nu, acc, s.tau, s.u, s.wind);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-9) << d.name;
  }
}

TEST(Dynamics, GeneralizedForceIsThreeAeroTermsPlusThrust) {
  std::mt19937_64 rng(13);
  const DroneModel m = assemble(morphco::testing::agile_design());
  for (int i = 0; i < 20; ++i) {
    const State s = random_state(rng, m);
    const auto poses = dynamics::body_poses(m.tree, s.q);
    const Eigen::VectorXd nu = s.nu.stacked();
    const ExternalForce<double> ext = external_force<double>(m, poses, nu, s.u, s.wind);
    // Independent assembly: frame Jacobians transposed onto the world wrenches.
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(m.tree.velocity_size());
    for (int b = 0; b < 3; ++b) {
      const dynamics::Jacobian<double> jac = dynamics::frame_jacobian<double>(m.tree, s.q, m.aero[b].frame);
      Eigen::Matrix<double, 6, 1> w;
      w << ext.wrenches[b].force, ext.wrenches[b].moment;
      expected += jac.transpose() * w;
    }
    const dynamics::Jacobian<double> jb = dynamics::frame_jacobian(m.tree, s.q, "nose");
    const Eigen::Vector3d xb = dynamics::quat_to_rotation<double>(s.q.base_quaternion).col(0);
    Eigen::Matrix<double, 6, 1> thrust;
    thrust << xb, m.propulsion.k_u * xb;
    expected += jb.transpose() * thrust * s.u;
    EXPECT_TRUE(ext.generalized.isApprox(expected, 1e-12));
  }
}

TEST(Dynamics, SymmetricFlightHasNoLateralLoads) {
  for (const DesignParams& d : {morphco::testing::fixed_wing_design(),
                                morphco::testing::energy_design(), morphco::testing::agile_design()}) {
    const DroneModel m = assemble(d);
    for (double pitch : {-0.1, 0.0, 0.08}) {
      auto q = dynamics::zero_configuration<double>(m.tree);
      q.base_quaternion = attitude_quaternion(pitch);
      auto nu = dynamics::zero_velocity<double>(m.tree);
      nu.base_linear = Eigen::Vector3d(10.0, 0.0, 0.5);
      nu.base_angular = Eigen::Vector3d(0.0, 0.3, 0.0);
      const auto poses = dynamics::body_poses(m.tree, q);
      const ExternalForce<double> ext =
          external_force<double>(m, poses, nu.stacked(), 0.0, Eigen::Vector3d(-1, 0, 0));
      // Zero thrust: the propeller torque acts about the roll axis.
      EXPECT_NEAR(ext.generalized[1], 0.0, 1e-12) << d.name;
      EXPECT_NEAR(ext.generalized[3], 0.0, 1e-12) << d.name;
      EXPECT_NEAR(ext.generalized[5], 0.0, 1e-12) << d.name;
      EXPECT_NEAR(ext.states[kLeftWing].alpha, ext.states[kRightWing].alpha, 1e-14);
      EXPECT_NEAR(ext.states[kLeftWing].beta, -ext.states[kRightWing].beta, 1e-14);
    }
  }
}

TEST(Dynamics, AdJacobianMatchesFiniteDifferences) {
  using D = ad::ADScalar;
  std::mt19937_64 rng(14);
  const DroneModel m = assemble(morphco::testing::energy_design());
  const State s = random_state(rng, m);
  const Eigen::VectorXd acc = Eigen::VectorXd::Random(m.tree.velocity_size());
  // Perturb the first eight velocity coordinates.
  auto eval = [&](const VecX<D>& nu) {
    return dynamics_residual<D>(m, dynamics::Configuration<D>{s.q.base_position.cast<D>(),
                                                              s.q.base_quaternion.cast<D>(),
                                                              s.q.joint_positions.cast<D>()},
                                dynamics::Velocity<D>::from_stacked(nu), acc.cast<D>(),
                                s.tau.cast<D>(), D(s.u), s.wind);
  };
  VecX<D> nu = s.nu.stacked().cast<D>();
  for (int k = 0; k < ad::kChunk; ++k) nu[k].d[k] = 1.0;
  const VecX<D> r = eval(nu);
  const double h = 1e-6;
  for (int k = 0; k < ad::kChunk; ++k) {
    Eigen::VectorXd p = s.nu.stacked(), mm = s.nu.stacked();
    p[k] += h;
    mm[k] -= h;
    const VecX<D> rp = eval(p.cast<D>()), rm = eval(mm.cast<D>());
    for (int i = 0; i < r.size(); ++i) {
      const double fd = (rp[i].v - rm[i].v) / (2 * h);
      EXPECT_NEAR(r[i].d[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Trim, FixedWingLevelFlight) {
  const DroneModel m = assemble(morphco::testing::fixed_wing_design());
  const TrimResult t = level_trim(m, 10.0);
  ASSERT_TRUE(t.converged);
  EXPECT_GT(t.thrust, 0.0);
  EXPECT_LT(t.thrust, m.propulsion.u_max);
  // Re-evaluate the trimmed state through the plain residual.
  auto q = dynamics::zero_configuration<double>(m.tree);
  q.base_quaternion = attitude_quaternion(t.pitch);
  auto nu = dynamics::zero_velocity<double>(m.tree);
  nu.base_linear = Eigen::Vector3d(10.0, 0.0, 0.0);
  const Eigen::VectorXd r = dynamics_residual<double>(
      m, q, nu, Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(0), t.thrust, Eigen::Vector3d::Zero());
  EXPECT_NEAR(r[0], 0.0, 1e-9);
  EXPECT_NEAR(r[2], 0.0, 1e-9);
  EXPECT_NEAR(r[1], 0.0, 1e-12);
  EXPECT_NEAR(t.lift, t.weight, 0.01 * t.weight);
  // Vertical balance: lift plus the thrust component carries the weight.
  EXPECT_NEAR(t.lift + t.thrust * std::sin(t.pitch), t.weight, 1e-8);
}

TEST(Trim, ThrustGrowsWithSpeedAboveMinimumDrag) {
  const DroneModel m = assemble(morphco::testing::fixed_wing_design());
  double prev = 0.0;
  for (double v : {9.0, 10.0, 11.0, 12.0}) {
    const TrimResult t = level_trim(m, v);
    ASSERT_TRUE(t.converged);
    EXPECT_GT(t.thrust, prev);
    prev = t.thrust;
  }
}

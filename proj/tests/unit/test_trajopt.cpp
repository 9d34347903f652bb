#include "model_support.hpp"

#include "morphco/dynamics/quaternion.hpp"
#include "morphco/trajopt/trajectory.hpp"

#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <map>
#include <random>

using namespace morphco;
using namespace morphco::trajopt;
using Eigen::VectorXd;
namespace mt = morphco::testing;

namespace {

Scenario straight_scenario() {
  return load_scenario(std::string(MORPHCO_DATA_DIR) + "/scenarios/straight.yaml");
}

// One sweep joint per wing: two joint coordinates.
platform::DesignParams single_joint_design() {
  platform::DesignParams d = mt::energy_design();
  d.name = "single-joint";
  d.joint_chain = {platform::JointAxis::Sweep};
  d.servo_ids.resize(1);
  return d;
}

SolverOptions test_solver_options() {
  SolverOptions o;
  if (std::getenv("MORPHCO_VERBOSE")) {
    o.verbose = true;
    spdlog::set_level(spdlog::level::debug);
  }
  return o;
}

}  // namespace

TEST(Transcription, VariableCountFollowsTheKnotLayout) {
  const auto model = mt::assemble(single_joint_design());
  ASSERT_EQ(model.joint_count(), 2);
  Scenario sc = straight_scenario();
  sc.checkpoints.back().position->center.x() = 5.0;
  const Transcription tr(model, sc, 10);
  EXPECT_EQ(tr.problem().n, 320);
  EXPECT_EQ(tr.layout().size(), 32);
}

TEST(Transcription, NoObstacleRowsWithoutObstacles) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  const Transcription tr(model, straight_scenario(), 20);
  EXPECT_EQ(tr.row_count(RowKind::Obstacle), 0);
  Scenario sc = straight_scenario();
  sc.obstacles.push_back(Obstacle::cylinder(30.0, 5.0, 1.0));
  const Transcription with(model, sc, 20);
  EXPECT_EQ(with.row_count(RowKind::Obstacle), 19 * 4);
}

TEST(Transcription, RowCountsPerKind) {
  const auto model = mt::assemble(mt::energy_design());
  const int N = 12, nj = 4;
  const Transcription tr(model, straight_scenario(), N);
  EXPECT_EQ(tr.row_count(RowKind::Dynamics), N * (6 + nj));
  EXPECT_EQ(tr.row_count(RowKind::AeroAngle), (N - 1) * 6);
  EXPECT_EQ(tr.row_count(RowKind::Integration), (N - 1) * (3 * nj + 10));
  EXPECT_EQ(tr.row_count(RowKind::Quaternion), (N - 1) * 4);
  EXPECT_EQ(tr.row_count(RowKind::Checkpoint), 1 + 3);
  EXPECT_EQ(tr.problem().m, tr.row_count(RowKind::Dynamics) + tr.row_count(RowKind::AeroAngle) +
                                tr.row_count(RowKind::Integration) + tr.row_count(RowKind::Quaternion) +
                                tr.row_count(RowKind::Checkpoint));
}

TEST(Transcription, CheckpointBeyondHorizonIsRejected) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  Scenario sc = straight_scenario();
  sc.checkpoints.back().fraction.reset();
  sc.checkpoints.back().knot = 25;
  EXPECT_THROW(Transcription(model, sc, 20), TranscriptionError);
}

TEST(Transcription, EncodeDecodeRoundTrip) {
  const auto model = mt::assemble(mt::agile_design());
  const Transcription tr(model, straight_scenario(), 8);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorXd x(tr.problem().n);
  for (int i = 0; i < x.size(); ++i) x[i] = d(rng);
  EXPECT_EQ(tr.encode(tr.decode(x)), x);
}

TEST(InitialGuess, PinsTheInitialCondition) {
  const auto model = mt::assemble(mt::energy_design());
  Scenario sc = straight_scenario();
  sc.initial.joints = Eigen::Vector4d(0.1, -0.05, 0.1, -0.05);
  const Transcription tr(model, sc, 15);
  const VectorXd x = tr.initial_guess();
  const auto& p = tr.problem();
  for (int i = 0; i < p.n; ++i)
    if (p.x_lower[i] == p.x_upper[i]) EXPECT_EQ(x[i], p.x_lower[i]) << i;
  const auto knots = tr.decode(x);
  EXPECT_EQ(knots[0].p, sc.initial.position);
  EXPECT_EQ(knots[0].v, sc.initial.velocity);
  EXPECT_EQ(knots[0].q, sc.initial.quaternion);
  EXPECT_EQ(knots[0].s, sc.initial.joints);
}

TEST(InitialGuess, UnitQuaternionsAndStraightPath) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  Scenario sc = straight_scenario();
  Checkpoint mid;
  mid.fraction = 0.5;
  mid.position = PositionBall{{30.0, 5.0, 0.0}, 1.0};
  mid.orientation = OrientationCone{Eigen::Vector3d(1.0, 1.0, 0.0).normalized(), 0.3};
  sc.checkpoints.insert(sc.checkpoints.begin(), mid);
  const int N = 21;
  const Transcription tr(model, sc, N);
  const auto knots = tr.decode(tr.initial_guess());
  for (const Knot& k : knots) EXPECT_NEAR(k.q.norm(), 1.0, 1e-12);
  EXPECT_NEAR((knots[10].p - Eigen::Vector3d(30.0, 5.0, 0.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((knots[N - 1].p - Eigen::Vector3d(60.0, 0.0, 0.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((knots[5].p - Eigen::Vector3d(15.0, 2.5, 0.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(knots[5].v.norm(), 10.0, 1e-12);
  EXPECT_EQ(knots[N - 1].dt, 0.0);
}

TEST(InitialGuess, ZeroDistanceStaysAtTheStart) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  Scenario sc = straight_scenario();
  sc.initial.velocity.setZero();
  sc.checkpoints.back().position->center = sc.initial.position;
  sc.checkpoints.back().velocity.reset();
  const Transcription tr(model, sc, 10);
  for (const Knot& k : tr.decode(tr.initial_guess())) EXPECT_EQ(k.p, sc.initial.position);
}

TEST(Metrics, ConstantThrustOneJoule) {
  const auto model = [] {
    auto m = mt::assemble(mt::fixed_wing_design());
    m.propulsion.xi0 = 1.0;
    m.propulsion.xi1 = 0.0;
    m.propulsion.xi2 = 0.0;
    return m;
  }();
  std::vector<Knot> knots(10);
  for (Knot& k : knots) {
    k.u = 0.7;
    k.dt = 0.1;
  }
  const Metrics m = evaluate_metrics(knots, model);
  EXPECT_NEAR(m.energy, 1.0, 1e-12);
  EXPECT_NEAR(m.time, 1.0, 1e-12);
}

TEST(Metrics, ZeroStepsGiveZero) {
  const auto model = mt::assemble(mt::energy_design());
  std::vector<Knot> knots(5);
  for (Knot& k : knots) {
    k.sd = Eigen::VectorXd::Constant(4, 1.0);
    k.tau = Eigen::VectorXd::Constant(4, 0.1);
    k.u = 2.0;
  }
  const Metrics m = evaluate_metrics(knots, model);
  EXPECT_EQ(m.energy, 0.0);
  EXPECT_EQ(m.time, 0.0);
}

TEST(Metrics, MatchesPerKnotSummation) {
  const auto model = mt::assemble(mt::agile_design());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Knot> knots(7);
  double energy = 0.0, time = 0.0;
  for (Knot& k : knots) {
    k.sd = Eigen::VectorXd::NullaryExpr(6, [&] { return d(rng); });
    k.tau = Eigen::VectorXd::NullaryExpr(6, [&] { return 0.1 * d(rng); });
    k.u = 1.0 + d(rng);
    k.dt = 0.05 + 0.05 * d(rng);
    const auto& pr = model.propulsion;
    double p = pr.xi0 + pr.xi1 * k.u + pr.xi2 * k.u * k.u;
    for (int j = 0; j < 6; ++j) {
      const auto& s = model.servos[j];
      const double tf = s.viscous * k.sd[j];
      const double rk2 = s.resistance * s.k_v * s.k_v;
      p += k.sd[j] * (k.tau[j] + tf) + rk2 * (k.tau[j] * k.tau[j] + tf * tf);
    }
    energy += p * k.dt;
    time += k.dt;
  }
  const Metrics m = evaluate_metrics(knots, model);
  EXPECT_NEAR(m.energy, energy, 1e-12 * std::abs(energy));
  EXPECT_NEAR(m.time, time, 1e-15);
}

TEST(TrajectorySolve, StraightFixedWing) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  const TrajectorySolution sol = solve_trajectory(model, straight_scenario(), opt);
  EXPECT_EQ(sol.status, SolverStatus::Solved) << sol.message;
  EXPECT_LT(sol.max_violation, 1e-4);
  EXPECT_NEAR(sol.objective, model.controller_weight() * sol.time + sol.energy,
              1e-6 * std::abs(sol.objective));
  std::cerr << solution_summary(sol);
}

namespace {

// A point near the initial guess with every free variable perturbed.
VectorXd random_point(const Transcription& tr, std::mt19937& rng) {
  const auto& p = tr.problem();
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorXd x = tr.initial_guess();
  for (int i = 0; i < p.n; ++i) {
    if (p.x_lower[i] == p.x_upper[i]) continue;
    double v = x[i] + 0.05 * d(rng);
    if (p.x_lower[i] > -kInfinity && p.x_upper[i] < kInfinity) {
      const double lo = p.x_lower[i], hi = p.x_upper[i];
      v = std::clamp(v, lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo));
    }
    x[i] = v;
  }
  return x;
}

Scenario obstacle_scenario() {
  Scenario sc = straight_scenario();
  sc.obstacles.push_back(Obstacle::cylinder(30.0, 4.0, 1.0));
  sc.obstacles.push_back(Obstacle::sphere({20.0, -3.0, 1.0}, 0.8));
  sc.obstacles.push_back(Obstacle::ground(-5.0));
  Checkpoint mid;
  mid.name = "mid";
  mid.fraction = 0.5;
  mid.position = PositionBall{{30.0, 0.0, 0.0}, 1.0};
  mid.orientation = OrientationCone{Eigen::Vector3d::UnitX(), 0.3};
  mid.angular_velocity = AngularVelocityBox{};
  sc.checkpoints.insert(sc.checkpoints.begin(), mid);
  return sc;
}

void expect_derivatives_match(const platform::DesignParams& design) {
  const auto model = mt::assemble(design);
  const Transcription tr(model, obstacle_scenario(), 6);
  std::mt19937 rng(42);
  for (int trial = 0; trial < 3; ++trial) {
    const VectorXd x = random_point(tr, rng);
    const DerivativeReport rep = derivative_check(tr.problem(), x);
    EXPECT_LT(rep.max_jacobian_error, 1e-4)
        << design.name << ": " << tr.problem().label(rep.worst_row) << ", column " << rep.worst_col;
    EXPECT_LT(rep.max_gradient_error, 1e-5) << design.name;
    EXPECT_EQ(rep.missing_entries, 0) << design.name;
  }
}

}  // namespace

TEST(DerivativeCheck, FixedWing) { expect_derivatives_match(mt::fixed_wing_design()); }
TEST(DerivativeCheck, SingleJointPerWing) { expect_derivatives_match(single_joint_design()); }
TEST(DerivativeCheck, ThreeJointsPerWing) { expect_derivatives_match(mt::agile_design()); }

TEST(DerivativeCheck, HessianMatchesGradientDifferences) {
  const auto model = mt::assemble(mt::energy_design());
  const Transcription tr(model, obstacle_scenario(), 4);
  const auto& p = tr.problem();
  std::mt19937 rng(5);
  const VectorXd x = random_point(tr, rng);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorXd lambda(p.m);
  for (int j = 0; j < p.m; ++j) lambda[j] = d(rng);
  const double sigma = 0.7;
  VectorXd values(p.hess_rows.size());
  p.hessian(x, sigma, lambda, values);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p.n, p.n);
  for (size_t k = 0; k < p.hess_rows.size(); ++k) {
    h(p.hess_rows[k], p.hess_cols[k]) += values[static_cast<int>(k)];
    if (p.hess_rows[k] != p.hess_cols[k]) h(p.hess_cols[k], p.hess_rows[k]) += values[static_cast<int>(k)];
  }
  // ∇L = σ∇f + Jᵀλ by central differences of the AD gradient and Jacobian.
  auto grad_lag = [&](const VectorXd& y) {
    VectorXd g(p.n), jv(p.jac_rows.size());
    p.gradient(y, g);
    p.jacobian(y, jv);
    g *= sigma;
    for (size_t k = 0; k < p.jac_rows.size(); ++k)
      g[p.jac_cols[k]] += lambda[p.jac_rows[k]] * jv[static_cast<int>(k)];
    return g;
  };
  double worst = 0.0;
  VectorXd y = x;
  for (int i = 0; i < p.n; ++i) {
    if (p.x_lower[i] == p.x_upper[i]) continue;
    const double step = 1e-5 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + step;
    const VectorXd gp = grad_lag(y);
    y[i] = x[i] - step;
    const VectorXd gm = grad_lag(y);
    y[i] = x[i];
    const VectorXd col = (gp - gm) / (2.0 * step);
    for (int j = 0; j < p.n; ++j) {
      if (p.x_lower[j] == p.x_upper[j]) continue;
      worst = std::max(worst, std::abs(h(j, i) - col[j]) / std::max(1.0, std::abs(col[j])));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

namespace {

// Fine RK4 simulation sampled every `dt`; knot accelerations are the forward
// dynamics at the sampled state.
std::vector<Knot> simulate(const platform::DroneModel& model, const Scenario& sc, int knots, double dt,
                           double u, const VectorXd& tau) {
  const int nj = model.joint_count();
  struct State {
    dynamics::Configuration<double> q;
    dynamics::Velocity<double> nu;
  };
  State st;
  st.q.base_position = sc.initial.position;
  st.q.base_quaternion = sc.initial.quaternion;
  st.q.joint_positions = VectorXd::Zero(nj);
  st.nu.base_linear = sc.initial.velocity;
  st.nu.joint_velocities = VectorXd::Zero(nj);
  auto deriv = [&](const State& s, VectorXd& pos_dot, VectorXd& nu_dot) {
    nu_dot = platform::forward_dynamics(model, s.q, s.nu, tau, u, sc.wind);
    pos_dot.resize(7 + nj);
    const Eigen::Vector3d w = s.nu.base_angular;
    const Eigen::Vector4d wq(0.0, w.x(), w.y(), w.z());
    pos_dot << s.nu.base_linear, 0.5 * dynamics::quat_multiply<double>(wq, s.q.base_quaternion),
        s.nu.joint_velocities;
  };
  auto advance = [&](const State& s, const VectorXd& pd, const VectorXd& nd, double h) {
    State o = s;
    o.q.base_position += h * pd.head<3>();
    o.q.base_quaternion += h * pd.segment<4>(3);
    o.q.joint_positions += h * pd.tail(nj);
    VectorXd nu = s.nu.stacked() + h * nd;
    o.nu = dynamics::Velocity<double>::from_stacked(nu);
    return o;
  };
  const int sub = 100;
  const double h = dt / sub;
  std::vector<Knot> out;
  for (int k = 0; k < knots; ++k) {
    VectorXd pd, nd;
    deriv(st, pd, nd);
    Knot kn;
    kn.p = st.q.base_position;
    kn.q = st.q.base_quaternion;
    kn.s = st.q.joint_positions;
    kn.v = st.nu.base_linear;
    kn.w = st.nu.base_angular;
    kn.sd = st.nu.joint_velocities;
    kn.a = nd.head<3>();
    kn.wd = nd.segment<3>(3);
    kn.sdd = nd.tail(nj);
    kn.tau = tau;
    kn.taud = VectorXd::Zero(nj);
    kn.u = u;
    kn.ud = 0.0;
    kn.dt = k + 1 < knots ? dt : 0.0;
    out.push_back(kn);
    for (int i = 0; i < sub; ++i) {
      VectorXd p1, n1, p2, n2, p3, n3, p4, n4;
      deriv(st, p1, n1);
      deriv(advance(st, p1, n1, h / 2), p2, n2);
      deriv(advance(st, p2, n2, h / 2), p3, n3);
      deriv(advance(st, p3, n3, h), p4, n4);
      st = advance(st, (p1 + 2 * p2 + 2 * p3 + p4) / 6.0, (n1 + 2 * n2 + 2 * n3 + n4) / 6.0, h);
      st.q.base_quaternion.normalize();
    }
  }
  return out;
}

}  // namespace

TEST(Transcription, ForwardSimulationSatisfiesTheDynamicsRows) {
  for (const auto& design : {mt::fixed_wing_design(), mt::energy_design()}) {
    const auto model = mt::assemble(design);
    Scenario sc = straight_scenario();
    sc.checkpoints.clear();
    const platform::TrimResult trim = platform::level_trim(model, 10.0);
    sc.initial.quaternion = platform::attitude_quaternion(trim.pitch);
    // Largest defect per row kind at step dt over N knots.
    auto defects = [&](int N, double dt) {
      const auto knots = simulate(model, sc, N, dt, trim.thrust, trim.joint_torques);
      const Transcription tr(model, sc, N);
      VectorXd c(tr.problem().m);
      tr.problem().constraints(tr.encode(knots), c);
      std::map<RowKind, double> worst;
      for (const RowGroup& g : tr.groups())
        worst[g.kind] = std::max(worst[g.kind], c.segment(g.first_row, g.rows).lpNorm<Eigen::Infinity>());
      return worst;
    };
    auto coarse = defects(20, 0.01);
    auto fine = defects(39, 0.005);
    EXPECT_LT(coarse[RowKind::Dynamics], 1e-3) << design.name;
    EXPECT_LT(fine[RowKind::Dynamics], 1e-3) << design.name;
    // Backward Euler and the exponential update are first order: halving Δt
    // over the same horizon quarters the per-step defect. (Constant torques
    // do not hold the morphing wings: the incidence joints diverge, so only the
    // fixed wing stays near trim.)
    if (design.joint_chain.empty()) {
      EXPECT_LT(coarse[RowKind::Integration], 1e-3);
      EXPECT_LT(coarse[RowKind::Quaternion], 1e-3);
    }
    EXPECT_LT(fine[RowKind::Integration], 0.3 * coarse[RowKind::Integration]) << design.name;
    EXPECT_LT(fine[RowKind::Quaternion], 0.3 * coarse[RowKind::Quaternion]) << design.name;
  }
}

TEST(TrajectorySolve, SlalomEnergyDesign) {
  const auto model = mt::assemble(mt::energy_design());
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  const Scenario sc = load_scenario(std::string(MORPHCO_DATA_DIR) + "/scenarios/slalom.yaml");
  const TrajectorySolution sol = solve_trajectory(model, sc, opt);
  std::cerr << solution_summary(sol);
  EXPECT_TRUE(sol.feasible()) << sol.message;
}

TEST(TrajectorySolve, ThrustLimitBelowTrimIsInfeasible) {
  auto model = mt::assemble(mt::fixed_wing_design());
  const platform::TrimResult trim = platform::level_trim(model, 10.0);
  ASSERT_TRUE(trim.converged);
  model.propulsion.u_max = 0.5 * trim.thrust;
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  const TrajectorySolution sol = solve_trajectory(model, straight_scenario(), opt);
  std::cerr << solution_summary(sol);
  EXPECT_EQ(sol.status, SolverStatus::Infeasible) << sol.message;
  EXPECT_FALSE(sol.feasible());
}

TEST(TrajectorySolve, SlalomWithoutThrustIsInfeasible) {
  auto model = mt::assemble(mt::energy_design());
  model.propulsion.u_max = 0.0;
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  const Scenario sc = load_scenario(std::string(MORPHCO_DATA_DIR) + "/scenarios/slalom.yaml");
  const TrajectorySolution sol = solve_trajectory(model, sc, opt);
  std::cerr << solution_summary(sol);
  EXPECT_FALSE(sol.feasible()) << sol.message;
}

namespace {

// Short straight leg with a mid-course gate at knot `gate`.
Scenario gated_leg(int gate) {
  Scenario sc = straight_scenario();
  sc.knots = 31;
  sc.bounds.dt_max = 0.25;
  sc.checkpoints.back().position->center.x() = 50.0;
  Checkpoint mid;
  mid.name = "gate";
  mid.knot = gate;
  mid.position = PositionBall{{25.0, 0.0, 0.0}, 0.5};
  sc.checkpoints.insert(sc.checkpoints.begin(), mid);
  return sc;
}

}  // namespace

TEST(TrajectorySolve, CheckpointTimingIsFreeUpToOneStep) {
  const auto model = mt::assemble(mt::fixed_wing_design());
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  std::vector<double> times;
  for (int gate : {14, 15, 16}) {
    const Scenario sc = gated_leg(gate);
    const TrajectorySolution sol = solve_trajectory(model, sc, opt);
    ASSERT_EQ(sol.status, SolverStatus::Solved) << "gate at knot " << gate << ": " << sol.message;
    times.push_back(sol.time);
  }
  const double dt_max = gated_leg(15).bounds.dt_max;
  EXPECT_LT(std::abs(times[0] - times[1]), 2.0 * dt_max);
  EXPECT_LT(std::abs(times[2] - times[1]), 2.0 * dt_max);
}

TEST(TrajectorySolve, SolvedSlalomKeepsClearanceAndUnitQuaternions) {
  const auto model = mt::assemble(mt::energy_design());
  Scenario sc = load_scenario(std::string(MORPHCO_DATA_DIR) + "/scenarios/slalom.yaml");
  sc.knots = 40;
  sc.bounds.dt_max = 0.3;
  TrajectoryOptions opt;
  opt.solver = test_solver_options();
  const TrajectorySolution sol = solve_trajectory(model, sc, opt);
  ASSERT_EQ(sol.status, SolverStatus::Solved) << sol.message;
  EXPECT_LE(sol.max_violation, opt.solver.constraint_tolerance);
  double clearance = 1e9;
  for (size_t k = 1; k < sol.knots.size(); ++k) {
    const Knot& kn = sol.knots[k];
    EXPECT_NEAR(kn.q.norm(), 1.0, 1e-6) << "knot " << k;
    dynamics::Configuration<double> q;
    q.base_position = kn.p;
    q.base_quaternion = kn.q;
    q.joint_positions = kn.s;
    const auto poses = dynamics::body_poses(model.tree, q);
    for (int f : model.points) {
      const Eigen::Vector3d pt = dynamics::frame_pose(model.tree, poses, f).position;
      for (const Obstacle& ob : sc.obstacles) {
        double d = 0.0;
        if (ob.kind == ObstacleKind::Cylinder) d = (pt - ob.center).head<2>().norm() - ob.radius;
        if (ob.kind == ObstacleKind::Ground) d = pt.z() - ob.level;
        clearance = std::min(clearance, d);
      }
    }
  }
  // Squared-distance rows hold within the solver tolerance.
  EXPECT_GE(clearance, sc.margin - 1e-4);
  const auto& mu = sol.stats.mu_history;
  ASSERT_FALSE(mu.empty());
  for (size_t i = 1; i < mu.size(); ++i) EXPECT_LE(mu[i], mu[i - 1]);
}

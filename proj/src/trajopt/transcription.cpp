#include "morphco/trajopt/transcription.hpp"

#include "morphco/ad/dual.hpp"
#include "morphco/ad/reverse.hpp"
#include "morphco/dynamics/quaternion.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <type_traits>
#include <utility>

namespace morphco::trajopt {

using ad::ADScalar;
using Eigen::VectorXd;

std::string to_string(RowKind kind) {
  switch (kind) {
    case RowKind::Dynamics: return "dynamics";
    case RowKind::Integration: return "integration";
    case RowKind::Quaternion: return "quaternion";
    case RowKind::AeroAngle: return "aero-angle";
    case RowKind::Obstacle: return "obstacle";
    case RowKind::Checkpoint: return "checkpoint";
  }
  return "?";
}

namespace {

// A group of rows (or one objective term) depending on a few variables. The
// function must be affine, jointly, in the variables outside `curved`; the
// Hessian is built from finite differences of the reverse-mode gradient
// along the curved variables only.
struct Block {
  int first_row = -1;  // -1: objective term
  int rows = 0;
  std::vector<int> vars;
  std::vector<char> curved;
  std::function<void(const double*, double*)> eval;
  std::function<void(const ADScalar*, ADScalar*)> eval_ad;
  std::function<void(const ad::Var*, ad::Var*)> eval_rev;
  int jac_offset = 0;
  // Local index pairs of the Hessian entries, in pattern order.
  std::vector<std::pair<int, int>> hess_pairs;
  int hess_offset = 0;
};

template <class F>
Block make_block(int rows, std::vector<int> vars, std::vector<char> curved, F f) {
  Block b;
  b.rows = rows;
  b.vars = std::move(vars);
  b.curved = std::move(curved);
  b.eval = [f](const double* x, double* out) { f(x, out); };
  b.eval_ad = [f](const ADScalar* x, ADScalar* out) { f(x, out); };
  b.eval_rev = [f](const ad::Var* x, ad::Var* out) { f(x, out); };
  return b;
}

template <class P>
using ScalarOf = std::remove_cv_t<std::remove_pointer_t<P>>;

template <class S>
VecX<S> take(const S* x, int offset, int n) {
  VecX<S> v(n);
  for (int i = 0; i < n; ++i) v[i] = x[offset + i];
  return v;
}

template <class S>
Vec3<S> take3(const S* x, int offset) {
  return Vec3<S>(x[offset], x[offset + 1], x[offset + 2]);
}

template <class S>
Vec4<S> take4(const S* x, int offset) {
  return Vec4<S>(x[offset], x[offset + 1], x[offset + 2], x[offset + 3]);
}

// Dense Jacobian of a block at local point xl via chunked forward AD.
void block_jacobian(const Block& b, const std::vector<double>& xl, Eigen::MatrixXd& jac) {
  const int nv = static_cast<int>(b.vars.size());
  jac.resize(b.rows, nv);
  std::vector<ADScalar> xa(nv), out(b.rows);
  for (int c0 = 0; c0 < nv; c0 += ad::kChunk) {
    const int width = std::min(ad::kChunk, nv - c0);
    for (int i = 0; i < nv; ++i) xa[i] = ADScalar(xl[i]);
    for (int d = 0; d < width; ++d) xa[c0 + d] = ADScalar::variable(xl[c0 + d], d);
    b.eval_ad(xa.data(), out.data());
    for (int r = 0; r < b.rows; ++r)
      for (int d = 0; d < width; ++d) jac(r, c0 + d) = out[r].d[d];
  }
}

Eigen::Vector3d body_x(const Eigen::Vector4d& q) { return dynamics::quat_to_rotation<double>(q).col(0); }

double nose_pitch(const Eigen::Vector4d& q) { return std::asin(std::clamp(body_x(q).z(), -1.0, 1.0)); }

Eigen::Vector4d slerp(const Eigen::Vector4d& a, Eigen::Vector4d b, double t) {
  Eigen::Quaterniond qa(a[0], a[1], a[2], a[3]), qb(b[0], b[1], b[2], b[3]);
  const Eigen::Quaterniond r = qa.normalized().slerp(t, qb.normalized());
  return {r.w(), r.x(), r.y(), r.z()};
}

}  // namespace

struct Transcription::Impl {
  platform::DroneModel model;
  Scenario scenario;
  KnotLayout layout;
  int knots = 0;
  TranscriptionOptions options;
  std::vector<Block> rows;       // constraint blocks
  std::vector<Block> objective;  // one per knot
  VectorXd x_lower, x_upper;

  void gather(const Block& b, const VectorXd& x, std::vector<double>& xl) const {
    xl.resize(b.vars.size());
    for (size_t i = 0; i < b.vars.size(); ++i) xl[i] = x[b.vars[i]];
  }

  void add_hessian(const Block& b, const VectorXd& x, const double* weights, VectorXd& values) const {
    bool any = false;
    for (int r = 0; r < b.rows; ++r) any = any || weights[r] != 0.0;
    if (!any || b.hess_pairs.empty()) return;
    const int nv = static_cast<int>(b.vars.size());
    std::vector<double> xl;
    gather(b, x, xl);
    ad::Tape tape;
    std::vector<ad::Var> xv(nv), out(b.rows);
    // ∇(wᵀc) at xl; the inputs are the first nv tape nodes.
    auto gradient = [&](VectorXd& g) {
      tape.clear();
      for (int i = 0; i < nv; ++i) xv[i] = tape.input(xl[i]);
      b.eval_rev(xv.data(), out.data());
      const std::vector<double>& adj = tape.backward(out.data(), weights, b.rows);
      g = Eigen::Map<const VectorXd>(adj.data(), nv);
    };
    VectorXd g0, g;
    gradient(g0);
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(nv, nv);  // column i: ∂g/∂x_i
    for (int i = 0; i < nv; ++i) {
      if (!b.curved[i]) continue;
      const double h = 1.5e-8 * std::max(1.0, std::abs(xl[i]));
      const double saved = xl[i];
      xl[i] = saved + h;
      const double step = xl[i] - saved;
      gradient(g);
      xl[i] = saved;
      cols.col(i) = (g - g0) / step;
    }
    for (size_t e = 0; e < b.hess_pairs.size(); ++e) {
      const auto [i, j] = b.hess_pairs[e];
      double v;
      if (b.curved[i] && b.curved[j])
        v = 0.5 * (cols(j, i) + cols(i, j));
      else if (b.curved[i])
        v = cols(j, i);
      else
        v = cols(i, j);
      values[b.hess_offset + static_cast<int>(e)] += v;
    }
  }
};

Transcription::Transcription(const platform::DroneModel& model, const Scenario& scenario, int knots,
                             TranscriptionOptions options) {
  if (knots < 2) throw TranscriptionError("transcription needs at least 2 knots");
  scenario.validate();
  auto impl = std::make_shared<Impl>();
  impl->model = model;
  impl->scenario = scenario;
  impl->knots = knots;
  impl->options = options;
  const int nj = model.joint_count();
  const KnotLayout L{nj};
  impl->layout = L;
  layout_ = L;
  knots_ = knots;
  checkpoint_knots_ = scenario.checkpoint_knots(knots);
  const platform::DroneModel* m = &impl->model;
  const Scenario* sc = &impl->scenario;
  const int N = knots;
  const int n = N * L.size();
  auto idx = [&](int k, int local) { return k * L.size() + local; };
  auto push = [&](std::vector<int>& v, int k, int local, int len) {
    for (int i = 0; i < len; ++i) v.push_back(idx(k, local + i));
  };

  // Initial condition.
  const InitialCondition& ic = scenario.initial;
  auto joint_vector = [&](const VectorXd& v, const char* what) {
    if (v.size() == 0) return VectorXd(VectorXd::Zero(nj));
    if (v.size() != nj)
      throw TranscriptionError(std::string("initial ") + what + " has " + std::to_string(v.size()) +
                               " entries, the model has " + std::to_string(nj) + " joints");
    return v;
  };
  const VectorXd s0 = joint_vector(ic.joints, "joints");
  const VectorXd sd0 = joint_vector(ic.joint_velocities, "joint velocities");
  const VectorXd sdd0 = joint_vector(ic.joint_accelerations, "joint accelerations");
  if (std::abs(ic.quaternion.norm() - 1.0) > 1e-9)
    throw TranscriptionError("initial quaternion is not unit length");

  // Variable bounds.
  const ScenarioBounds& B = scenario.bounds;
  VectorXd lo = VectorXd::Constant(n, -kInfinity), hi = VectorXd::Constant(n, kInfinity);
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < nj; ++j) {
      const auto& servo = model.servos[j];
      lo[idx(k, L.s() + j)] = B.joint_min;
      hi[idx(k, L.s() + j)] = B.joint_max;
      lo[idx(k, L.sd() + j)] = -servo.omega_max;
      hi[idx(k, L.sd() + j)] = servo.omega_max;
      lo[idx(k, L.sdd() + j)] = -B.joint_acceleration;
      hi[idx(k, L.sdd() + j)] = B.joint_acceleration;
      lo[idx(k, L.tau() + j)] = -servo.tau_max;
      hi[idx(k, L.tau() + j)] = servo.tau_max;
      lo[idx(k, L.taud() + j)] = -B.torque_rate;
      hi[idx(k, L.taud() + j)] = B.torque_rate;
    }
    lo[idx(k, L.u())] = B.thrust_min;
    hi[idx(k, L.u())] = model.propulsion.u_max;
    lo[idx(k, L.ud())] = -B.thrust_rate;
    hi[idx(k, L.ud())] = B.thrust_rate;
    lo[idx(k, L.dt())] = 0.0;
    hi[idx(k, L.dt())] = k == N - 1 ? 0.0 : B.dt_max;
  }
  if (B.thrust_min > model.propulsion.u_max)
    throw TranscriptionError("minimum thrust exceeds the propulsion limit u_max");
  auto fix = [&](int k, int local, const VectorXd& v, const char* what) {
    for (int i = 0; i < v.size(); ++i) {
      const int g = idx(k, local + i);
      if (v[i] < lo[g] - 1e-12 || v[i] > hi[g] + 1e-12)
        throw TranscriptionError(std::string("initial ") + what + " violates its bounds");
      lo[g] = hi[g] = v[i];
    }
  };
  fix(0, L.s(), s0, "joint position");
  fix(0, L.sd(), sd0, "joint velocity");
  fix(0, L.sdd(), sdd0, "joint acceleration");
  fix(0, L.p(), ic.position, "position");
  fix(0, L.v(), ic.velocity, "velocity");
  fix(0, L.q(), ic.quaternion, "quaternion");
  fix(0, L.w(), ic.angular_velocity, "angular velocity");
  impl->x_lower = lo;
  impl->x_upper = hi;

  std::vector<double> c_lo, c_hi;
  int row = 0;
  auto add_rows = [&](Block b, RowKind kind, int k, std::string detail, const std::vector<double>& rlo,
                      const std::vector<double>& rhi) {
    b.first_row = row;
    groups_.push_back({kind, k, row, b.rows, std::move(detail)});
    c_lo.insert(c_lo.end(), rlo.begin(), rlo.end());
    c_hi.insert(c_hi.end(), rhi.begin(), rhi.end());
    row += b.rows;
    impl->rows.push_back(std::move(b));
  };
  auto zeros = [](int r) { return std::vector<double>(r, 0.0); };

  // Aero-angle limits: scenario box inside each body's model validity box.
  std::array<double, 3> a_lo{}, a_hi{}, b_lo{}, b_hi{};
  for (int i = 0; i < 3; ++i) {
    const auto& box = model.aero[i].model.box();
    a_lo[i] = std::max(B.alpha_min, deg2rad(box.alpha_min_deg));
    a_hi[i] = std::min(B.alpha_max, deg2rad(box.alpha_max_deg));
    b_lo[i] = std::max(B.beta_min, deg2rad(box.beta_min_deg));
    b_hi[i] = std::min(B.beta_max, deg2rad(box.beta_max_deg));
  }
  const Eigen::Vector3d wind = scenario.wind;
  const double dyn_scale = options.dynamics_scale;

  for (int k = 0; k < N; ++k) {
    // Dynamics residual, plus α and β of every body after the first knot.
    // Locals: s, ṡ, v, q, ω (curved) | s̈, τ, a, ω̇, u (affine).
    {
      std::vector<int> vars;
      push(vars, k, L.s(), nj);
      push(vars, k, L.sd(), nj);
      push(vars, k, L.v(), 3);
      push(vars, k, L.q(), 4);
      push(vars, k, L.w(), 3);
      const int ncurved = static_cast<int>(vars.size());
      push(vars, k, L.sdd(), nj);
      push(vars, k, L.tau(), nj);
      push(vars, k, L.a(), 3);
      push(vars, k, L.wd(), 3);
      push(vars, k, L.u(), 1);
      std::vector<char> curved(vars.size(), 0);
      std::fill(curved.begin(), curved.begin() + ncurved, 1);
      const bool angles = k > 0;
      const int ndyn = 6 + nj;
      const int rows = ndyn + (angles ? 6 : 0);
      auto f = [m, nj, wind, angles, ndyn, dyn_scale](const auto* x, auto* out) {
        using S = ScalarOf<decltype(x)>;
        int o = 0;
        dynamics::Configuration<S> q;
        q.joint_positions = take(x, o, nj);
        o += nj;
        dynamics::Velocity<S> nu;
        nu.joint_velocities = take(x, o, nj);
        o += nj;
        nu.base_linear = take3(x, o);
        o += 3;
        q.base_quaternion = take4(x, o);
        o += 4;
        nu.base_angular = take3(x, o);
        o += 3;
        VecX<S> nu_dot(6 + nj);
        const VecX<S> sdd = take(x, o, nj);
        o += nj;
        const VecX<S> tau = take(x, o, nj);
        o += nj;
        nu_dot.template head<3>() = take3(x, o);
        o += 3;
        nu_dot.template segment<3>(3) = take3(x, o);
        o += 3;
        nu_dot.tail(nj) = sdd;
        const S u = x[o];
        const dynamics::BodyPoses<S> poses = dynamics::body_poses(m->tree, q);
        VecX<S> r = dynamics::inverse_dynamics<S>(m->tree, poses, nu, nu_dot, m->gravity, m->joint_viscous);
        r.tail(nj) -= tau;
        const auto ext = platform::external_force<S>(*m, poses, nu.stacked(), u, wind);
        r -= ext.generalized;
        for (int i = 0; i < ndyn; ++i) out[i] = dyn_scale * r[i];
        if (angles)
          for (int i = 0; i < 3; ++i) {
            out[ndyn + 2 * i] = ext.states[i].alpha;
            out[ndyn + 2 * i + 1] = ext.states[i].beta;
          }
      };
      Block b = make_block(rows, vars, curved, f);
      std::vector<double> rlo = zeros(ndyn), rhi = zeros(ndyn);
      if (angles)
        for (int i = 0; i < 3; ++i) {
          rlo.push_back(a_lo[i]);
          rhi.push_back(a_hi[i]);
          rlo.push_back(b_lo[i]);
          rhi.push_back(b_hi[i]);
        }
      const int first = row;
      add_rows(std::move(b), RowKind::Dynamics, k, "", rlo, rhi);
      if (angles) {
        // Split the group so the angle rows carry their own kind.
        groups_.back().rows = ndyn;
        groups_.push_back({RowKind::AeroAngle, k, first + ndyn, 6, "alpha/beta of fuselage, left, right"});
      }
    }

    if (k + 1 < N) {
      // Backward Euler: x[k+1] − x[k] − Δt[k]·ẋ[k+1].
      auto euler = [&](int x_local, int xd_local, int len, const char* what) {
        for (int i = 0; i < len; ++i) {
          std::vector<int> vars{idx(k, L.dt()), idx(k, x_local + i), idx(k + 1, x_local + i),
                                idx(k + 1, xd_local + i)};
          auto f = [](const auto* x, auto* out) { out[0] = x[2] - x[1] - x[0] * x[3]; };
          add_rows(make_block(1, vars, {1, 0, 0, 0}, f), RowKind::Integration, k,
                   std::string(what) + "[" + std::to_string(i) + "]", {0.0}, {0.0});
        }
      };
      euler(L.s(), L.sd(), nj, "s");
      euler(L.sd(), L.sdd(), nj, "sd");
      euler(L.tau(), L.taud(), nj, "tau");
      euler(L.u(), L.ud(), 1, "u");
      euler(L.p(), L.v(), 3, "p");
      euler(L.v(), L.a(), 3, "v");
      euler(L.w(), L.wd(), 3, "w");

      // q[k+1] − Exp(ω[k+1] Δt[k]) ⊗ q[k]
      std::vector<int> vars;
      push(vars, k + 1, L.w(), 3);
      push(vars, k, L.dt(), 1);
      push(vars, k, L.q(), 4);
      push(vars, k + 1, L.q(), 4);
      auto f = [](const auto* x, auto* out) {
        using S = ScalarOf<decltype(x)>;
        const Vec3<S> phi = take3(x, 0) * x[3];
        const Vec4<S> next = dynamics::quat_multiply<S>(dynamics::quat_exp<S>(phi), take4(x, 4));
        for (int i = 0; i < 4; ++i) out[i] = x[8 + i] - next[i];
      };
      add_rows(make_block(4, vars, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, f), RowKind::Quaternion, k, "",
               zeros(4), zeros(4));
    }

    // Clearance of the drone points from every obstacle.
    if (k > 0 && !scenario.obstacles.empty()) {
      std::vector<int> vars;
      push(vars, k, L.p(), 3);
      push(vars, k, L.q(), 4);
      push(vars, k, L.s(), nj);
      const int npts = static_cast<int>(model.points.size());
      const int rows = npts * static_cast<int>(scenario.obstacles.size());
      auto f = [m, sc, nj, npts](const auto* x, auto* out) {
        using S = ScalarOf<decltype(x)>;
        dynamics::Configuration<S> q;
        q.base_position = take3(x, 0);
        q.base_quaternion = take4(x, 3);
        q.joint_positions = take(x, 7, nj);
        const dynamics::BodyPoses<S> poses = dynamics::body_poses(m->tree, q);
        std::vector<Vec3<S>> pts;
        for (int frame : m->points) pts.push_back(dynamics::frame_pose(m->tree, poses, frame).position);
        int r = 0;
        for (const Obstacle& ob : sc->obstacles) {
          const double clear = ob.radius + sc->margin;
          for (int i = 0; i < npts; ++i, ++r) {
            const Vec3<S>& pt = pts[i];
            switch (ob.kind) {
              case ObstacleKind::Cylinder: {
                const S dx = pt.x() - ob.center.x(), dy = pt.y() - ob.center.y();
                out[r] = dx * dx + dy * dy - clear * clear;
                break;
              }
              case ObstacleKind::Sphere:
                out[r] = (pt - ob.center.cast<S>()).squaredNorm() - clear * clear;
                break;
              case ObstacleKind::Ground:
                out[r] = pt.z() - (ob.level + sc->margin);
                break;
            }
          }
        }
      };
      add_rows(make_block(rows, vars, std::vector<char>(vars.size(), 1), f), RowKind::Obstacle, k, "",
               zeros(rows), std::vector<double>(rows, kInfinity));
    }
  }

  // Checkpoints.
  for (size_t c = 0; c < scenario.checkpoints.size(); ++c) {
    const Checkpoint& cp = scenario.checkpoints[c];
    const int k = checkpoint_knots_[c];
    const std::string name = cp.name.empty() ? "checkpoint " + std::to_string(c) : cp.name;
    if (cp.position) {
      const PositionBall ball = *cp.position;
      std::vector<int> vars;
      push(vars, k, L.p(), 3);
      auto f = [ball](const auto* x, auto* out) {
        using S = ScalarOf<decltype(x)>;
        out[0] = ball.radius * ball.radius - (take3(x, 0) - ball.center.cast<S>()).squaredNorm();
      };
      add_rows(make_block(1, vars, {1, 1, 1}, f), RowKind::Checkpoint, k, name + " position", {0.0},
               {kInfinity});
    }
    auto box_rows = [&](int local, const Eigen::Vector3d& center, const Eigen::Vector3d& tol, const char* what) {
      std::vector<int> vars;
      push(vars, k, local, 3);
      auto f = [](const auto* x, auto* out) {
        for (int i = 0; i < 3; ++i) out[i] = x[i];
      };
      std::vector<double> rlo, rhi;
      for (int i = 0; i < 3; ++i) {
        rlo.push_back(center[i] - tol[i]);
        rhi.push_back(center[i] + tol[i]);
      }
      add_rows(make_block(3, vars, {0, 0, 0}, f), RowKind::Checkpoint, k, name + " " + what, rlo, rhi);
    };
    if (cp.velocity) box_rows(L.v(), cp.velocity->center, cp.velocity->tolerance, "velocity");
    if (cp.angular_velocity)
      box_rows(L.w(), cp.angular_velocity->center, cp.angular_velocity->tolerance, "angular velocity");
    if (cp.orientation) {
      const Eigen::Vector3d h = cp.orientation->heading.normalized();
      std::vector<int> vars;
      push(vars, k, L.q(), 4);
      auto f = [h](const auto* x, auto* out) {
        using S = ScalarOf<decltype(x)>;
        const Vec3<S> xb = dynamics::quat_to_rotation<S>(take4(x, 0)).col(0);
        out[0] = xb.dot(h.cast<S>());
      };
      add_rows(make_block(1, vars, {1, 1, 1, 1}, f), RowKind::Checkpoint, k, name + " heading",
               {std::cos(cp.orientation->cone)}, {kInfinity});
    }
  }

  // Objective: Σ_k Δt[k] (ψ + W_p(u) + Σ_j W_s(ṡ_j, τ_j)).
  for (int k = 0; k < N; ++k) {
    std::vector<int> vars;
    push(vars, k, L.dt(), 1);
    push(vars, k, L.u(), 1);
    push(vars, k, L.sd(), nj);
    push(vars, k, L.tau(), nj);
    auto f = [m, nj](const auto* x, auto* out) {
      using S = ScalarOf<decltype(x)>;
      S power = m->controller_weight() + actuation::propulsion_power<S>(m->propulsion, x[1]);
      for (int j = 0; j < nj; ++j) power += actuation::servo_power<S>(m->servos[j], x[2 + j], x[2 + nj + j]);
      out[0] = x[0] * power;
    };
    impl->objective.push_back(make_block(1, vars, std::vector<char>(vars.size(), 1), f));
  }

  // Sparsity patterns.
  NlpProblem& P = problem_;
  P.n = n;
  P.m = row;
  P.x_lower = lo;
  P.x_upper = hi;
  P.c_lower = Eigen::Map<const VectorXd>(c_lo.data(), row);
  P.c_upper = Eigen::Map<const VectorXd>(c_hi.data(), row);
  auto hess_pattern = [&](Block& b) {
    b.hess_offset = static_cast<int>(P.hess_rows.size());
    const int nv = static_cast<int>(b.vars.size());
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j <= i; ++j) {
        if (!b.curved[i] && !b.curved[j]) continue;
        b.hess_pairs.emplace_back(i, j);
        P.hess_rows.push_back(std::max(b.vars[i], b.vars[j]));
        P.hess_cols.push_back(std::min(b.vars[i], b.vars[j]));
      }
  };
  for (Block& b : impl->rows) {
    b.jac_offset = static_cast<int>(P.jac_rows.size());
    for (int r = 0; r < b.rows; ++r)
      for (int v : b.vars) {
        P.jac_rows.push_back(b.first_row + r);
        P.jac_cols.push_back(v);
      }
    hess_pattern(b);
  }
  for (Block& b : impl->objective) hess_pattern(b);

  const Impl* I = impl.get();
  P.objective = [I](const VectorXd& x) {
    double f = 0.0;
    std::vector<double> xl;
    for (const Block& b : I->objective) {
      I->gather(b, x, xl);
      double v;
      b.eval(xl.data(), &v);
      f += v;
    }
    return f;
  };
  P.gradient = [I](const VectorXd& x, VectorXd& g) {
    g = VectorXd::Zero(x.size());
    std::vector<double> xl;
    Eigen::MatrixXd jac;
    for (const Block& b : I->objective) {
      I->gather(b, x, xl);
      block_jacobian(b, xl, jac);
      for (size_t i = 0; i < b.vars.size(); ++i) g[b.vars[i]] += jac(0, static_cast<int>(i));
    }
  };
  P.constraints = [I](const VectorXd& x, VectorXd& c) {
    std::vector<double> xl;
    for (const Block& b : I->rows) {
      I->gather(b, x, xl);
      b.eval(xl.data(), c.data() + b.first_row);
    }
  };
  P.jacobian = [I](const VectorXd& x, VectorXd& values) {
    std::vector<double> xl;
    Eigen::MatrixXd jac;
    for (const Block& b : I->rows) {
      I->gather(b, x, xl);
      block_jacobian(b, xl, jac);
      const int nv = static_cast<int>(b.vars.size());
      for (int r = 0; r < b.rows; ++r)
        for (int j = 0; j < nv; ++j) values[b.jac_offset + r * nv + j] = jac(r, j);
    }
  };
  P.hessian = [I](const VectorXd& x, double sigma, const VectorXd& lambda, VectorXd& values) {
    values.setZero();
    for (const Block& b : I->rows) I->add_hessian(b, x, lambda.data() + b.first_row, values);
    for (const Block& b : I->objective) I->add_hessian(b, x, &sigma, values);
  };
  impl_ = impl;
  P.owner = impl;
  // Labels resolve through a copy of the group table owned by the callback.
  P.row_label = [table = groups_](int r) {
    for (const RowGroup& g : table)
      if (r >= g.first_row && r < g.first_row + g.rows) {
        std::string s = to_string(g.kind) + " at knot " + std::to_string(g.knot) + ", row " +
                        std::to_string(r - g.first_row);
        if (!g.detail.empty()) s += " (" + g.detail + ")";
        return s;
      }
    return "row " + std::to_string(r);
  };
  P.validate();

  // The start must already clear the obstacles.
  {
    dynamics::Configuration<double> q0;
    q0.base_position = ic.position;
    q0.base_quaternion = ic.quaternion;
    q0.joint_positions = s0;
    const auto poses = dynamics::body_poses(model.tree, q0);
    for (const Obstacle& ob : scenario.obstacles)
      for (int frame : model.points) {
        const Eigen::Vector3d pt = dynamics::frame_pose(model.tree, poses, frame).position;
        const double clear = ob.radius + scenario.margin;
        double d = 0.0;
        switch (ob.kind) {
          case ObstacleKind::Cylinder: d = (pt - ob.center).head<2>().squaredNorm() - clear * clear; break;
          case ObstacleKind::Sphere: d = (pt - ob.center).squaredNorm() - clear * clear; break;
          case ObstacleKind::Ground: d = pt.z() - ob.level - scenario.margin; break;
        }
        if (d < 0.0) throw TranscriptionError("the initial position is inside an obstacle");
      }
  }
}

int Transcription::row_count(RowKind kind) const {
  int n = 0;
  for (const RowGroup& g : groups_)
    if (g.kind == kind) n += g.rows;
  return n;
}

const RowGroup* Transcription::group_of(int row) const {
  for (const RowGroup& g : groups_)
    if (row >= g.first_row && row < g.first_row + g.rows) return &g;
  return nullptr;
}

std::vector<Knot> Transcription::decode(const VectorXd& x) const {
  if (x.size() != problem_.n) throw Error("decode: vector has wrong size");
  const KnotLayout& L = layout_;
  std::vector<Knot> out(knots_);
  for (int k = 0; k < knots_; ++k) {
    const auto seg = [&](int local, int len) { return VectorXd(x.segment(index(k, local), len)); };
    Knot& kn = out[k];
    kn.s = seg(L.s(), L.nj);
    kn.sd = seg(L.sd(), L.nj);
    kn.sdd = seg(L.sdd(), L.nj);
    kn.tau = seg(L.tau(), L.nj);
    kn.taud = seg(L.taud(), L.nj);
    kn.p = seg(L.p(), 3);
    kn.v = seg(L.v(), 3);
    kn.a = seg(L.a(), 3);
    kn.q = seg(L.q(), 4);
    kn.w = seg(L.w(), 3);
    kn.wd = seg(L.wd(), 3);
    kn.u = x[index(k, L.u())];
    kn.ud = x[index(k, L.ud())];
    kn.dt = x[index(k, L.dt())];
  }
  return out;
}

VectorXd Transcription::encode(const std::vector<Knot>& knots) const {
  if (static_cast<int>(knots.size()) != knots_) throw Error("encode: wrong knot count");
  const KnotLayout& L = layout_;
  VectorXd x(problem_.n);
  for (int k = 0; k < knots_; ++k) {
    const Knot& kn = knots[k];
    const auto put = [&](int local, const VectorXd& v, int len) {
      if (v.size() != len) throw Error("encode: knot field has wrong size");
      x.segment(index(k, local), len) = v;
    };
    put(L.s(), kn.s, L.nj);
    put(L.sd(), kn.sd, L.nj);
    put(L.sdd(), kn.sdd, L.nj);
    put(L.tau(), kn.tau, L.nj);
    put(L.taud(), kn.taud, L.nj);
    put(L.p(), kn.p, 3);
    put(L.v(), kn.v, 3);
    put(L.a(), kn.a, 3);
    put(L.q(), kn.q, 4);
    put(L.w(), kn.w, 3);
    put(L.wd(), kn.wd, 3);
    x[index(k, L.u())] = kn.u;
    x[index(k, L.ud())] = kn.ud;
    x[index(k, L.dt())] = kn.dt;
  }
  return x;
}

VectorXd Transcription::initial_guess() const {
  const Impl& I = *impl_;
  const Scenario& sc = I.scenario;
  const InitialCondition& ic = sc.initial;
  const int N = knots_, nj = layout_.nj;
  const double speed = ic.velocity.norm();

  // Position waypoints (knot, point) and attitude waypoints (knot, quaternion).
  std::vector<std::pair<int, Eigen::Vector3d>> wp{{0, ic.position}};
  std::vector<std::pair<int, Eigen::Vector4d>> wq{{0, ic.quaternion}};
  const double pitch0 = nose_pitch(ic.quaternion);
  for (size_t c = 0; c < sc.checkpoints.size(); ++c) {
    const Checkpoint& cp = sc.checkpoints[c];
    const int k = checkpoint_knots_[c];
    if (cp.position) wp.emplace_back(k, cp.position->center);
    if (cp.orientation) {
      const Eigen::Vector3d h = cp.orientation->heading;
      wq.emplace_back(k, platform::attitude_quaternion(pitch0, std::atan2(h.y(), h.x())));
    }
  }
  double length = 0.0;
  for (size_t i = 1; i < wp.size(); ++i) length += (wp[i].second - wp[i - 1].second).norm();
  const int k_last = wp.back().first;
  double dt = 0.5 * sc.bounds.dt_max;
  if (length > 0.0 && speed > 1e-3 && k_last > 0) dt = std::min(sc.bounds.dt_max, length / (speed * k_last));

  double u = 0.5 * I.model.propulsion.u_max;
  try {
    const aero::QuietExtrapolation quiet;
    const platform::TrimResult trim = platform::level_trim(I.model, std::max(speed, 1.0), sc.wind);
    if (trim.converged && std::isfinite(trim.thrust)) u = trim.thrust;
  } catch (const Error&) {
  }
  u = std::clamp(u, sc.bounds.thrust_min, I.model.propulsion.u_max);

  std::vector<Knot> knots(N);
  for (int k = 0; k < N; ++k) {
    Knot& kn = knots[k];
    kn.s = kn.sd = kn.sdd = kn.tau = kn.taud = VectorXd::Zero(nj);
    kn.a = kn.w = kn.wd = Eigen::Vector3d::Zero();
    kn.u = u;
    kn.ud = 0.0;
    kn.dt = k == N - 1 ? 0.0 : dt;
    // Position and direction of travel.
    size_t seg = 1;
    while (seg < wp.size() && wp[seg].first < k) ++seg;
    Eigen::Vector3d dir = speed > 0.0 ? Eigen::Vector3d(ic.velocity / speed) : Eigen::Vector3d::Zero();
    if (seg < wp.size()) {
      const auto& [k0, p0] = wp[seg - 1];
      const auto& [k1, p1] = wp[seg];
      const double t = k1 > k0 ? double(k - k0) / double(k1 - k0) : 1.0;
      kn.p = p0 + t * (p1 - p0);
      if ((p1 - p0).norm() > 1e-12) dir = (p1 - p0).normalized();
    } else {
      if (wp.size() > 1 && (wp.back().second - wp[wp.size() - 2].second).norm() > 1e-12)
        dir = (wp.back().second - wp[wp.size() - 2].second).normalized();
      kn.p = wp.back().second + dir * speed * dt * (k - wp.back().first);
    }
    kn.v = speed * dir;
    // Attitude.
    size_t sq = 1;
    while (sq < wq.size() && wq[sq].first < k) ++sq;
    if (sq < wq.size()) {
      const auto& [k0, q0] = wq[sq - 1];
      const auto& [k1, q1] = wq[sq];
      kn.q = slerp(q0, q1, k1 > k0 ? double(k - k0) / double(k1 - k0) : 1.0);
    } else {
      kn.q = wq.back().second;
    }
    kn.q.normalize();
  }
  // Knot 0 is the initial condition.
  Knot& k0 = knots[0];
  k0.p = ic.position;
  k0.v = ic.velocity;
  k0.q = ic.quaternion;
  k0.w = ic.angular_velocity;
  if (ic.joints.size()) k0.s = ic.joints;
  if (ic.joint_velocities.size()) k0.sd = ic.joint_velocities;
  if (ic.joint_accelerations.size()) k0.sdd = ic.joint_accelerations;
  VectorXd x = encode(knots);
  const VectorXd& lo = problem_.x_lower;
  const VectorXd& hi = problem_.x_upper;
  for (int i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

Transcription transcribe(const platform::DroneModel& model, const Scenario& scenario, int knots) {
  return Transcription(model, scenario, knots);
}

VectorXd initial_guess(const platform::DroneModel& model, const Scenario& scenario, int knots) {
  return Transcription(model, scenario, knots).initial_guess();
}

Metrics evaluate_metrics(const std::vector<Knot>& knots, const platform::DroneModel& model) {
  Metrics out;
  const int nj = model.joint_count();
  for (const Knot& k : knots) {
    double power = actuation::propulsion_power<double>(model.propulsion, k.u);
    for (int j = 0; j < nj; ++j) power += actuation::servo_power<double>(model.servos[j], k.sd[j], k.tau[j]);
    out.energy += power * k.dt;
    out.time += k.dt;
  }
  return out;
}

}  // namespace morphco::trajopt

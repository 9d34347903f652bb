#include "morphco/trajopt/scenario.hpp"

#include "morphco/common/yaml_util.hpp"
#include "morphco/platform/drone.hpp"

#include <algorithm>
#include <cmath>

namespace morphco::trajopt {

namespace {

constexpr const char* kSchema = "morphco.scenario/1";

Eigen::Vector3d vec3(const yaml::Reader& r, const std::string& key, double scale = 1.0) {
  const std::vector<double> v = r.get_doubles(key);
  if (v.size() != 3) r.fail(key, "must have three entries");
  return Eigen::Vector3d(v[0], v[1], v[2]) * scale;
}

// Scalar or three-entry list.
Eigen::Vector3d tolerance3(const yaml::Reader& r, const std::string& key, double scale = 1.0) {
  if (r.node()[key].IsScalar()) return Eigen::Vector3d::Constant(r.get<double>(key) * scale);
  return vec3(r, key, scale);
}

Eigen::VectorXd vecx(const yaml::Reader& r, const std::string& key, double scale) {
  if (!r.has(key)) return {};
  const std::vector<double> v = r.get_doubles(key);
  Eigen::VectorXd out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i] * scale;
  return out;
}

Eigen::Vector3d heading_vector(double yaw, double pitch) {
  return {std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
}

void emit_vec(YAML::Emitter& e, const Eigen::VectorXd& v, double scale = 1.0) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < v.size(); ++i) e << yaml::exact(v[i] * scale);
  e << YAML::EndSeq;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Obstacle Obstacle::cylinder(double x, double y, double radius) {
  Obstacle o;
  o.kind = ObstacleKind::Cylinder;
  o.center = Eigen::Vector3d(x, y, 0.0);
  o.radius = radius;
  return o;
}

Obstacle Obstacle::sphere(const Eigen::Vector3d& center, double radius) {
  Obstacle o;
  o.kind = ObstacleKind::Sphere;
  o.center = center;
  o.radius = radius;
  return o;
}

Obstacle Obstacle::ground(double level) {
  Obstacle o;
  o.kind = ObstacleKind::Ground;
  o.level = level;
  return o;
}

int Checkpoint::knot_index(int knots) const {
  if (knot) return *knot;
  if (fraction) return static_cast<int>(std::lround(*fraction * (knots - 1)));
  return knots - 1;
}

std::vector<int> Scenario::checkpoint_knots(int n) const {
  std::vector<int> out;
  for (const Checkpoint& c : checkpoints) {
    const int k = c.knot_index(n);
    const std::string label = c.name.empty() ? "checkpoint" : "checkpoint '" + c.name + "'";
    if (k < 1 || k > n - 1)
      throw TranscriptionError(label + " at knot " + std::to_string(k) + " is outside the horizon of " +
                               std::to_string(n) + " knots");
    if (!out.empty() && k <= out.back())
      throw TranscriptionError(label + " at knot " + std::to_string(k) +
                               " does not come after the previous checkpoint");
    out.push_back(k);
  }
  return out;
}

void Scenario::validate() const {
  if (knots < 2) throw SchemaError("scenario needs at least 2 knots");
  if (!wind.allFinite()) throw SchemaError("wind must be finite");
  const InitialCondition& ic = initial;
  if (!ic.position.allFinite() || !ic.velocity.allFinite() || !ic.angular_velocity.allFinite() ||
      !finite(ic.joints) || !finite(ic.joint_velocities) || !finite(ic.joint_accelerations))
    throw SchemaError("initial condition must be finite");
  if (std::abs(ic.quaternion.norm() - 1.0) > 1e-9) throw SchemaError("initial quaternion must be unit");
  for (const Obstacle& o : obstacles) {
    if (o.kind != ObstacleKind::Ground && !(o.radius > 0.0))
      throw SchemaError("obstacle radius must be positive");
    if (!o.center.allFinite() || !std::isfinite(o.level)) throw SchemaError("obstacle must be finite");
  }
  const ScenarioBounds& b = bounds;
  if (!(b.alpha_min < b.alpha_max) || !(b.beta_min < b.beta_max))
    throw SchemaError("aero angle bounds must satisfy min < max");
  if (!(b.joint_min <= 0.0 && b.joint_max >= 0.0 && b.joint_min < b.joint_max))
    throw SchemaError("joint bounds must bracket zero");
  if (!(b.joint_acceleration > 0.0) || !(b.torque_rate > 0.0) || !(b.thrust_rate > 0.0))
    throw SchemaError("rate bounds must be positive");
  if (!(b.thrust_min >= 0.0)) throw SchemaError("thrust_min must be non-negative");
  if (!(b.dt_max > 0.0)) throw SchemaError("dt_max must be positive");
  if (!(margin >= 0.0)) throw SchemaError("margin must be non-negative");
  for (const Checkpoint& c : checkpoints) {
    if (c.fraction && c.knot) throw SchemaError("checkpoint has both a fraction and a knot");
    if (c.fraction && !(*c.fraction > 0.0 && *c.fraction <= 1.0))
      throw SchemaError("checkpoint fraction must lie in (0, 1]");
    if (c.position && !(c.position->radius > 0.0))
      throw SchemaError("checkpoint radius must be positive");
    if (c.velocity && !(c.velocity->tolerance.minCoeff() >= 0.0))
      throw SchemaError("velocity tolerance must be non-negative");
    if (c.orientation && !(c.orientation->cone > 0.0 && c.orientation->cone < kPi))
      throw SchemaError("orientation cone must lie in (0, 180) degrees");
    if (c.orientation && std::abs(c.orientation->heading.norm() - 1.0) > 1e-9)
      throw SchemaError("heading must be a unit vector");
  }
  try {
    checkpoint_knots(knots);
  } catch (const TranscriptionError& e) {
    throw SchemaError(e.what());
  }
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema(kSchema);
  r.allow_keys({"schema", "name", "knots", "wind", "margin", "initial", "bounds", "obstacles",
                "checkpoints"});
  const double deg = deg2rad(1.0);
  Scenario s;
  s.name = r.get_or<std::string>("name", "");
  s.knots = r.get_or("knots", s.knots);
  if (r.has("wind")) s.wind = vec3(r, "wind");
  s.margin = r.get_or("margin", s.margin);

  const yaml::Reader ic = r.child("initial");
  ic.allow_keys({"position", "attitude_deg", "quaternion", "velocity", "angular_velocity_deg",
                 "joints_deg", "joint_velocities_deg", "joint_accelerations_deg"});
  InitialCondition& init = s.initial;
  if (ic.has("position")) init.position = vec3(ic, "position");
  if (ic.has("attitude_deg") && ic.has("quaternion"))
    ic.fail("give either 'attitude_deg' or 'quaternion'");
  if (ic.has("attitude_deg")) {
    const yaml::Reader a = ic.child("attitude_deg");
    a.allow_keys({"pitch", "yaw", "roll"});
    init.quaternion = platform::attitude_quaternion(a.get_or("pitch", 0.0) * deg,
                                                    a.get_or("yaw", 0.0) * deg,
                                                    a.get_or("roll", 0.0) * deg);
  }
  if (ic.has("quaternion")) {
    const std::vector<double> q = ic.get_doubles("quaternion");
    if (q.size() != 4) ic.fail("quaternion", "must have four entries (w, x, y, z)");
    init.quaternion = Eigen::Vector4d(q[0], q[1], q[2], q[3]);
    if (std::abs(init.quaternion.norm() - 1.0) > 1e-9) ic.fail("quaternion", "must be unit");
  }
  if (ic.has("velocity")) init.velocity = vec3(ic, "velocity");
  if (ic.has("angular_velocity_deg")) init.angular_velocity = vec3(ic, "angular_velocity_deg", deg);
  init.joints = vecx(ic, "joints_deg", deg);
  init.joint_velocities = vecx(ic, "joint_velocities_deg", deg);
  init.joint_accelerations = vecx(ic, "joint_accelerations_deg", deg);

  if (r.has("bounds")) {
    const yaml::Reader b = r.child("bounds");
    b.allow_keys({"alpha_deg", "beta_deg", "joint_deg", "joint_acceleration_deg", "torque_rate",
                  "thrust_rate", "thrust_min", "dt_max"});
    ScenarioBounds& sb = s.bounds;
    if (b.has("alpha_deg")) {
      const auto a = b.get_range("alpha_deg");
      sb.alpha_min = a[0] * deg;
      sb.alpha_max = a[1] * deg;
    }
    if (b.has("beta_deg")) {
      const auto a = b.get_range("beta_deg");
      sb.beta_min = a[0] * deg;
      sb.beta_max = a[1] * deg;
    }
    if (b.has("joint_deg")) {
      const auto a = b.get_range("joint_deg");
      sb.joint_min = a[0] * deg;
      sb.joint_max = a[1] * deg;
    }
    sb.joint_acceleration = b.get_or("joint_acceleration_deg", rad2deg(sb.joint_acceleration)) * deg;
    sb.torque_rate = b.get_or("torque_rate", sb.torque_rate);
    sb.thrust_rate = b.get_or("thrust_rate", sb.thrust_rate);
    sb.thrust_min = b.get_or("thrust_min", sb.thrust_min);
    sb.dt_max = b.get_or("dt_max", sb.dt_max);
  }

  if (r.has("obstacles")) {
    for (const yaml::Reader& o : r.children("obstacles")) {
      o.allow_keys({"type", "center", "radius", "level"});
      const std::string type = o.get<std::string>("type");
      if (type == "cylinder") {
        const std::vector<double> c = o.get_doubles("center");
        if (c.size() != 2) o.fail("center", "of a cylinder must be [x, y]");
        s.obstacles.push_back(Obstacle::cylinder(c[0], c[1], o.get<double>("radius")));
      } else if (type == "sphere") {
        s.obstacles.push_back(Obstacle::sphere(vec3(o, "center"), o.get<double>("radius")));
      } else if (type == "ground") {
        s.obstacles.push_back(Obstacle::ground(o.get<double>("level")));
      } else {
        o.fail("type", "must be cylinder, sphere or ground");
      }
      if (s.obstacles.back().kind != ObstacleKind::Ground && !(s.obstacles.back().radius > 0.0))
        o.fail("radius", "must be positive");
    }
  }

  if (r.has("checkpoints")) {
    for (const yaml::Reader& c : r.children("checkpoints")) {
      c.allow_keys({"name", "fraction", "knot", "position", "velocity", "heading",
                    "angular_velocity_deg"});
      Checkpoint cp;
      cp.name = c.get_or<std::string>("name", "");
      if (c.has("fraction")) cp.fraction = c.get<double>("fraction");
      if (c.has("knot")) cp.knot = c.get<int>("knot");
      if (c.has("position")) {
        const yaml::Reader p = c.child("position");
        p.allow_keys({"center", "radius"});
        PositionBall ball;
        ball.center = vec3(p, "center");
        ball.radius = p.get_or("radius", ball.radius);
        cp.position = ball;
      }
      if (c.has("velocity")) {
        const yaml::Reader v = c.child("velocity");
        v.allow_keys({"center", "tolerance"});
        VelocityBox box;
        box.center = vec3(v, "center");
        if (v.has("tolerance")) box.tolerance = tolerance3(v, "tolerance");
        cp.velocity = box;
      }
      if (c.has("heading")) {
        const yaml::Reader h = c.child("heading");
        h.allow_keys({"yaw_deg", "pitch_deg", "cone_deg"});
        OrientationCone cone;
        cone.heading = heading_vector(h.get_or("yaw_deg", 0.0) * deg, h.get_or("pitch_deg", 0.0) * deg);
        cone.cone = h.get_or("cone_deg", rad2deg(cone.cone)) * deg;
        cp.orientation = cone;
      }
      if (c.has("angular_velocity_deg")) {
        const yaml::Reader w = c.child("angular_velocity_deg");
        w.allow_keys({"center", "tolerance"});
        AngularVelocityBox box;
        box.center = vec3(w, "center", deg);
        if (w.has("tolerance")) box.tolerance = tolerance3(w, "tolerance", deg);
        cp.angular_velocity = box;
      }
      s.checkpoints.push_back(cp);
    }
  }

  try {
    s.validate();
  } catch (const SchemaError& e) {
    r.fail(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(yaml::read_file(path), path); }

std::string scenario_to_yaml(const Scenario& s) {
  using yaml::exact;
  const double deg = rad2deg(1.0);
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "schema" << YAML::Value << kSchema;
  if (!s.name.empty()) e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "knots" << YAML::Value << s.knots;
  e << YAML::Key << "wind" << YAML::Value;
  emit_vec(e, s.wind);
  e << YAML::Key << "margin" << YAML::Value << exact(s.margin);

  const InitialCondition& ic = s.initial;
  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "position" << YAML::Value;
  emit_vec(e, ic.position);
  e << YAML::Key << "quaternion" << YAML::Value;
  emit_vec(e, ic.quaternion);
  e << YAML::Key << "velocity" << YAML::Value;
  emit_vec(e, ic.velocity);
  e << YAML::Key << "angular_velocity_deg" << YAML::Value;
  emit_vec(e, ic.angular_velocity, deg);
  if (ic.joints.size()) {
    e << YAML::Key << "joints_deg" << YAML::Value;
    emit_vec(e, ic.joints, deg);
  }
  if (ic.joint_velocities.size()) {
    e << YAML::Key << "joint_velocities_deg" << YAML::Value;
    emit_vec(e, ic.joint_velocities, deg);
  }
  if (ic.joint_accelerations.size()) {
    e << YAML::Key << "joint_accelerations_deg" << YAML::Value;
    emit_vec(e, ic.joint_accelerations, deg);
  }
  e << YAML::EndMap;

  const ScenarioBounds& b = s.bounds;
  e << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "alpha_deg" << YAML::Value;
  emit_vec(e, Eigen::Vector2d(b.alpha_min, b.alpha_max), deg);
  e << YAML::Key << "beta_deg" << YAML::Value;
  emit_vec(e, Eigen::Vector2d(b.beta_min, b.beta_max), deg);
  e << YAML::Key << "joint_deg" << YAML::Value;
  emit_vec(e, Eigen::Vector2d(b.joint_min, b.joint_max), deg);
  e << YAML::Key << "joint_acceleration_deg" << YAML::Value << exact(b.joint_acceleration * deg);
  e << YAML::Key << "torque_rate" << YAML::Value << exact(b.torque_rate);
  e << YAML::Key << "thrust_rate" << YAML::Value << exact(b.thrust_rate);
  e << YAML::Key << "thrust_min" << YAML::Value << exact(b.thrust_min);
  e << YAML::Key << "dt_max" << YAML::Value << exact(b.dt_max);
  e << YAML::EndMap;

  if (!s.obstacles.empty()) {
    e << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
    for (const Obstacle& o : s.obstacles) {
      e << YAML::Flow << YAML::BeginMap;
      switch (o.kind) {
        case ObstacleKind::Cylinder:
          e << YAML::Key << "type" << YAML::Value << "cylinder";
          e << YAML::Key << "center" << YAML::Value;
          emit_vec(e, o.center.head<2>());
          e << YAML::Key << "radius" << YAML::Value << exact(o.radius);
          break;
        case ObstacleKind::Sphere:
          e << YAML::Key << "type" << YAML::Value << "sphere";
          e << YAML::Key << "center" << YAML::Value;
          emit_vec(e, o.center);
          e << YAML::Key << "radius" << YAML::Value << exact(o.radius);
          break;
        case ObstacleKind::Ground:
          e << YAML::Key << "type" << YAML::Value << "ground";
          e << YAML::Key << "level" << YAML::Value << exact(o.level);
          break;
      }
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }

  if (!s.checkpoints.empty()) {
    e << YAML::Key << "checkpoints" << YAML::Value << YAML::BeginSeq;
    for (const Checkpoint& c : s.checkpoints) {
      e << YAML::BeginMap;
      if (!c.name.empty()) e << YAML::Key << "name" << YAML::Value << c.name;
      if (c.fraction) e << YAML::Key << "fraction" << YAML::Value << exact(*c.fraction);
      if (c.knot) e << YAML::Key << "knot" << YAML::Value << *c.knot;
      if (c.position) {
        e << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "center" << YAML::Value;
        emit_vec(e, c.position->center);
        e << YAML::Key << "radius" << YAML::Value << exact(c.position->radius) << YAML::EndMap;
      }
      if (c.velocity) {
        e << YAML::Key << "velocity" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "center" << YAML::Value;
        emit_vec(e, c.velocity->center);
        e << YAML::Key << "tolerance" << YAML::Value;
        emit_vec(e, c.velocity->tolerance);
        e << YAML::EndMap;
      }
      if (c.orientation) {
        const Eigen::Vector3d& h = c.orientation->heading;
        e << YAML::Key << "heading" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "yaw_deg" << YAML::Value << exact(std::atan2(h.y(), h.x()) * deg);
        e << YAML::Key << "pitch_deg" << YAML::Value
          << exact(std::asin(std::clamp(h.z(), -1.0, 1.0)) * deg);
        e << YAML::Key << "cone_deg" << YAML::Value << exact(c.orientation->cone * deg);
        e << YAML::EndMap;
      }
      if (c.angular_velocity) {
        e << YAML::Key << "angular_velocity_deg" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "center" << YAML::Value;
        emit_vec(e, c.angular_velocity->center, deg);
        e << YAML::Key << "tolerance" << YAML::Value;
        emit_vec(e, c.angular_velocity->tolerance, deg);
        e << YAML::EndMap;
      }
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace morphco::trajopt

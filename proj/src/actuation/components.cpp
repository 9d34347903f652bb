#include "morphco/actuation/components.hpp"

#include "morphco/common/yaml_util.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <set>

namespace morphco::actuation {

namespace {

constexpr const char* kCatalogSchema = "morphco.component/1";

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

}  // namespace

void ServoModel::validate() const {
  if (id.empty()) throw SchemaError("servo without id");
  if (!(positive_finite(resistance) && positive_finite(k_v) && positive_finite(viscous) &&
        positive_finite(tau_max) && positive_finite(omega_max) && positive_finite(mass)))
    throw SchemaError("servo '" + id + "': all parameters must be positive and finite");
}

void PropulsionModel::validate() const {
  if (id.empty()) throw SchemaError("propulsion unit without id");
  if (!(xi2 >= 0.0 && positive_finite(u_max) && positive_finite(mass) && std::isfinite(xi0) &&
        std::isfinite(xi1) && std::isfinite(k_u)))
    throw SchemaError("propulsion '" + id + "': need xi2 >= 0, u_max > 0, mass > 0");
  // Power must be nonnegative on [0, u_max]; a convex quadratic attains its
  // minimum at an end point or at the vertex.
  double lo = std::min(propulsion_power(*this, 0.0), propulsion_power(*this, u_max));
  if (xi2 > 0.0) {
    const double vertex = -xi1 / (2.0 * xi2);
    if (vertex > 0.0 && vertex < u_max) lo = std::min(lo, propulsion_power(*this, vertex));
  }
  if (lo < 0.0) throw SchemaError("propulsion '" + id + "': power is negative inside [0, u_max]");
}

double servo_power(const ServoModel& servo, double joint_velocity, double torque) {
  if (std::abs(joint_velocity) > servo.omega_max || std::abs(torque) > servo.tau_max)
    spdlog::warn("servo '{}': operating point (sdot={:.4g}, tau={:.4g}) outside its limits",
                 servo.id, joint_velocity, torque);
  return servo_power<double>(servo, joint_velocity, torque);
}

double propeller_power(const PropulsionModel& prop, double u) {
  if (u < 0.0 || u > prop.u_max)
    throw BoundViolation("propulsion '" + prop.id + "': thrust " + std::to_string(u) +
                         " N outside [0, " + std::to_string(prop.u_max) + "]");
  return propulsion_power<double>(prop, u);
}

ComponentCatalog::ComponentCatalog(std::vector<ServoModel> servos,
                                   std::vector<PropulsionModel> propulsion)
    : servos_(std::move(servos)), propulsion_(std::move(propulsion)) {
  std::set<std::string> ids;
  for (const auto& s : servos_) {
    s.validate();
    if (!ids.insert(s.id).second) throw SchemaError("duplicate component id '" + s.id + "'");
  }
  for (const auto& p : propulsion_) {
    p.validate();
    if (!ids.insert(p.id).second) throw SchemaError("duplicate component id '" + p.id + "'");
  }
  if (servos_.empty() || propulsion_.empty())
    throw SchemaError("catalog needs at least one servo and one propulsion unit");
}

const ServoModel& ComponentCatalog::servo(const std::string& id) const {
  for (const auto& s : servos_)
    if (s.id == id) return s;
  throw LookupError("unknown servo '" + id + "'");
}

const PropulsionModel& ComponentCatalog::propulsion(const std::string& id) const {
  for (const auto& p : propulsion_)
    if (p.id == id) return p;
  throw LookupError("unknown propulsion unit '" + id + "'");
}

ComponentCatalog parse_catalog(const std::string& text, const std::string& source) {
  std::vector<ServoModel> servos;
  std::vector<PropulsionModel> props;
  std::set<std::string> ids;
  for (const YAML::Node& doc : yaml::parse_all(text, source)) {
    yaml::Reader r(doc, source);
    r.expect_schema(kCatalogSchema);
    const std::string kind = r.get<std::string>("kind");
    const std::string id = r.get<std::string>("id");
    if (id.empty()) r.fail("id", "must not be empty");
    if (!ids.insert(id).second) r.fail("id", "duplicate component id '" + id + "'");
    auto positive = [&r](const char* key, double v) {
      if (!positive_finite(v)) r.fail(key, "must be positive");
      return v;
    };
    if (kind == "servo") {
      r.allow_keys({"schema", "kind", "id", "resistance", "k_v", "viscous", "tau_max", "omega_max",
                    "mass"});
      ServoModel s;
      s.id = id;
      s.resistance = positive("resistance", r.get<double>("resistance"));
      s.k_v = positive("k_v", r.get<double>("k_v"));
      s.viscous = positive("viscous", r.get_or<double>("viscous", 1e-3));
      s.tau_max = positive("tau_max", r.get<double>("tau_max"));
      s.omega_max = positive("omega_max", r.get<double>("omega_max"));
      s.mass = positive("mass", r.get<double>("mass"));
      servos.push_back(s);
    } else if (kind == "propulsion") {
      r.allow_keys({"schema", "kind", "id", "xi0", "xi1", "xi2", "k_u", "u_max", "mass"});
      PropulsionModel p;
      p.id = id;
      p.xi0 = r.get<double>("xi0");
      p.xi1 = r.get<double>("xi1");
      p.xi2 = r.get<double>("xi2");
      if (p.xi2 < 0.0) r.fail("xi2", "must be non-negative");
      p.k_u = r.get_or<double>("k_u", 0.01);
      p.u_max = positive("u_max", r.get<double>("u_max"));
      p.mass = positive("mass", r.get<double>("mass"));
      try {
        p.validate();
      } catch (const SchemaError& e) {
        r.fail(e.what());
      }
      props.push_back(p);
    } else {
      r.fail("kind", "must be 'servo' or 'propulsion'");
    }
  }
  if (servos.empty() || props.empty())
    throw SchemaError(source + ": catalog needs at least one servo and one propulsion unit");
  return ComponentCatalog(std::move(servos), std::move(props));
}

ComponentCatalog load_catalog(const std::string& path) {
  return parse_catalog(yaml::read_file(path), path);
}

std::string catalog_to_yaml(const ComponentCatalog& catalog) {
  using yaml::exact;
  std::string out;
  for (const auto& s : catalog.servos()) {
    YAML::Emitter e;
    e << YAML::BeginMap << YAML::Key << "schema" << YAML::Value << kCatalogSchema << YAML::Key
      << "kind" << YAML::Value << "servo" << YAML::Key << "id" << YAML::Value << s.id << YAML::Key
      << "resistance" << YAML::Value << exact(s.resistance) << YAML::Key << "k_v" << YAML::Value
      << exact(s.k_v) << YAML::Key << "viscous" << YAML::Value << exact(s.viscous) << YAML::Key
      << "tau_max" << YAML::Value << exact(s.tau_max) << YAML::Key << "omega_max" << YAML::Value
      << exact(s.omega_max) << YAML::Key << "mass" << YAML::Value << exact(s.mass) << YAML::EndMap;
    out += std::string("---\n") + e.c_str() + "\n";
  }
  for (const auto& p : catalog.propulsion()) {
    YAML::Emitter e;
    e << YAML::BeginMap << YAML::Key << "schema" << YAML::Value << kCatalogSchema << YAML::Key
      << "kind" << YAML::Value << "propulsion" << YAML::Key << "id" << YAML::Value << p.id
      << YAML::Key << "xi0" << YAML::Value << exact(p.xi0) << YAML::Key << "xi1" << YAML::Value
      << exact(p.xi1) << YAML::Key << "xi2" << YAML::Value << exact(p.xi2) << YAML::Key << "k_u"
      << YAML::Value << exact(p.k_u) << YAML::Key << "u_max" << YAML::Value << exact(p.u_max)
      << YAML::Key << "mass" << YAML::Value << exact(p.mass) << YAML::EndMap;
    out += std::string("---\n") + e.c_str() + "\n";
  }
  return out;
}

}  // namespace morphco::actuation

#include "morphco/platform/design.hpp"

#include "morphco/common/yaml_util.hpp"

#include <cmath>
#include <set>

namespace morphco::platform {

namespace {

constexpr const char* kDesignSchema = "morphco.design/1";
constexpr const char* kMaterialsSchema = "morphco.materials/1";

void check_range(const DesignGrid& grid, double value, const std::string& what) {
  if (!std::isfinite(value) || !grid.contains(value))
    throw SchemaError(what + " = " + yaml::exact(value) + " is outside [" + yaml::exact(grid.min) +
                      ", " + yaml::exact(grid.max) + "]");
}

Eigen::Vector3d vec3(const yaml::Reader& r, const std::string& key) {
  const std::vector<double> v = r.get_doubles(key);
  if (v.size() != 3) r.fail(key, "must have three entries");
  return {v[0], v[1], v[2]};
}

}  // namespace

std::string to_string(JointAxis axis) {
  switch (axis) {
    case JointAxis::Dihedral: return "dihedral";
    case JointAxis::Sweep: return "sweep";
    case JointAxis::Incidence: return "incidence";
  }
  return "?";
}

JointAxis parse_joint_axis(const std::string& name) {
  if (name == "dihedral") return JointAxis::Dihedral;
  if (name == "sweep") return JointAxis::Sweep;
  if (name == "incidence") return JointAxis::Incidence;
  throw SchemaError("unknown joint axis '" + name + "'");
}

int DesignGrid::size() const { return static_cast<int>(std::lround((max - min) / step)) + 1; }

double DesignGrid::value(int index) const {
  if (index < 0 || index >= size()) throw BoundViolation("grid index out of range");
  // Round to the step's decimal resolution so 0.1 + 3·0.05 prints as 0.25.
  return std::round((min + index * step) * 1e9) / 1e9;
}

std::optional<int> DesignGrid::index_of(double x) const {
  if (!std::isfinite(x)) return std::nullopt;
  const double k = (x - min) / step;
  const long i = std::lround(k);
  if (i < 0 || i >= size() || std::abs(k - static_cast<double>(i)) > 1e-6) return std::nullopt;
  return static_cast<int>(i);
}

void DesignParams::validate() const {
  check_range(kChordGrid, chord, "chord");
  check_range(kAspectRatioGrid, aspect_ratio, "aspect_ratio");
  check_range(kVerticalOffsetGrid, vertical_offset, "vertical_offset");
  check_range(kHorizontalOffsetGrid, horizontal_offset, "horizontal_offset");
  check_range(kStaticAngleGrid, rad2deg(dihedral), "dihedral");
  check_range(kStaticAngleGrid, rad2deg(incidence), "incidence");
  check_range(kStaticAngleGrid, rad2deg(sweep), "sweep");
  if (joint_chain.size() > 3) throw SchemaError("joint chain longer than three joints");
  std::set<JointAxis> seen(joint_chain.begin(), joint_chain.end());
  if (seen.size() != joint_chain.size()) throw SchemaError("joint chain repeats an axis");
  if (servo_ids.size() != joint_chain.size())
    throw SchemaError("need exactly one servo id per joint");
  if (propulsion_id.empty()) throw SchemaError("propulsion id missing");
  if (!(controller_weight >= 0.0) || !std::isfinite(controller_weight))
    throw SchemaError("controller weight must be a non-negative number");
}

bool DesignParams::on_grid() const {
  return kChordGrid.index_of(chord) && kAspectRatioGrid.index_of(aspect_ratio) &&
         kVerticalOffsetGrid.index_of(vertical_offset) &&
         kHorizontalOffsetGrid.index_of(horizontal_offset) &&
         kStaticAngleGrid.index_of(rad2deg(dihedral)) &&
         kStaticAngleGrid.index_of(rad2deg(incidence)) && kStaticAngleGrid.index_of(rad2deg(sweep));
}

void Materials::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError(std::string(what) + " must be positive");
  };
  positive(wing_density, "wing_density");
  positive(fuselage_density, "fuselage_density");
  positive(wing_thickness_ratio, "wing_thickness_ratio");
  positive(airfoil_area_factor, "airfoil_area_factor");
  for (int i = 0; i < 3; ++i) positive(fuselage_size[i], "fuselage_size");
  if (!(payload_mass >= 0.0)) throw SchemaError("payload_mass must be non-negative");
  positive(servo_size, "servo_size");
  positive(air.density, "air density");
  positive(air.kinematic_viscosity, "kinematic viscosity");
}

DesignParams parse_design(const std::string& text, const std::string& source) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema(kDesignSchema);
  r.allow_keys({"schema", "name", "chord", "aspect_ratio", "vertical_offset", "horizontal_offset",
                "static_angles_deg", "joints", "propulsion", "controller_weight"});
  DesignParams d;
  d.name = r.get_or<std::string>("name", "");
  d.chord = r.get<double>("chord");
  d.aspect_ratio = r.get<double>("aspect_ratio");
  d.vertical_offset = r.get_or<double>("vertical_offset", 0.0);
  d.horizontal_offset = r.get<double>("horizontal_offset");
  if (r.has("static_angles_deg")) {
    const yaml::Reader a = r.child("static_angles_deg");
    a.allow_keys({"dihedral", "incidence", "sweep"});
    d.dihedral = deg2rad(a.get_or<double>("dihedral", 0.0));
    d.incidence = deg2rad(a.get_or<double>("incidence", 0.0));
    d.sweep = deg2rad(a.get_or<double>("sweep", 0.0));
  }
  if (r.has("joints")) {
    for (const yaml::Reader& j : r.children("joints")) {
      j.allow_keys({"axis", "servo"});
      try {
        d.joint_chain.push_back(parse_joint_axis(j.get<std::string>("axis")));
      } catch (const SchemaError& e) {
        j.fail("axis", e.what());
      }
      d.servo_ids.push_back(j.get<std::string>("servo"));
    }
  }
  d.propulsion_id = r.get<std::string>("propulsion");
  d.controller_weight = r.get_or<double>("controller_weight", 1.0);
  try {
    d.validate();
  } catch (const SchemaError& e) {
    r.fail(e.what());
  }
  return d;
}

DesignParams load_design(const std::string& path) { return parse_design(yaml::read_file(path), path); }

std::string design_to_yaml(const DesignParams& d) {
  using yaml::exact;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "schema" << YAML::Value << kDesignSchema;
  if (!d.name.empty()) e << YAML::Key << "name" << YAML::Value << d.name;
  e << YAML::Key << "chord" << YAML::Value << exact(d.chord);
  e << YAML::Key << "aspect_ratio" << YAML::Value << exact(d.aspect_ratio);
  e << YAML::Key << "vertical_offset" << YAML::Value << exact(d.vertical_offset);
  e << YAML::Key << "horizontal_offset" << YAML::Value << exact(d.horizontal_offset);
  e << YAML::Key << "static_angles_deg" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dihedral" << YAML::Value << exact(rad2deg(d.dihedral));
  e << YAML::Key << "incidence" << YAML::Value << exact(rad2deg(d.incidence));
  e << YAML::Key << "sweep" << YAML::Value << exact(rad2deg(d.sweep));
  e << YAML::EndMap;
  e << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
  for (size_t i = 0; i < d.joint_chain.size(); ++i)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "axis" << YAML::Value
      << to_string(d.joint_chain[i]) << YAML::Key << "servo" << YAML::Value << d.servo_ids[i]
      << YAML::EndMap;
  e << YAML::EndSeq;
  e << YAML::Key << "propulsion" << YAML::Value << d.propulsion_id;
  e << YAML::Key << "controller_weight" << YAML::Value << exact(d.controller_weight);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

Materials parse_materials(const std::string& text, const std::string& source) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema(kMaterialsSchema);
  r.allow_keys({"schema", "wing_density", "fuselage_density", "wing_thickness_ratio",
                "airfoil_area_factor", "fuselage_size", "payload_mass", "servo_size", "air",
                "gravity"});
  Materials m;
  m.wing_density = r.get_or("wing_density", m.wing_density);
  m.fuselage_density = r.get_or("fuselage_density", m.fuselage_density);
  m.wing_thickness_ratio = r.get_or("wing_thickness_ratio", m.wing_thickness_ratio);
  m.airfoil_area_factor = r.get_or("airfoil_area_factor", m.airfoil_area_factor);
  if (r.has("fuselage_size")) m.fuselage_size = vec3(r, "fuselage_size");
  m.payload_mass = r.get_or("payload_mass", m.payload_mass);
  m.servo_size = r.get_or("servo_size", m.servo_size);
  if (r.has("air")) {
    const yaml::Reader a = r.child("air");
    a.allow_keys({"density", "kinematic_viscosity"});
    m.air.density = a.get_or("density", m.air.density);
    m.air.kinematic_viscosity = a.get_or("kinematic_viscosity", m.air.kinematic_viscosity);
  }
  if (r.has("gravity")) m.gravity = vec3(r, "gravity");
  try {
    m.validate();
  } catch (const SchemaError& e) {
    r.fail(e.what());
  }
  return m;
}

Materials load_materials(const std::string& path) {
  return parse_materials(yaml::read_file(path), path);
}

}  // namespace morphco::platform

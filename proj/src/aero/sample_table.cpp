#include "morphco/aero/sample_table.hpp"

#include "morphco/common/yaml_util.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace morphco::aero {

namespace {

constexpr const char* kHeader = "alpha_deg,beta_deg,reynolds,CD,CL,CY,Cl,Cm,Cn";
constexpr const char* kMetaSchema = "morphco.aero_table/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  if (t.empty()) throw SchemaError(where + ": empty field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw SchemaError(where + ": '" + t + "' is not a finite number");
  return v;
}

}  // namespace

std::string sidecar_path(const std::string& csv_path) {
  std::string stem = csv_path;
  if (stem.size() >= 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0)
    stem.resize(stem.size() - 4);
  return stem + ".meta.yaml";
}

void AeroSampleTable::validate(const std::string& source) const {
  if (rows.empty()) throw SchemaError(source + ": table has no data rows");
  const ValidityBox& r = meta.ranges;
  const double tol = 1e-9;
  std::set<std::tuple<double, double, double>> keys;
  for (size_t i = 0; i < rows.size(); ++i) {
    const AeroSample& s = rows[i];
    const std::string where = source + ": row " + std::to_string(i + 1);
    const double a = rad2deg(s.alpha), b = rad2deg(s.beta);
    if (a < r.alpha_min_deg - tol || a > r.alpha_max_deg + tol || b < r.beta_min_deg - tol ||
        b > r.beta_max_deg + tol || s.reynolds < r.reynolds_min * (1 - tol) ||
        s.reynolds > r.reynolds_max * (1 + tol))
      throw SchemaError(where + ": sample outside the declared ranges");
    if (!keys.insert({s.alpha, s.beta, s.reynolds}).second)
      throw SchemaError(where + ": duplicate (alpha, beta, reynolds) key");
  }
}

TableMetadata parse_metadata(const std::string& text, const std::string& source) {
  yaml::Reader r(yaml::parse(text, source), source);
  r.expect_schema(kMetaSchema);
  r.allow_keys({"schema", "body", "airfoil", "aspect_ratio", "taper_ratio", "synthetic", "ranges"});
  TableMetadata m;
  m.body = r.get<std::string>("body");
  if (m.body != "fuselage" && m.body != "wing") r.fail("body", "must be 'fuselage' or 'wing'");
  m.airfoil = r.get_or<std::string>("airfoil", "");
  m.aspect_ratio = r.get_or<double>("aspect_ratio", 0.0);
  if (m.body == "wing" && !(m.aspect_ratio > 0.0))
    r.fail("aspect_ratio", "must be positive for a wing table");
  m.taper_ratio = r.get_or<double>("taper_ratio", 1.0);
  m.synthetic = r.get_or<bool>("synthetic", false);
  yaml::Reader rr = r.child("ranges");
  rr.allow_keys({"alpha_deg", "beta_deg", "reynolds"});
  const auto a = rr.get_range("alpha_deg");
  const auto b = rr.get_range("beta_deg");
  const auto re = rr.get_range("reynolds");
  if (!(re[0] > 0.0)) rr.fail("reynolds", "must be positive");
  m.ranges = {a[0], a[1], b[0], b[1], re[0], re[1]};
  return m;
}

AeroSampleTable parse_table_csv(const std::string& text, const TableMetadata& meta,
                                const std::string& source) {
  AeroSampleTable table;
  table.meta = meta;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (!header) {
      std::string compact;
      for (char ch : t)
        if (ch != ' ') compact += ch;
      if (compact != kHeader)
        throw SchemaError(where + ": expected header '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (t.back() == ',') fields.push_back("");
    if (fields.size() != 9)
      throw SchemaError(where + ": expected 9 fields, found " + std::to_string(fields.size()));
    AeroSample s;
    s.alpha = deg2rad(parse_number(fields[0], where));
    s.beta = deg2rad(parse_number(fields[1], where));
    s.reynolds = parse_number(fields[2], where);
    for (int c = 0; c < kCoefficientCount; ++c) s.coefficients[c] = parse_number(fields[3 + c], where);
    table.rows.push_back(s);
  }
  if (!header) throw SchemaError(source + ":1: missing header line");
  table.validate(source);
  return table;
}

AeroSampleTable read_table(const std::string& csv_path) {
  const std::string meta_path = sidecar_path(csv_path);
  const TableMetadata meta = parse_metadata(yaml::read_file(meta_path), meta_path);
  return parse_table_csv(yaml::read_file(csv_path), meta, csv_path);
}

void write_table(const AeroSampleTable& table, const std::string& csv_path) {
  table.validate(csv_path);
  {
    std::ofstream f(csv_path);
    if (!f) throw IoError("cannot write '" + csv_path + "'");
    f << kHeader << '\n';
    for (const AeroSample& s : table.rows) {
      f << yaml::exact(rad2deg(s.alpha)) << ',' << yaml::exact(rad2deg(s.beta)) << ','
        << yaml::exact(s.reynolds);
      for (int c = 0; c < kCoefficientCount; ++c) f << ',' << yaml::exact(s.coefficients[c]);
      f << '\n';
    }
  }
  const TableMetadata& m = table.meta;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << kMetaSchema;
  out << YAML::Key << "body" << YAML::Value << m.body;
  out << YAML::Key << "airfoil" << YAML::Value << m.airfoil;
  out << YAML::Key << "aspect_ratio" << YAML::Value << yaml::exact(m.aspect_ratio);
  out << YAML::Key << "taper_ratio" << YAML::Value << yaml::exact(m.taper_ratio);
  out << YAML::Key << "synthetic" << YAML::Value << m.synthetic;
  out << YAML::Key << "ranges" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha_deg" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << yaml::exact(m.ranges.alpha_min_deg) << yaml::exact(m.ranges.alpha_max_deg) << YAML::EndSeq;
  out << YAML::Key << "beta_deg" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << yaml::exact(m.ranges.beta_min_deg) << yaml::exact(m.ranges.beta_max_deg) << YAML::EndSeq;
  out << YAML::Key << "reynolds" << YAML::Value << YAML::Flow << YAML::BeginSeq
      << yaml::exact(m.ranges.reynolds_min) << yaml::exact(m.ranges.reynolds_max) << YAML::EndSeq;
  out << YAML::EndMap << YAML::EndMap;
  const std::string meta_path = sidecar_path(csv_path);
  std::ofstream f(meta_path);
  if (!f) throw IoError("cannot write '" + meta_path + "'");
  f << out.c_str() << '\n';
}

}  // namespace morphco::aero

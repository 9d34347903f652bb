#include "morphco/common/yaml_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace morphco::yaml {

namespace {

std::string located(const std::string& source, const YAML::Mark& mark, const std::string& msg) {
  if (mark.is_null()) return source + ": " + msg;
  return source + ":" + std::to_string(mark.line + 1) + ": " + msg;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

YAML::Node parse(const std::string& text, const std::string& source) {
  try {
    YAML::Node n = YAML::Load(text);
    if (!n.IsMap()) throw SchemaError(source + ": top level must be a mapping");
    return n;
  } catch (const YAML::ParserException& e) {
    throw SchemaError(located(source, e.mark, e.msg));
  }
}

std::vector<YAML::Node> parse_all(const std::string& text, const std::string& source) {
  try {
    std::vector<YAML::Node> docs = YAML::LoadAll(text);
    std::vector<YAML::Node> out;
    for (auto& d : docs) {
      if (d.IsNull()) continue;
      if (!d.IsMap()) throw SchemaError(located(source, d.Mark(), "document must be a mapping"));
      out.push_back(d);
    }
    return out;
  } catch (const YAML::ParserException& e) {
    throw SchemaError(located(source, e.mark, e.msg));
  }
}

std::string exact(double x) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

Reader::Reader(YAML::Node node, std::string source) : node_(std::move(node)), source_(std::move(source)) {
  if (!node_.IsMap()) fail("expected a mapping");
}

int Reader::line() const { return node_.Mark().is_null() ? 0 : node_.Mark().line + 1; }

bool Reader::has(const std::string& key) const { return static_cast<bool>(node_[key]); }

void Reader::fail(const std::string& key, const std::string& message) const {
  const YAML::Node n = node_[key];
  const YAML::Mark mark = n ? n.Mark() : node_.Mark();
  throw SchemaError(located(source_, mark, "'" + key + "' " + message));
}

void Reader::fail(const std::string& message) const {
  throw SchemaError(located(source_, node_.Mark(), message));
}

void Reader::allow_keys(std::initializer_list<const char*> allowed) const {
  for (const auto& kv : node_) {
    const std::string key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError(located(source_, kv.first.Mark(), "unknown key '" + key + "'"));
  }
}

void Reader::expect_schema(const std::string& schema) const {
  const std::string got = get<std::string>("schema");
  if (got != schema) fail("schema", "must be '" + schema + "', got '" + got + "'");
}

YAML::Node Reader::require(const std::string& key) const {
  const YAML::Node n = node_[key];
  if (!n) throw SchemaError(located(source_, node_.Mark(), "missing required key '" + key + "'"));
  return n;
}

std::vector<double> Reader::get_doubles(const std::string& key) const {
  const YAML::Node n = require(key);
  if (!n.IsSequence()) fail(key, "must be a list");
  std::vector<double> out;
  for (const auto& item : n) {
    try {
      out.push_back(item.as<double>());
    } catch (const YAML::Exception&) {
      throw SchemaError(located(source_, item.Mark(), "'" + key + "' entries must be numbers"));
    }
  }
  return out;
}

std::array<double, 2> Reader::get_range(const std::string& key) const {
  const std::vector<double> v = get_doubles(key);
  if (v.size() != 2 || !(v[0] <= v[1])) fail(key, "must be a [min, max] pair with min <= max");
  return {v[0], v[1]};
}

Reader Reader::child(const std::string& key) const {
  const YAML::Node n = require(key);
  if (!n.IsMap()) fail(key, "must be a mapping");
  return Reader(n, source_);
}

std::vector<Reader> Reader::children(const std::string& key) const {
  const YAML::Node n = require(key);
  if (!n.IsSequence()) fail(key, "must be a list");
  std::vector<Reader> out;
  for (const auto& item : n) {
    if (!item.IsMap())
      throw SchemaError(located(source_, item.Mark(), "'" + key + "' entries must be mappings"));
    out.emplace_back(item, source_);
  }
  return out;
}

std::vector<std::pair<std::string, YAML::Node>> Reader::entries() const {
  std::vector<std::pair<std::string, YAML::Node>> out;
  for (const auto& kv : node_) out.emplace_back(kv.first.as<std::string>(), kv.second);
  return out;
}

}  // namespace morphco::yaml

#pragma once

// Strict YAML reading helpers. Every error carries "<source>:<line>:" so a
// schema violation can be located in the input file.

#include "morphco/common/types.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace morphco::yaml {

std::string read_file(const std::string& path);
YAML::Node parse(const std::string& text, const std::string& source);
std::vector<YAML::Node> parse_all(const std::string& text, const std::string& source);

// Shortest decimal string that parses back to exactly `x`.
std::string exact(double x);

class Reader {
 public:
  Reader(YAML::Node node, std::string source);

  const YAML::Node& node() const { return node_; }
  const std::string& source() const { return source_; }
  int line() const;

  bool has(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  [[noreturn]] void fail(const std::string& message) const;

  // Rejects keys not in `allowed`.
  void allow_keys(std::initializer_list<const char*> allowed) const;
  void expect_schema(const std::string& schema) const;

  template <class T>
  T get(const std::string& key) const {
    const YAML::Node n = require(key);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, "has the wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, const T& fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::vector<double> get_doubles(const std::string& key) const;
  // Two-element [lo, hi] list with lo ≤ hi.
  std::array<double, 2> get_range(const std::string& key) const;

  Reader child(const std::string& key) const;
  std::vector<Reader> children(const std::string& key) const;
  std::vector<std::pair<std::string, YAML::Node>> entries() const;

 private:
  YAML::Node require(const std::string& key) const;
  YAML::Node node_;
  std::string source_;
};

}  // namespace morphco::yaml

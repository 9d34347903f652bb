#include "morphco/cli/manifest.hpp"

#include "morphco/common/types.hpp"
#include "morphco/common/yaml_util.hpp"

#include <fmt/format.h>
#include <openssl/sha.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

namespace morphco::cli {

std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  std::string hex;
  for (unsigned char c : digest) hex += fmt::format("{:02x}", c);
  return hex;
}

std::string git_blob_hash(const std::string& content) {
  std::string framed = "blob " + std::to_string(content.size());
  framed.push_back('\0');
  return sha1_hex(framed + content);
}

void RunManifest::add_input(const std::string& path) { inputs.push_back({path, git_blob_hash(yaml::read_file(path))}); }

std::string RunManifest::input_hash() const {
  std::vector<std::string> lines;
  for (const auto& f : inputs) lines.push_back(f.blob + " " + f.path + "\n");
  std::sort(lines.begin(), lines.end());
  std::string all;
  for (const auto& l : lines) all += l;
  return sha1_hex(all);
}

std::string RunManifest::to_yaml() const {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "schema" << YAML::Value << "morphco.manifest/1";
  e << YAML::Key << "command" << YAML::Value << command;
  e << YAML::Key << "arguments" << YAML::Value << YAML::Flow << arguments;
  e << YAML::Key << "seed" << YAML::Value << seed;
  e << YAML::Key << "workers" << YAML::Value << workers;
  e << YAML::Key << "timestamp" << YAML::Value << timestamp;
  e << YAML::Key << "output_dir" << YAML::Value << output_dir;
  e << YAML::Key << "input_hash" << YAML::Value << input_hash();
  e << YAML::Key << "inputs" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : inputs)
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "path" << YAML::Value << f.path << YAML::Key << "blob"
      << YAML::Value << f.blob << YAML::EndMap;
  e << YAML::EndSeq;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << to_yaml();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace morphco::cli

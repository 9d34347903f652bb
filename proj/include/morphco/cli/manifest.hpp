#pragma once

// Run manifest written next to every command's outputs: what ran, on which
// inputs (by content hash), with which seed.

#include <cstdint>
#include <string>
#include <vector>

namespace morphco::cli {

std::string sha1_hex(const std::string& bytes);
// Git blob id of the content: SHA-1 of "blob <size>\0<content>".
std::string git_blob_hash(const std::string& content);

struct InputFile {
  std::string path;
  std::string blob;  // git blob id of the content
};

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::vector<InputFile> inputs;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string timestamp;  // UTC, ISO 8601
  std::string output_dir;

  // Hashes each path's current content. Throws IoError for unreadable files.
  void add_input(const std::string& path);
  // SHA-1 over the sorted "blob path" lines, like a git tree of the inputs.
  std::string input_hash() const;
  std::string to_yaml() const;
  void write(const std::string& path) const;
};

std::string utc_timestamp();

}  // namespace morphco::cli

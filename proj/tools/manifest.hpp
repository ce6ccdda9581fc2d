#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hiermetric::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<std::uint64_t> seed;
  double wall_time_seconds = 0.0;
};

/// `<dir>/<stem>.manifest.json` for a primary output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

/// Checksums every input and output, then writes the manifest atomically.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace hiermetric::cli

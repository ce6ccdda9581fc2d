#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "hiermetric/checkpoint.hpp"
#include "hiermetric/error.hpp"

namespace hiermetric::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string() + " for checksum");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command;
  doc["argv"] = manifest.argv;
  doc["config"] = manifest.config;
  doc["seed"] = manifest.seed ? nlohmann::ordered_json(*manifest.seed) : nullptr;
  auto files = [](const std::vector<std::filesystem::path>& paths) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) arr.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    return arr;
  };
  doc["inputs"] = files(manifest.inputs);
  doc["outputs"] = files(manifest.outputs);
  doc["wall_time_seconds"] = manifest.wall_time_seconds;
  write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace hiermetric::cli

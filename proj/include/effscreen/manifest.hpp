#pragma once

#include <string>

#include <json.hpp>

namespace effscreen {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file(const std::string& path);

// Reproducibility record written into every output directory: tool identity,
// subcommand, full configuration echo, seeds, input digests, output list.
// Re-running a subcommand with a manifest's config reproduces the outputs
// byte-for-byte (timestamps aside).
struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  nlohmann::json inputs = nlohmann::json::object();   // name -> {path, sha256}
  nlohmann::json outputs = nlohmann::json::array();   // relative file names
};

void add_input_digest(RunManifest& manifest, const std::string& name, const std::string& path);
void write_manifest(const std::string& dir, const RunManifest& manifest);
nlohmann::json read_manifest(const std::string& path);

}  // namespace effscreen

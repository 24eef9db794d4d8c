#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace indist {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Snapshot of everything needed to reproduce a run: the subcommand, its fully
// resolved config (explicit sub-seeds included), toolkit version and timing.
struct RunManifest {
  std::string command;
  nlohmann::json config;  // resolved parameter block for the subcommand
  std::uint64_t master_seed = 0;
  std::string version = kToolkitVersion;
  double wall_time_s = 0.0;
};

void manifest_write(const RunManifest& manifest, const std::string& path);

// Throws on missing fields; a version mismatch warns on stderr but loads.
RunManifest manifest_load(const std::string& path);

}  // namespace indist

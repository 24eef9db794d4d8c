#include "indist/manifest.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>

namespace indist {

void manifest_write(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["version"] = manifest.version;
  j["command"] = manifest.command;
  j["master_seed"] = manifest.master_seed;
  j["config"] = manifest.config;
  j["wall_time_s"] = manifest.wall_time_s;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest_write: cannot open " + path);
  out << j.dump(2) << "\n";
}

RunManifest manifest_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest_load: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest_load: malformed JSON in " + path + ": " +
                             e.what());
  }
  RunManifest manifest;
  for (const char* field : {"version", "command", "master_seed", "config"}) {
    if (!j.contains(field))
      throw std::runtime_error(std::string("manifest_load: missing field '") +
                               field + "' in " + path);
  }
  manifest.version = j.at("version").get<std::string>();
  manifest.command = j.at("command").get<std::string>();
  manifest.master_seed = j.at("master_seed").get<std::uint64_t>();
  manifest.config = j.at("config");
  manifest.wall_time_s = j.value("wall_time_s", 0.0);
  if (manifest.version != kToolkitVersion) {
    std::cerr << "warning: manifest version " << manifest.version
              << " does not match toolkit " << kToolkitVersion << "\n";
  }
  return manifest;
}

}  // namespace indist

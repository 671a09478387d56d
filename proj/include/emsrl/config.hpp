#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emsrl/env.hpp"
#include "emsrl/rl.hpp"

namespace emsrl::config {

using nlohmann::json;

enum class VehicleKind { phev, fcev };

// Parsed run configuration. `snapshot` is the fully defaulted JSON form used
// for hashing and export; `base_dir` resolves relative data paths.
struct RunConfig {
  json snapshot;
  std::filesystem::path base_dir;

  VehicleKind vehicle = VehicleKind::phev;
  rl::Algorithm algorithm = rl::Algorithm::qlearning;
  rl::Hyperparams hyper;
  env::EnvSettings env;
  std::string output_dir;

  // Data files referenced by the config, resolved against base_dir.
  std::vector<std::filesystem::path> data_files() const;
  std::filesystem::path resolve(const std::string& key_path) const;
};

// Fills defaults, rejects unknown keys and out-of-range values (ConfigError),
// and checks that referenced files exist (DataFileError).
RunConfig parse_run_config(const json& raw, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);

// Dotted path access ("algorithm.alpha").
const json& get_path(const json& j, const std::string& dotted);
void set_path(json& j, const std::string& dotted, const json& value);

struct Built {
  std::shared_ptr<const env::Plant> plant;
  std::shared_ptr<const cycle::DriveCycle> cycle;
};

// Loads data files and cycle (DataFileError on any failure).
Built build_inputs(const RunConfig& cfg);
std::unique_ptr<env::EmsEnvironment> make_environment(const RunConfig& cfg, const Built& inputs);

}  // namespace emsrl::config

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emsrl/config.hpp"
#include "emsrl/rl.hpp"

namespace emsrl::exp {

using nlohmann::json;

inline constexpr const char* kToolVersion = "emsrl 1.0.0";

struct Axis {
  std::string path;  // dotted config key, e.g. "algorithm.alpha"
  std::vector<json> values;
};

// Classifier constants. R_f is the mean reward sum over the final `window`
// fraction of evaluations.
struct AvailabilityThresholds {
  double window = 0.10;
  double awful_ratio = 0.5;          // awful below baseline - ratio*|baseline|
  double valuable_completion = 0.9;  // share of final evaluations not terminated
  double awful_termination = 0.5;
};

struct SweepSpec {
  json base;  // raw run config (before defaults)
  std::filesystem::path base_dir;
  std::vector<Axis> axes;
  std::size_t repetitions = 1;
  std::uint64_t master_seed = 0;
  std::size_t max_runs = 10000;
  AvailabilityThresholds thresholds;
  double heatmap_equivalence_factor = 2.5;  // S used by the equivalent heatmap metric
};

// Sweep file: {"base": "<run config path>", "overrides": {...}, "axes":
// [{"path": ..., "values": [...]}], "repetitions", "master_seed", "max_runs",
// "availability": {...}, "heatmap_equivalence_factor"}.
SweepSpec load_sweep_spec(const std::filesystem::path& path);
SweepSpec parse_sweep_spec(const json& raw, const std::filesystem::path& base_dir);

struct RunPlan {
  std::size_t index = 0;
  std::size_t rep = 0;
  std::vector<std::pair<std::string, json>> axis_values;
  json config;  // raw config with axis values and derived seed applied
  std::uint64_t seed = 0;
};

// Cross product in row-major axis order, repetitions innermost. Throws
// ConfigError when the product exceeds max_runs.
std::vector<RunPlan> enumerate(const SweepSpec& spec);
std::size_t sweep_size(const SweepSpec& spec);

// Seed of one run from the master seed, its config (seed field excluded) and
// its repetition index.
std::uint64_t derive_seed(std::uint64_t master, const json& config, std::size_t rep);

std::string sha1_hex(std::string_view bytes);
// Hash git assigns to a blob with these contents.
std::string git_blob_hash(const std::filesystem::path& file);
std::string config_hash(const json& snapshot);

enum class Availability : int { awful = -1, defective = 0, valuable = 1 };

struct RunRecord {
  std::size_t index = 0;
  std::size_t rep = 0;
  std::string id;
  std::vector<std::pair<std::string, json>> axis_values;
  json config;  // defaulted snapshot
  std::string config_hash;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  rl::LearningCurve curve;
  rl::EpisodeTrace final_eval;  // greedy rollout after training
  rl::QTable q;
  std::vector<std::size_t> updates_per_episode;
  double baseline_reward = 0.0;
  double alpha_per_unit_s = 0.0;  // grams per unit SOC at S = 1
  double dt = 1.0;
  json grids;  // state and action grid bounds, stored beside the Q-table
  std::optional<Availability> label;
  double wall_seconds = 0.0;  // informational, never exported

  double fuel_g() const { return final_eval.summary.fuel_g; }
  double delta_soc() const { return final_eval.soc_start - final_eval.soc_end; }
};

// Reward sum of the no-battery-management policy from `start_soc`.
double baseline_reward(env::EmsEnvironment& env, double start_soc);

// Trains one configuration. Errors propagate.
RunRecord run_single(const config::RunConfig& cfg, const rl::TrainOptions& options = {});

using Progress = std::function<void(const RunRecord&)>;

// Executes every planned run on `workers` threads. Failures become records
// with ok = false. Records come back in plan order.
std::vector<RunRecord> run_sweep(const SweepSpec& spec, std::size_t workers = 1,
                                 const Progress& progress = {});

Availability classify_availability(const rl::LearningCurve& curve, double baseline,
                                   const AvailabilityThresholds& t = {});

struct RankEntry {
  std::string parameter;
  json value;
  double index = 0.0;
  std::size_t count = 0;
};

// Mean label per (parameter, value); within each parameter sorted by index
// descending. Unlabelled records are skipped.
std::vector<RankEntry> availability_ranking(const std::vector<RunRecord>& records,
                                            const std::vector<Axis>& axes);

enum class HeatmapMetric { fuel_g_per_step, soc_delta, equivalent_g_per_step };
std::string to_string(HeatmapMetric m);

struct Heatmap {
  std::vector<json> rows;  // state grid values
  std::vector<json> cols;  // action grid values
  std::vector<std::vector<double>> cells;
};

// `s` is the equivalence factor used by equivalent_g_per_step.
double metric_of(const RunRecord& r, HeatmapMetric metric, double s);

// Mean metric per (state grid, action grid) cell over successful records.
// Throws MissingCell when any cell has no record.
Heatmap energy_cost_heatmap(const std::vector<RunRecord>& records, HeatmapMetric metric,
                            double s, const std::string& row_path = "env.state_grid",
                            const std::string& col_path = "env.action_grid");

struct UpdateDensity {
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  std::uint64_t max = 0;
  std::uint64_t total = 0;
  double zero_fraction = 1.0;
};

UpdateDensity qtable_update_density(const rl::QTable& q);

// Q-table as `state_index,action_index,q,visits` plus a JSON sidecar
// describing the grids it was trained on.
void save_qtable(const RunRecord& record, const std::filesystem::path& csv_path);
json grids_of(const env::EmsEnvironment& env);
rl::QTable load_qtable(const std::filesystem::path& csv_path, std::size_t states, std::size_t actions);

// Per-run and sweep-level CSV/JSON export. An empty record list writes only
// manifest.json.
void export_report(const std::vector<RunRecord>& records, const SweepSpec& spec,
                   const std::filesystem::path& out_dir);

// Single-episode output files shared by simulate and the per-run export.
void write_curve(const rl::LearningCurve& curve, const std::filesystem::path& path);
void write_soc_trajectory(const rl::EpisodeTrace& trace, double dt, const std::filesystem::path& path);
void write_operating_points(const rl::EpisodeTrace& trace, const std::filesystem::path& path);

}  // namespace emsrl::exp

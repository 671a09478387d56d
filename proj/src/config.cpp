#include "emsrl/config.hpp"

#include <cmath>
#include <fstream>

#include "emsrl/error.hpp"
#include "emsrl/powertrain.hpp"
#include "emsrl/reference.hpp"

namespace emsrl::config {
namespace {

namespace fs = std::filesystem;

const char* const kPhevFiles[] = {"engine_map", "engine_limits", "motor_map", "motor_limits", "battery"};
const char* const kFcevFiles[] = {"motor_map", "motor_limits", "battery", "fc_power_current",
                                  "fc_current_efficiency"};

json vehicle_params_json(const powertrain::VehicleParams& p) {
  return {{"mass", p.mass},           {"air_density", p.air_density},   {"drag_coeff", p.drag_coeff},
          {"frontal_area", p.frontal_area}, {"roll_coeff", p.roll_coeff}, {"gravity", p.gravity},
          {"grade", p.grade},         {"wheel_radius", p.wheel_radius}, {"gear_ratios", p.gear_ratios},
          {"final_ratio", p.final_ratio}};
}

json defaults(VehicleKind kind) {
  const bool phev = kind == VehicleKind::phev;
  json files = json::object();
  for (const char* k : {"engine_map", "engine_limits", "motor_map", "motor_limits", "battery",
                        "fc_power_current", "fc_current_efficiency"})
    files[k] = nullptr;
  json vehicle = {
      {"kind", phev ? "phev" : "fcev"},
      {"params", vehicle_params_json(phev ? reference::phev_vehicle() : reference::fcev_vehicle())},
      {"battery_capacity_ah", phev ? reference::kPhevBatteryCapacity : reference::kFcevBatteryCapacity},
      {"battery_rint_ohm", phev ? json(nullptr) : json(reference::kFcevBatteryResistance)},
      {"fc_max_power_w", reference::kFcevFuelCellMaxPower},
      {"engine_speed_min_rpm", 800.0},
      {"engine_speed_max_rpm", 6500.0},
      {"q_lhv_j_per_g", phev ? 42600.0 : 120000.0},
  };
  vehicle.update(files);
  return {
      {"vehicle", vehicle},
      {"cycle", {{"path", nullptr}, {"unit", "kph"}}},
      {"env",
       {{"state_grid", 21},
        {"pdem_grid", nullptr},
        {"soc_grid", nullptr},
        {"action_grid", 11},
        {"soc_grid_lo", nullptr},
        {"soc_grid_hi", nullptr},
        {"start_soc", 0.65},
        {"reward", {{"kind", "fuel_min"}, {"tau", 1.0}, {"S", 0.0}, {"v_bat", phev ? 350.0 : 600.0}}},
        {"constraints",
         {{"soc_min", 0.30}, {"soc_max", 0.85}, {"w_dis", 1000.0}, {"w_chg", 1000.0},
          {"terminate_on_violation", true}}}}},
      {"algorithm",
       {{"name", nullptr},
        {"alpha", 0.1},
        {"epsilon", 0.1},
        {"gamma", 0.99},
        {"episodes", 1000},
        {"lambda", nullptr},
        {"eval_every", 100},
        {"eval_epsilon", 0.3},
        {"seed", 0}}},
      {"output", {{"dir", nullptr}}},
  };
}

// Overlays `raw` onto `base`, rejecting keys the defaults do not know.
void merge(json& base, const json& raw, const std::string& prefix) {
  if (!raw.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key, "unknown key");
    auto& slot = base[it.key()];
    if (slot.is_object() && !it.value().is_null())
      merge(slot, it.value(), key);
    else
      slot = it.value();
  }
}

double num(const json& root, const std::string& key) {
  const auto& v = get_path(root, key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

double num_in(const json& root, const std::string& key, double lo, double hi) {
  const double d = num(root, key);
  if (d < lo || d > hi) throw ConfigError(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return d;
}

std::size_t count_in(const json& root, const std::string& key, std::size_t lo, std::size_t hi) {
  const auto& v = get_path(root, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key, "expected a non-negative integer");
  const auto n = v.get<std::size_t>();
  if (n < lo || n > hi) throw ConfigError(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return n;
}

std::string str(const json& root, const std::string& key) {
  const auto& v = get_path(root, key);
  if (v.is_null()) throw ConfigError(key, "missing required value");
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

powertrain::VehicleParams parse_vehicle(const json& root) {
  powertrain::VehicleParams p;
  const std::string b = "vehicle.params.";
  p.mass = num(root, b + "mass");
  p.air_density = num(root, b + "air_density");
  p.drag_coeff = num(root, b + "drag_coeff");
  p.frontal_area = num(root, b + "frontal_area");
  p.roll_coeff = num(root, b + "roll_coeff");
  p.gravity = num(root, b + "gravity");
  p.grade = num(root, b + "grade");
  p.wheel_radius = num(root, b + "wheel_radius");
  p.final_ratio = num(root, b + "final_ratio");
  const auto& g = get_path(root, b + "gear_ratios");
  if (!g.is_array()) throw ConfigError(b + "gear_ratios", "expected an array");
  p.gear_ratios.clear();
  for (const auto& r : g) {
    if (!r.is_number()) throw ConfigError(b + "gear_ratios", "expected numbers");
    p.gear_ratios.push_back(r.get<double>());
  }
  p.validate();
  return p;
}

}  // namespace

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFileError(path.string(), "cannot open file");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

const json& get_path(const json& j, const std::string& dotted) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot - start);
    if (!cur->is_object() || !cur->contains(key)) throw ConfigError(dotted, "no such key");
    cur = &(*cur)[key];
    if (dot == std::string::npos) return *cur;
    start = dot + 1;
  }
}

void set_path(json& j, const std::string& dotted, const json& value) {
  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

fs::path RunConfig::resolve(const std::string& key_path) const {
  const fs::path p(get_path(snapshot, key_path).get<std::string>());
  return p.is_absolute() ? p : (base_dir / p).lexically_normal();
}

std::vector<fs::path> RunConfig::data_files() const {
  std::vector<fs::path> out;
  if (vehicle == VehicleKind::phev)
    for (const char* k : kPhevFiles) out.push_back(resolve(std::string("vehicle.") + k));
  else
    for (const char* k : kFcevFiles) out.push_back(resolve(std::string("vehicle.") + k));
  out.push_back(resolve("cycle.path"));
  return out;
}

RunConfig parse_run_config(const json& raw, const fs::path& base_dir) {
  if (!raw.is_object()) throw ConfigError("<root>", "expected an object");
  VehicleKind kind = VehicleKind::phev;
  if (raw.contains("vehicle") && raw["vehicle"].contains("kind")) {
    const auto& k = raw["vehicle"]["kind"];
    if (k == "phev") kind = VehicleKind::phev;
    else if (k == "fcev") kind = VehicleKind::fcev;
    else throw ConfigError("vehicle.kind", "expected 'phev' or 'fcev'");
  } else {
    throw ConfigError("vehicle.kind", "missing required value");
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.vehicle = kind;
  cfg.snapshot = defaults(kind);
  merge(cfg.snapshot, raw, "");
  const json& s = cfg.snapshot;

  // vehicle
  parse_vehicle(s);
  num_in(s, "vehicle.battery_capacity_ah", 1e-9, 1e6);
  num_in(s, "vehicle.q_lhv_j_per_g", 1e-9, 1e9);
  if (kind == VehicleKind::phev) {
    const double lo = num_in(s, "vehicle.engine_speed_min_rpm", 0.0, 1e5);
    const double hi = num_in(s, "vehicle.engine_speed_max_rpm", 0.0, 1e5);
    if (!(lo < hi)) throw ConfigError("vehicle.engine_speed_max_rpm", "must exceed engine_speed_min_rpm");
    for (const char* k : kPhevFiles) str(s, std::string("vehicle.") + k);
  } else {
    num_in(s, "vehicle.fc_max_power_w", 1e-9, 1e9);
    if (!get_path(s, "vehicle.battery_rint_ohm").is_null()) num_in(s, "vehicle.battery_rint_ohm", 1e-12, 1e3);
    for (const char* k : kFcevFiles) str(s, std::string("vehicle.") + k);
  }
  str(s, "cycle.path");
  try {
    cycle::parse_speed_unit(str(s, "cycle.unit"));
  } catch (const ParseError& e) {
    throw ConfigError("cycle.unit", e.what());
  }

  // env
  auto& e = cfg.env;
  const std::size_t grid = count_in(s, "env.state_grid", 2, 10001);
  e.pdem_points = get_path(s, "env.pdem_grid").is_null() ? grid : count_in(s, "env.pdem_grid", 2, 10001);
  e.soc_points = get_path(s, "env.soc_grid").is_null() ? grid : count_in(s, "env.soc_grid", 2, 10001);
  e.action_points = count_in(s, "env.action_grid", 2, 10001);
  const bool lo_set = !get_path(s, "env.soc_grid_lo").is_null();
  const bool hi_set = !get_path(s, "env.soc_grid_hi").is_null();
  if (lo_set != hi_set) throw ConfigError("env.soc_grid_lo", "soc_grid_lo and soc_grid_hi must be set together");
  if (lo_set) {
    e.soc_grid_lo = num_in(s, "env.soc_grid_lo", 0.0, 1.0);
    e.soc_grid_hi = num_in(s, "env.soc_grid_hi", 0.0, 1.0);
    if (!(e.soc_grid_lo < e.soc_grid_hi)) throw ConfigError("env.soc_grid_hi", "must exceed soc_grid_lo");
  }
  const std::string rk = str(s, "env.reward.kind");
  if (rk == "fuel_min") e.reward.kind = env::RewardKind::fuel_min;
  else if (rk == "eq_instant") e.reward.kind = env::RewardKind::eq_instant;
  else if (rk == "eq_overall") e.reward.kind = env::RewardKind::eq_overall;
  else throw ConfigError("env.reward.kind", "expected fuel_min, eq_instant or eq_overall");
  e.reward.tau = num(s, "env.reward.tau");
  e.reward.equivalence_factor = num_in(s, "env.reward.S", 0.0, 1e9);
  e.reward.v_bat = num_in(s, "env.reward.v_bat", 1e-9, 1e6);
  e.reward.capacity_ah = num(s, "vehicle.battery_capacity_ah");
  e.reward.q_lhv = num(s, "vehicle.q_lhv_j_per_g");
  auto& c = e.constraints;
  c.soc_min = num_in(s, "env.constraints.soc_min", 0.0, 1.0);
  c.soc_max = num_in(s, "env.constraints.soc_max", 0.0, 1.0);
  if (!(c.soc_min < c.soc_max)) throw ConfigError("env.constraints.soc_max", "must exceed soc_min");
  c.w_dis = num_in(s, "env.constraints.w_dis", 0.0, 1e12);
  c.w_chg = num_in(s, "env.constraints.w_chg", 0.0, 1e12);
  const auto& term = get_path(s, "env.constraints.terminate_on_violation");
  if (!term.is_boolean()) throw ConfigError("env.constraints.terminate_on_violation", "expected a boolean");
  c.terminate_on_violation = term.get<bool>();

  // algorithm
  cfg.algorithm = rl::parse_algorithm(str(s, "algorithm.name"));
  auto& h = cfg.hyper;
  h.alpha = num(s, "algorithm.alpha");
  h.epsilon = num(s, "algorithm.epsilon");
  h.gamma = num(s, "algorithm.gamma");
  h.episodes = count_in(s, "algorithm.episodes", 0, 100000000);
  h.start_soc = num(s, "env.start_soc");
  h.eval_every = count_in(s, "algorithm.eval_every", 0, 100000000);
  h.eval_epsilon = num(s, "algorithm.eval_epsilon");
  const auto& lam = get_path(s, "algorithm.lambda");
  if (cfg.algorithm == rl::Algorithm::sarsa_lambda && lam.is_null())
    throw ConfigError("algorithm.lambda", "required for sarsa_lambda");
  if (!lam.is_null()) h.lambda = num(s, "algorithm.lambda");
  const auto& seed = get_path(s, "algorithm.seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("algorithm.seed", "expected a non-negative integer");
  h.seed = seed.get<std::uint64_t>();
  h.validate();

  const auto& out = get_path(s, "output.dir");
  if (!out.is_null()) cfg.output_dir = str(s, "output.dir");

  for (const auto& f : cfg.data_files())
    if (!fs::exists(f)) throw DataFileError(f.string(), "file not found");
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_json(path), path.parent_path());
}

Built build_inputs(const RunConfig& cfg) {
  const json& s = cfg.snapshot;
  const auto vehicle = parse_vehicle(s);
  const double capacity = num(s, "vehicle.battery_capacity_ah");
  Built b;
  try {
    b.cycle = std::make_shared<const cycle::DriveCycle>(
        cycle::load_cycle(cfg.resolve("cycle.path"), cycle::parse_speed_unit(str(s, "cycle.unit"))));
  } catch (const DataFileError&) {
    throw;
  } catch (const Error& e) {
    throw DataFileError(cfg.resolve("cycle.path").string(), e.what());
  }
  if (cfg.vehicle == VehicleKind::phev) {
    powertrain::PhevPlant p;
    p.vehicle = vehicle;
    p.engine = powertrain::load_torque_speed_map(cfg.resolve("vehicle.engine_map"), cfg.resolve("vehicle.engine_limits"));
    p.motor = powertrain::load_torque_speed_map(cfg.resolve("vehicle.motor_map"), cfg.resolve("vehicle.motor_limits"));
    const auto& r = get_path(s, "vehicle.battery_rint_ohm");
    p.battery = powertrain::load_battery(cfg.resolve("vehicle.battery"), capacity,
                                         r.is_null() ? std::nullopt : std::optional<double>(r.get<double>()));
    p.engine_speed = {num(s, "vehicle.engine_speed_min_rpm") * reference::kRpm,
                      num(s, "vehicle.engine_speed_max_rpm") * reference::kRpm};
    p.q_lhv = num(s, "vehicle.q_lhv_j_per_g");
    b.plant = std::make_shared<const env::Plant>(std::move(p));
  } else {
    powertrain::FcevPlant p;
    p.vehicle = vehicle;
    p.motor = powertrain::load_torque_speed_map(cfg.resolve("vehicle.motor_map"), cfg.resolve("vehicle.motor_limits"));
    const auto& r = get_path(s, "vehicle.battery_rint_ohm");
    p.battery = powertrain::load_battery(cfg.resolve("vehicle.battery"), capacity,
                                         r.is_null() ? std::nullopt : std::optional<double>(r.get<double>()));
    p.fuel_cell = powertrain::load_fuel_cell_curves(cfg.resolve("vehicle.fc_power_current"),
                                                    cfg.resolve("vehicle.fc_current_efficiency"),
                                                    num(s, "vehicle.fc_max_power_w"));
    p.q_lhv_h2 = num(s, "vehicle.q_lhv_j_per_g");
    b.plant = std::make_shared<const env::Plant>(std::move(p));
  }
  return b;
}

std::unique_ptr<env::EmsEnvironment> make_environment(const RunConfig& cfg, const Built& inputs) {
  return std::make_unique<env::EmsEnvironment>(inputs.plant, inputs.cycle, cfg.env);
}

}  // namespace emsrl::config

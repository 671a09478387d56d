#include "emsrl/exp.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "emsrl/csv.hpp"
#include "emsrl/error.hpp"

namespace emsrl::exp {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return csv::fmt(v.get<double>());
  return v.dump();
}

std::string run_id(std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return "run_" + n;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
}

double sweep_num(const json& j, const char* key, const std::string& prefix) {
  if (!j[key].is_number()) throw ConfigError(prefix + key, "expected a number");
  return j[key].get<double>();
}

std::uint64_t sweep_uint(const json& j, const char* key) {
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

// ---------------------------------------------------------------------------
// sweep files

SweepSpec parse_sweep_spec(const json& raw, const fs::path& base_dir) {
  if (!raw.is_object()) throw ConfigError("<root>", "expected an object");
  check_keys(raw, {"base", "overrides", "axes", "repetitions", "master_seed", "max_runs", "availability",
                   "heatmap_equivalence_factor"},
             "");
  SweepSpec spec;
  spec.base_dir = base_dir;
  if (!raw.contains("base")) throw ConfigError("base", "missing required value");
  if (raw["base"].is_string()) {
    const fs::path p = base_dir / raw["base"].get<std::string>();
    spec.base = config::read_json(p);
    spec.base_dir = p.parent_path();
  } else if (raw["base"].is_object()) {
    spec.base = raw["base"];
  } else {
    throw ConfigError("base", "expected a config path or object");
  }
  if (raw.contains("overrides")) {
    if (!raw["overrides"].is_object()) throw ConfigError("overrides", "expected an object");
    spec.base.merge_patch(raw["overrides"]);
  }
  if (raw.contains("axes")) {
    if (!raw["axes"].is_array()) throw ConfigError("axes", "expected an array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < raw["axes"].size(); ++i) {
      const auto& a = raw["axes"][i];
      const std::string key = "axes[" + std::to_string(i) + "]";
      if (!a.is_object() || !a.contains("path") || !a["path"].is_string() || !a.contains("values") ||
          !a["values"].is_array() || a["values"].empty())
        throw ConfigError(key, "expected {\"path\": string, \"values\": non-empty array}");
      check_keys(a, {"path", "values"}, key + ".");
      Axis axis{a["path"].get<std::string>(), {}};
      if (!seen.insert(axis.path).second) throw ConfigError(key, "duplicate axis " + axis.path);
      for (const auto& v : a["values"]) axis.values.push_back(v);
      spec.axes.push_back(std::move(axis));
    }
  }
  if (raw.contains("repetitions")) {
    spec.repetitions = sweep_uint(raw, "repetitions");
    if (spec.repetitions == 0) throw ConfigError("repetitions", "must be at least 1");
  }
  if (raw.contains("master_seed")) spec.master_seed = sweep_uint(raw, "master_seed");
  if (raw.contains("max_runs")) spec.max_runs = sweep_uint(raw, "max_runs");
  if (raw.contains("availability")) {
    const auto& a = raw["availability"];
    if (!a.is_object()) throw ConfigError("availability", "expected an object");
    check_keys(a, {"window", "awful_ratio", "valuable_completion", "awful_termination"}, "availability.");
    auto& t = spec.thresholds;
    if (a.contains("window")) t.window = sweep_num(a, "window", "availability.");
    if (a.contains("awful_ratio")) t.awful_ratio = sweep_num(a, "awful_ratio", "availability.");
    if (a.contains("valuable_completion"))
      t.valuable_completion = sweep_num(a, "valuable_completion", "availability.");
    if (a.contains("awful_termination"))
      t.awful_termination = sweep_num(a, "awful_termination", "availability.");
    if (!(t.window > 0.0 && t.window <= 1.0)) throw ConfigError("availability.window", "must be in (0, 1]");
    for (double f : {t.awful_ratio, t.valuable_completion, t.awful_termination})
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("availability", "fractions must be in [0, 1]");
  }
  if (raw.contains("heatmap_equivalence_factor")) {
    spec.heatmap_equivalence_factor = sweep_num(raw, "heatmap_equivalence_factor", "");
    if (!(spec.heatmap_equivalence_factor >= 0.0))
      throw ConfigError("heatmap_equivalence_factor", "must be non-negative");
  }
  return spec;
}

SweepSpec load_sweep_spec(const fs::path& path) {
  return parse_sweep_spec(config::read_json(path), path.parent_path());
}

std::size_t sweep_size(const SweepSpec& spec) {
  std::size_t n = spec.repetitions;
  for (const auto& a : spec.axes) {
    if (n > spec.max_runs) break;
    n *= a.values.size();
  }
  return n;
}

std::vector<RunPlan> enumerate(const SweepSpec& spec) {
  const std::size_t total = sweep_size(spec);
  if (total > spec.max_runs)
    throw ConfigError("max_runs", "sweep has " + std::to_string(total) + " runs, cap is " +
                                      std::to_string(spec.max_runs));
  std::vector<RunPlan> plans;
  plans.reserve(total);
  std::vector<std::size_t> idx(spec.axes.size(), 0);
  for (std::size_t n = 0; n < total / spec.repetitions; ++n) {
    json cfg = spec.base;
    std::vector<std::pair<std::string, json>> values;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) {
      const auto& v = spec.axes[i].values[idx[i]];
      config::set_path(cfg, spec.axes[i].path, v);
      values.emplace_back(spec.axes[i].path, v);
    }
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      RunPlan p;
      p.index = plans.size();
      p.rep = rep;
      p.axis_values = values;
      p.config = cfg;
      p.seed = derive_seed(spec.master_seed, cfg, rep);
      config::set_path(p.config, "algorithm.seed", p.seed);
      plans.push_back(std::move(p));
    }
    for (std::size_t i = spec.axes.size(); i-- > 0;) {
      if (++idx[i] < spec.axes[i].values.size()) break;
      idx[i] = 0;
    }
  }
  return plans;
}

// ---------------------------------------------------------------------------
// hashing

std::string sha1_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string git_blob_hash(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataFileError(file.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string body = ss.str();
  return sha1_hex("blob " + std::to_string(body.size()) + '\0' + body);
}

std::string config_hash(const json& snapshot) { return sha1_hex(snapshot.dump()); }

std::uint64_t derive_seed(std::uint64_t master, const json& config, std::size_t rep) {
  json c = config;
  if (c.contains("algorithm") && c["algorithm"].is_object()) c["algorithm"].erase("seed");
  const std::string h = sha1_hex(std::to_string(master) + '\n' + std::to_string(rep) + '\n' + c.dump());
  return std::stoull(h.substr(0, 15), nullptr, 16);  // 60 bits keep JSON integers exact
}

// ---------------------------------------------------------------------------
// runs

double baseline_reward(env::EmsEnvironment& env, double start_soc) {
  env.reset(start_soc);
  double sum = 0.0;
  while (!env.done()) sum += env.step_command(env.baseline_command()).reward;
  return sum;
}

json grids_of(const env::EmsEnvironment& env) {
  auto grid = [](const env::Grid& g) { return json{{"lo", g.lo()}, {"hi", g.hi()}, {"n", g.size()}}; };
  return {{"pdem_w", grid(env.state_spec().pdem)},
          {"soc", grid(env.state_spec().soc)},
          {"action", grid(env.action_spec().grid)},
          {"action_kind", env.action_spec().kind == env::ActionKind::torque_split ? "torque_split" : "fc_power"}};
}

RunRecord run_single(const config::RunConfig& cfg, const rl::TrainOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r;
  r.config = cfg.snapshot;
  r.config_hash = config_hash(cfg.snapshot);
  r.seed = cfg.hyper.seed;
  const auto inputs = config::build_inputs(cfg);
  auto environment = config::make_environment(cfg, inputs);
  auto result = rl::train(cfg.algorithm, *environment, cfg.hyper, options);
  r.curve = std::move(result.curve);
  r.final_eval = std::move(result.greedy);
  r.q = std::move(result.q);
  r.updates_per_episode = std::move(result.updates_per_episode);
  r.baseline_reward = baseline_reward(*environment, cfg.hyper.start_soc);
  const auto& rs = environment->reward_spec();
  r.alpha_per_unit_s = env::equivalence_factor(1.0, rs.v_bat, rs.capacity_ah, rs.q_lhv);
  r.dt = inputs.cycle->dt();
  r.grids = grids_of(*environment);
  r.ok = true;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<RunRecord> run_sweep(const SweepSpec& spec, std::size_t workers, const Progress& progress) {
  const auto plans = enumerate(spec);
  // validate everything before any training starts
  std::vector<config::RunConfig> configs;
  configs.reserve(plans.size());
  for (const auto& p : plans) configs.push_back(config::parse_run_config(p.config, spec.base_dir));

  std::vector<RunRecord> records(plans.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  rl::TrainOptions options;
  options.keep_eval_soc = false;

  auto work = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      RunRecord r;
      try {
        r = run_single(configs[i], options);
        if (!r.curve.empty()) r.label = classify_availability(r.curve, r.baseline_reward, spec.thresholds);
      } catch (const std::exception& e) {
        r = RunRecord{};
        r.config = configs[i].snapshot;
        r.config_hash = config_hash(configs[i].snapshot);
        r.seed = configs[i].hyper.seed;
        r.ok = false;
        r.error = e.what();
      }
      r.index = plans[i].index;
      r.rep = plans[i].rep;
      r.id = run_id(plans[i].index);
      r.axis_values = plans[i].axis_values;
      records[i] = std::move(r);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(records[i]);
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, plans.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return records;
}

// ---------------------------------------------------------------------------
// analysis

Availability classify_availability(const rl::LearningCurve& curve, double baseline,
                                   const AvailabilityThresholds& t) {
  if (curve.empty()) throw EmptyCurve("availability needs at least one evaluation");
  const auto n = static_cast<std::size_t>(std::ceil(t.window * static_cast<double>(curve.size()) - 1e-9));
  const std::size_t window = std::clamp<std::size_t>(n, 1, curve.size());
  double sum = 0.0;
  std::size_t terminated = 0;
  for (std::size_t i = curve.size() - window; i < curve.size(); ++i) {
    sum += curve[i].reward_sum;
    terminated += curve[i].terminated ? 1 : 0;
  }
  const double r_f = sum / static_cast<double>(window);
  const double term_rate = static_cast<double>(terminated) / static_cast<double>(window);
  if (r_f < baseline - t.awful_ratio * std::abs(baseline) || term_rate >= t.awful_termination)
    return Availability::awful;
  if (r_f >= baseline && 1.0 - term_rate >= t.valuable_completion) return Availability::valuable;
  return Availability::defective;
}

std::vector<RankEntry> availability_ranking(const std::vector<RunRecord>& records,
                                            const std::vector<Axis>& axes) {
  std::vector<RankEntry> out;
  for (const auto& axis : axes) {
    std::vector<RankEntry> entries;
    for (const auto& v : axis.values) {
      RankEntry e{axis.path, v, 0.0, 0};
      double sum = 0.0;
      for (const auto& r : records) {
        if (!r.label) continue;
        for (const auto& [path, value] : r.axis_values)
          if (path == axis.path && value == v) {
            sum += static_cast<int>(*r.label);
            ++e.count;
          }
      }
      e.index = e.count ? sum / static_cast<double>(e.count) : 0.0;
      entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RankEntry& a, const RankEntry& b) { return a.index > b.index; });
    out.insert(out.end(), entries.begin(), entries.end());
  }
  return out;
}

std::string to_string(HeatmapMetric m) {
  switch (m) {
    case HeatmapMetric::fuel_g_per_step: return "fuel_g_per_step";
    case HeatmapMetric::soc_delta: return "soc_delta";
    case HeatmapMetric::equivalent_g_per_step: return "equivalent_g_per_step";
  }
  return "?";
}

double metric_of(const RunRecord& r, HeatmapMetric metric, double s) {
  const auto steps = static_cast<double>(std::max<std::size_t>(1, r.final_eval.summary.length));
  switch (metric) {
    case HeatmapMetric::fuel_g_per_step: return r.fuel_g() / steps;
    case HeatmapMetric::soc_delta: return r.delta_soc();
    case HeatmapMetric::equivalent_g_per_step:
      return (r.fuel_g() + s * r.alpha_per_unit_s * r.delta_soc()) / steps;
  }
  return 0.0;
}

Heatmap energy_cost_heatmap(const std::vector<RunRecord>& records, HeatmapMetric metric, double s,
                            const std::string& row_path, const std::string& col_path) {
  Heatmap h;
  auto find_axis = [](const RunRecord& r, const std::string& path) -> const json* {
    for (const auto& [p, v] : r.axis_values)
      if (p == path) return &v;
    return nullptr;
  };
  auto add_unique = [](std::vector<json>& list, const json& v) {
    if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
  };
  for (const auto& r : records) {
    const json* row = find_axis(r, row_path);
    const json* col = find_axis(r, col_path);
    if (!row || !col) throw MissingCell("record " + r.id + " lacks " + row_path + " or " + col_path);
    add_unique(h.rows, *row);
    add_unique(h.cols, *col);
  }
  auto less = [](const json& a, const json& b) { return a < b; };
  std::sort(h.rows.begin(), h.rows.end(), less);
  std::sort(h.cols.begin(), h.cols.end(), less);
  std::vector<std::vector<double>> sum(h.rows.size(), std::vector<double>(h.cols.size(), 0.0));
  std::vector<std::vector<std::size_t>> count(h.rows.size(), std::vector<std::size_t>(h.cols.size(), 0));
  for (const auto& r : records) {
    if (!r.ok) continue;
    const auto i = std::find(h.rows.begin(), h.rows.end(), *find_axis(r, row_path)) - h.rows.begin();
    const auto j = std::find(h.cols.begin(), h.cols.end(), *find_axis(r, col_path)) - h.cols.begin();
    sum[i][j] += metric_of(r, metric, s);
    ++count[i][j];
  }
  h.cells = sum;
  for (std::size_t i = 0; i < h.rows.size(); ++i)
    for (std::size_t j = 0; j < h.cols.size(); ++j) {
      if (count[i][j] == 0)
        throw MissingCell("no successful run for " + row_path + "=" + value_text(h.rows[i]) + ", " +
                          col_path + "=" + value_text(h.cols[j]));
      h.cells[i][j] = sum[i][j] / static_cast<double>(count[i][j]);
    }
  return h;
}

UpdateDensity qtable_update_density(const rl::QTable& q) {
  UpdateDensity d;
  auto counts = q.visit_counts();
  if (counts.empty()) return d;
  std::size_t zeros = 0;
  for (auto c : counts) {
    d.total += c;
    zeros += c == 0 ? 1 : 0;
  }
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(counts.size());
  auto pct = [&](double p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p * n));
    return static_cast<double>(counts[std::clamp<std::size_t>(rank, 1, counts.size()) - 1]);
  };
  d.mean = static_cast<double>(d.total) / n;
  d.p50 = pct(0.50);
  d.p90 = pct(0.90);
  d.p99 = pct(0.99);
  d.max = counts.back();
  d.zero_fraction = static_cast<double>(zeros) / n;
  return d;
}

// ---------------------------------------------------------------------------
// persistence and export

void save_qtable(const RunRecord& record, const fs::path& csv_path) {
  std::string s = "state_index,action_index,q,visits\n";
  const auto& q = record.q;
  for (std::size_t st = 0; st < q.states(); ++st)
    for (std::size_t a = 0; a < q.actions(); ++a)
      s += std::to_string(st) + ',' + std::to_string(a) + ',' + csv::fmt(q.q(st, a)) + ',' +
           std::to_string(q.visits(st, a)) + '\n';
  write_file(csv_path, s);
  json side = {{"states", q.states()},
               {"actions", q.actions()},
               {"grids", record.grids},
               {"config_hash", record.config_hash},
               {"seed", record.seed}};
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_file(sidecar, side.dump(2) + '\n');
}

rl::QTable load_qtable(const fs::path& csv_path, std::size_t states, std::size_t actions) {
  const auto rows = csv::read(csv_path);
  const std::string where = csv_path.string();
  if (rows.empty() || rows[0].fields != std::vector<std::string>{"state_index", "action_index", "q", "visits"})
    throw DataFileError(where, "expected header state_index,action_index,q,visits");
  rl::QTable q(states, actions);
  std::vector<char> seen(states * actions, 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const std::string at = "line " + std::to_string(rows[i].line);
    if (f.size() != 4) throw DataFileError(where, at + ": expected 4 fields");
    const auto s = csv::to_double(f[0]), a = csv::to_double(f[1]), v = csv::to_double(f[2]),
               n = csv::to_double(f[3]);
    if (!s || !a || !v || !n || *s < 0 || *a < 0 || *n < 0 || !std::isfinite(*v))
      throw DataFileError(where, at + ": malformed row");
    const auto si = static_cast<std::size_t>(*s), ai = static_cast<std::size_t>(*a);
    if (si >= states || ai >= actions)
      throw DataFileError(where, at + ": index outside a " + std::to_string(states) + "x" +
                                     std::to_string(actions) + " table");
    q.q(si, ai) = *v;
    q.visit_counts()[q.cell(si, ai)] = static_cast<std::uint64_t>(*n);
    seen[q.cell(si, ai)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw DataFileError(where, "table does not cover every state-action cell");
  return q;
}

void write_curve(const rl::LearningCurve& curve, const fs::path& path) {
  std::string s = "episode,reward_sum,fuel_g,delta_soc,length,terminated\n";
  for (const auto& p : curve)
    s += std::to_string(p.episode) + ',' + csv::fmt(p.reward_sum) + ',' + csv::fmt(p.fuel_g) + ',' +
         csv::fmt(p.delta_soc) + ',' + std::to_string(p.length) + ',' + (p.terminated ? "1" : "0") + '\n';
  write_file(path, s);
}

void write_soc_trajectory(const rl::EpisodeTrace& trace, double dt, const fs::path& path) {
  std::string s = "step,time_s,soc,action_index\n";
  for (std::size_t k = 0; k < trace.soc.size(); ++k) {
    s += std::to_string(k) + ',' + csv::fmt(static_cast<double>(k) * dt) + ',' + csv::fmt(trace.soc[k]) + ',';
    if (k < trace.actions.size()) s += std::to_string(trace.actions[k]);
    s += '\n';
  }
  write_file(path, s);
}

void write_operating_points(const rl::EpisodeTrace& trace, const fs::path& path) {
  std::string s =
      "step,gear,source_load,source_speed_rad_s,source_efficiency,motor_torque_Nm,motor_speed_rad_s,"
      "motor_efficiency,fuel_g,delta_soc,battery_current_A,battery_power_W,clamped\n";
  for (std::size_t k = 0; k < trace.points.size(); ++k) {
    const auto& p = trace.points[k];
    s += std::to_string(k) + ',' + std::to_string(p.gear) + ',' + csv::fmt(p.source_point.load) + ',' +
         csv::fmt(p.source_point.speed) + ',' + csv::fmt(p.source_point.efficiency) + ',' +
         csv::fmt(p.motor_point.load) + ',' + csv::fmt(p.motor_point.speed) + ',' +
         csv::fmt(p.motor_point.efficiency) + ',' + csv::fmt(p.fuel_g) + ',' + csv::fmt(p.delta_soc) + ',' +
         csv::fmt(p.battery_current) + ',' + csv::fmt(p.battery_power) + ',' + (p.clamped ? "1" : "0") + '\n';
  }
  write_file(path, s);
}

namespace {

json density_json(const UpdateDensity& d) {
  return {{"mean", d.mean}, {"p50", d.p50},   {"p90", d.p90},
          {"p99", d.p99},   {"max", d.max},   {"total", d.total}, {"zero_fraction", d.zero_fraction}};
}

json record_json(const RunRecord& r) {
  json j = {{"id", r.id},
            {"index", r.index},
            {"rep", r.rep},
            {"seed", r.seed},
            {"config_hash", r.config_hash},
            {"status", r.ok ? "ok" : "failed"},
            {"config", r.config}};
  json axes = json::object();
  for (const auto& [p, v] : r.axis_values) axes[p] = v;
  j["axis_values"] = axes;
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["final_evaluation"] = {{"fuel_g", r.fuel_g()},
                           {"delta_soc", r.delta_soc()},
                           {"soc_start", r.final_eval.soc_start},
                           {"soc_end", r.final_eval.soc_end},
                           {"steps", r.final_eval.summary.length},
                           {"reward_sum", r.final_eval.summary.reward_sum},
                           {"terminated", r.final_eval.summary.terminated}};
  j["baseline_reward"] = r.baseline_reward;
  j["label"] = r.label ? json(static_cast<int>(*r.label)) : json(nullptr);
  j["update_density"] = density_json(qtable_update_density(r.q));
  return j;
}

}  // namespace

void export_report(const std::vector<RunRecord>& records, const SweepSpec& spec, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  json manifest = {{"tool_version", kToolVersion},
                   {"master_seed", spec.master_seed},
                   {"repetitions", spec.repetitions},
                   {"run_count", records.size()},
                   {"heatmap_equivalence_factor", spec.heatmap_equivalence_factor},
                   {"availability_thresholds",
                    {{"window", spec.thresholds.window},
                     {"awful_ratio", spec.thresholds.awful_ratio},
                     {"valuable_completion", spec.thresholds.valuable_completion},
                     {"awful_termination", spec.thresholds.awful_termination}}}};
  json axes = json::array();
  for (const auto& a : spec.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  manifest["axes"] = axes;

  // data file hashes keyed by the path as written in the config
  json data_files = json::object();
  {
    std::map<std::string, fs::path> files;
    for (const auto& r : records) {
      const auto& v = r.config.at("vehicle");
      for (const char* k : {"engine_map", "engine_limits", "motor_map", "motor_limits", "battery",
                            "fc_power_current", "fc_current_efficiency"})
        if (v.contains(k) && v[k].is_string()) {
          const fs::path p(v[k].get<std::string>());
          files.emplace(p.string(), p.is_absolute() ? p : spec.base_dir / p);
        }
      const auto& c = r.config.at("cycle").at("path");
      if (c.is_string()) {
        const fs::path p(c.get<std::string>());
        files.emplace(p.string(), p.is_absolute() ? p : spec.base_dir / p);
      }
    }
    for (const auto& [name, path] : files) {
      try {
        data_files[name] = git_blob_hash(path);
      } catch (const DataFileError&) {
        data_files[name] = nullptr;
      }
    }
  }
  manifest["data_files"] = data_files;

  json runs = json::array();
  std::size_t failed = 0;
  for (const auto& r : records) {
    json e = {{"id", r.id}, {"index", r.index}, {"rep", r.rep}, {"seed", r.seed},
              {"config_hash", r.config_hash}, {"status", r.ok ? "ok" : "failed"}};
    if (!r.ok) {
      e["error"] = r.error;
      ++failed;
    }
    runs.push_back(std::move(e));
  }
  manifest["failed_count"] = failed;
  manifest["runs"] = runs;

  if (!records.empty()) {
    // per-run files
    for (const auto& r : records) {
      const fs::path dir = out_dir / "runs" / r.id;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      write_file(dir / "record.json", record_json(r).dump(2) + '\n');
      if (!r.ok) continue;
      write_curve(r.curve, dir / "curve.csv");
      write_soc_trajectory(r.final_eval, r.dt, dir / "soc_trajectory.csv");
      write_operating_points(r.final_eval, dir / "operating_points.csv");
      save_qtable(r, dir / "qtable.csv");
    }

    // summary
    std::string s = "run_id,index,rep,seed,config_hash";
    for (const auto& a : spec.axes) s += ',' + a.path;
    s += ",status,fuel_g,delta_soc,soc_start,soc_end,steps,terminated,final_reward,baseline_reward,label\n";
    for (const auto& r : records) {
      s += r.id + ',' + std::to_string(r.index) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.seed) +
           ',' + r.config_hash;
      for (const auto& a : spec.axes) {
        s += ',';
        for (const auto& [p, v] : r.axis_values)
          if (p == a.path) s += value_text(v);
      }
      if (!r.ok) {
        s += ",failed,,,,,,,,,\n";
        continue;
      }
      const auto& ev = r.final_eval;
      s += ",ok," + csv::fmt(r.fuel_g()) + ',' + csv::fmt(r.delta_soc()) + ',' + csv::fmt(ev.soc_start) + ',' +
           csv::fmt(ev.soc_end) + ',' + std::to_string(ev.summary.length) + ',' +
           (ev.summary.terminated ? "1" : "0") + ',' + csv::fmt(ev.summary.reward_sum) + ',' +
           csv::fmt(r.baseline_reward) + ',' + (r.label ? std::to_string(static_cast<int>(*r.label)) : "") +
           '\n';
    }
    write_file(out_dir / "summary.csv", s);

    // availability ranking
    if (!spec.axes.empty()) {
      std::string a = "parameter,value,mean_index,count\n";
      for (const auto& e : availability_ranking(records, spec.axes))
        a += e.parameter + ',' + value_text(e.value) + ',' + csv::fmt(e.index) + ',' + std::to_string(e.count) +
             '\n';
      write_file(out_dir / "availability.csv", a);
    }

    // heatmaps when the sweep spans both grid axes
    auto has_axis = [&](const char* p) {
      return std::any_of(spec.axes.begin(), spec.axes.end(), [&](const Axis& a) { return a.path == p; });
    };
    if (has_axis("env.state_grid") && has_axis("env.action_grid")) {
      json heatmap_errors = json::object();
      for (auto m : {HeatmapMetric::fuel_g_per_step, HeatmapMetric::soc_delta,
                     HeatmapMetric::equivalent_g_per_step}) {
        try {
          const auto h = energy_cost_heatmap(records, m, spec.heatmap_equivalence_factor);
          std::string t = "state_grid\\action_grid";
          for (const auto& c : h.cols) t += ',' + value_text(c);
          t += '\n';
          for (std::size_t i = 0; i < h.rows.size(); ++i) {
            t += value_text(h.rows[i]);
            for (double v : h.cells[i]) t += ',' + csv::fmt(v);
            t += '\n';
          }
          write_file(out_dir / ("heatmap_" + to_string(m) + ".csv"), t);
        } catch (const MissingCell& e) {
          heatmap_errors[to_string(m)] = e.what();
        }
      }
      if (!heatmap_errors.empty()) manifest["heatmap_errors"] = heatmap_errors;
    }
  }
  write_file(out_dir / "manifest.json", manifest.dump(2) + '\n');
}

}  // namespace emsrl::exp

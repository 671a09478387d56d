#include "emsrl/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include "emsrl/config.hpp"
#include "emsrl/csv.hpp"
#include "emsrl/error.hpp"
#include "emsrl/exp.hpp"
#include "emsrl/oracle.hpp"
#include "emsrl/reference.hpp"

namespace emsrl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

fs::path out_root() {
  const char* root = std::getenv("EMSRL_OUT_ROOT");
  return root && *root ? fs::path(root) : fs::path("out");
}

// --out wins, then output.dir from the config (under EMSRL_OUT_ROOT when
// relative and the variable is set), then <root>/<config stem>.
fs::path output_dir(const Common& c, const std::string& config_dir) {
  if (!c.out.empty()) return c.out;
  if (!config_dir.empty()) {
    const fs::path p(config_dir);
    const char* root = std::getenv("EMSRL_OUT_ROOT");
    return p.is_absolute() || !root || !*root ? p : fs::path(root) / p;
  }
  return out_root() / fs::path(c.config).stem();
}

config::RunConfig load_config(const Common& c) {
  json raw = config::read_json(c.config);
  if (c.seed) config::set_path(raw, "algorithm.seed", *c.seed);
  return config::parse_run_config(raw, fs::path(c.config).parent_path());
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f || !(f << s)) throw IoError("cannot write " + p.string());
}

int cmd_simulate(const Common& c, std::optional<double> action, const std::string& qtable_path,
                 std::ostream& out) {
  if (action.has_value() == !qtable_path.empty())
    throw ConfigError("--action/--qtable", "give exactly one policy");
  const auto cfg = load_config(c);
  const auto inputs = config::build_inputs(cfg);
  auto env = config::make_environment(cfg, inputs);
  const double start = cfg.hyper.start_soc;

  rl::EpisodeTrace trace;
  std::string policy;
  if (action) {
    const auto& g = env->action_spec().grid;
    if (!(*action >= g.lo() && *action <= g.hi()))
      throw ConfigError("--action", "must lie in [" + csv::fmt(g.lo()) + ", " + csv::fmt(g.hi()) + "]");
    policy = "fixed:" + csv::fmt(*action);
    env->reset(start);
    trace.soc_start = start;
    trace.soc.push_back(start);
    while (!env->done()) {
      const auto t = env->step_command(*action);
      trace.summary.reward_sum += t.reward;
      trace.summary.fuel_g += t.info.fuel_g;
      ++trace.summary.length;
      trace.soc.push_back(t.soc_after);
      trace.actions.push_back(t.action);
      trace.points.push_back(t.info);
      trace.summary.terminated = t.terminated;
      trace.soc_end = t.soc_after;
    }
    trace.summary.delta_soc = trace.soc_start - trace.soc_end;
  } else {
    fs::path sidecar(qtable_path);
    sidecar.replace_extension(".json");
    const json side = config::read_json(sidecar);
    if (!side.contains("grids") || side["grids"] != exp::grids_of(*env))
      throw DataFileError(sidecar.string(), "Q-table grids do not match the configured environment");
    const auto q = exp::load_qtable(qtable_path, env->state_count(), env->action_count());
    policy = "qtable:" + qtable_path;
    auto rng = rl::evaluation_rng(cfg.hyper.seed);
    trace = rl::rollout(*env, q, start, 0.0, rng, true, true);
  }

  const fs::path dir = output_dir(c, cfg.output_dir);
  fs::create_directories(dir);
  exp::write_soc_trajectory(trace, inputs.cycle->dt(), dir / "soc_trajectory.csv");
  exp::write_operating_points(trace, dir / "operating_points.csv");
  const json summary = {{"policy", policy},
                        {"fuel_g", trace.summary.fuel_g},
                        {"soc_start", trace.soc_start},
                        {"soc_end", trace.soc_end},
                        {"delta_soc", trace.soc_start - trace.soc_end},
                        {"steps", trace.summary.length},
                        {"reward_sum", trace.summary.reward_sum},
                        {"terminated", trace.summary.terminated}};
  write_text(dir / "simulation.json", summary.dump(2) + '\n');
  out << "fuel_g=" << csv::fmt(trace.summary.fuel_g) << " delta_soc=" << csv::fmt(trace.soc_start - trace.soc_end)
      << " steps=" << trace.summary.length << (trace.summary.terminated ? " terminated" : "") << '\n'
      << "wrote " << dir.string() << '\n';
  return kOk;
}

int cmd_train(const Common& c, std::ostream& out) {
  const auto cfg = load_config(c);
  auto r = exp::run_single(cfg);
  r.id = "run_0000";
  if (!r.curve.empty()) r.label = exp::classify_availability(r.curve, r.baseline_reward);
  exp::SweepSpec spec;
  spec.base_dir = cfg.base_dir;
  spec.master_seed = cfg.hyper.seed;
  const fs::path dir = output_dir(c, cfg.output_dir);
  exp::export_report({r}, spec, dir);
  out << "algorithm=" << rl::to_string(cfg.algorithm)
      << " episodes=" << cfg.hyper.episodes << " fuel_g=" << csv::fmt(r.fuel_g())
      << " delta_soc=" << csv::fmt(r.delta_soc()) << " seconds=" << r.wall_seconds << '\n'
      << "wrote " << dir.string() << '\n';
  return kOk;
}

int cmd_sweep(const Common& c, std::size_t workers, bool dry_run, std::ostream& out) {
  auto spec = exp::load_sweep_spec(c.config);
  if (c.seed) spec.master_seed = *c.seed;
  const auto plans = exp::enumerate(spec);
  if (dry_run) {
    for (const auto& p : plans) config::parse_run_config(p.config, spec.base_dir);
    out << "runs=" << plans.size() << '\n';
    for (const auto& p : plans) {
      out << p.index << " rep=" << p.rep << " seed=" << p.seed;
      for (const auto& [k, v] : p.axis_values) out << ' ' << k << '=' << v.dump();
      out << '\n';
    }
    return kOk;
  }
  std::size_t done = 0;
  const auto records = exp::run_sweep(spec, workers, [&](const exp::RunRecord& r) {
    ++done;
    out << '[' << done << '/' << plans.size() << "] " << r.id << (r.ok ? " ok" : " failed: " + r.error) << '\n';
  });
  std::string out_dir;
  if (spec.base.contains("output") && spec.base["output"].contains("dir") && spec.base["output"]["dir"].is_string())
    out_dir = spec.base["output"]["dir"].get<std::string>();
  const fs::path dir = output_dir(c, out_dir);
  exp::export_report(records, spec, dir);
  std::size_t ok = 0;
  for (const auto& r : records) ok += r.ok ? 1 : 0;
  out << "succeeded=" << ok << " failed=" << records.size() - ok << "\nwrote " << dir.string() << '\n';
  return ok > 0 || records.empty() ? kOk : kFailure;
}

int cmd_oracle_check(double td_sign, std::ostream& out) {
  bool all = true;
  for (const auto& r : oracle::run_fixture_checks(td_sign)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << r.residual << " tol=" << r.tolerance
        << '\n';
    all = all && r.passed;
  }
  return all ? kOk : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tabular reinforcement learning for hybrid vehicle energy management"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool seed) {
    sub->add_option("--config", common.config, "Run or sweep config (JSON)")->required();
    sub->add_option("--out", common.out, "Output directory");
    if (seed) sub->add_option("--seed", common.seed, "Seed override");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one evaluation episode with a fixed policy");
  add_common(simulate, true);
  std::optional<double> action;
  std::string qtable;
  simulate->add_option("--action", action, "Constant command: split fraction (PHEV) or fuel-cell watts (FCEV)");
  simulate->add_option("--qtable", qtable, "Greedy policy from a saved qtable.csv");

  auto* train = app.add_subcommand("train", "Train one configuration and export its record");
  add_common(train, true);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep, true);
  std::size_t workers = 1;
  bool dry_run = false;
  sweep->add_option("--workers", workers, "Parallel runs")->check(CLI::Range(1, 256));
  sweep->add_flag("--dry-run", dry_run, "Validate and list the planned runs only");

  auto* oracle_check = app.add_subcommand("oracle-check", "Check the learners against exact solutions");
  double td_sign = 1.0;
  oracle_check->add_option("--td-sign", td_sign, "Multiplier on every TD error (fault injection)");

  auto* gen = app.add_subcommand("gen-data", "Write the reference component tables");
  std::string gen_out = "data";
  gen->add_option("--out", gen_out, "Target directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(common, action, qtable, out);
    if (*train) return cmd_train(common, out);
    if (*sweep) return cmd_sweep(common, workers, dry_run, out);
    if (*oracle_check) return cmd_oracle_check(td_sign, out);
    if (*gen) {
      reference::write_reference_data(gen_out);
      out << "wrote " << gen_out << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataFileError& e) {
    err << "data file error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace emsrl::cli

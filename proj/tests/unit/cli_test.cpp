#include "emsrl/cli.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>

#include "test_util.hpp"

namespace emsrl::cli {
namespace {

using nlohmann::json;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "emsrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Smoke config with data paths made absolute, patched by `patch`.
std::filesystem::path write_config(const TempDir& dir, const json& patch, const std::string& name = "cfg.json") {
  json cfg = json::parse(read_file(testing::source_dir() / "configs" / "smoke_phev.json"));
  const auto data = testing::source_dir() / "data";
  for (auto& [key, value] : cfg["vehicle"].items())
    if (value.is_string() && key != "kind")
      value = (data / std::filesystem::path(value.get<std::string>()).filename()).string();
  cfg["cycle"]["path"] = (data / "wltc_class3b.csv").string();
  cfg.merge_patch(patch);
  write_file(dir / name, cfg.dump(2));
  return dir / name;
}

TEST(Cli, MissingMapExitsThreeNamingPath) {
  TempDir dir;
  const auto cfg = write_config(dir, {{"vehicle", {{"engine_map", "/nonexistent/engine_map.csv"}}}});
  const auto r = invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("/nonexistent/engine_map.csv"), std::string::npos) << r.err;
}

TEST(Cli, SarsaLambdaWithoutLambdaExitsTwo) {
  TempDir dir;
  const auto cfg = write_config(dir, {{"algorithm", {{"name", "sarsa_lambda"}}}});
  const auto r = invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("lambda"), std::string::npos) << r.err;
}

TEST(Cli, UnknownKeyExitsTwo) {
  TempDir dir;
  const auto cfg = write_config(dir, {{"algorithm", {{"alpah", 0.1}}}});
  EXPECT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()}).code, 2);
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"train"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
}

TEST(Cli, ZeroSpeedCycleWithoutEngineBurnsNoFuel) {
  TempDir dir;
  std::string cycle = "time_s,speed\n";
  for (int t = 0; t < 30; ++t) cycle += std::to_string(t) + ",0\n";
  write_file(dir / "still.csv", cycle);
  const auto cfg = write_config(dir, {{"cycle", {{"path", (dir / "still.csv").string()}}}});
  const auto r = invoke({"simulate", "--config", cfg.string(), "--action", "0", "--out", (dir / "sim").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sim = json::parse(read_file(dir / "sim" / "simulation.json"));
  EXPECT_EQ(sim["fuel_g"].get<double>(), 0.0);
  EXPECT_EQ(sim["steps"].get<int>(), 30);
  EXPECT_TRUE(std::filesystem::exists(dir / "sim" / "soc_trajectory.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "sim" / "operating_points.csv"));
}

TEST(Cli, SavedQTableReplaysRecordedTrajectory) {
  TempDir dir;
  const auto cfg = write_config(dir, json::object());
  const auto train = invoke({"train", "--config", cfg.string(), "--out", (dir / "train").string()});
  ASSERT_EQ(train.code, 0) << train.err;
  const auto run_dir = dir / "train" / "runs" / "run_0000";
  const auto sim = invoke({"simulate", "--config", cfg.string(), "--qtable", (run_dir / "qtable.csv").string(),
                           "--out", (dir / "sim").string()});
  ASSERT_EQ(sim.code, 0) << sim.err;
  EXPECT_EQ(read_file(dir / "sim" / "soc_trajectory.csv"), read_file(run_dir / "soc_trajectory.csv"));
}

TEST(Cli, QTableGridMismatchExitsThree) {
  TempDir dir;
  const auto cfg = write_config(dir, json::object());
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "train").string()}).code, 0);
  const auto other = write_config(dir, {{"env", {{"action_grid", 5}}}}, "other.json");
  const auto r = invoke({"simulate", "--config", other.string(), "--qtable",
                         (dir / "train" / "runs" / "run_0000" / "qtable.csv").string(), "--out",
                         (dir / "sim").string()});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, SmokeTrainUnderTenSeconds) {
  TempDir dir;
  const auto cfg = write_config(dir, json::object());
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = invoke({"train", "--config", cfg.string(), "--out", (dir / "out").string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(secs, 10.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "summary.csv"));
}

TEST(Cli, SameConfigSameOutputs) {
  TempDir dir;
  const auto cfg = write_config(dir, {{"algorithm", {{"episodes", 4}, {"eval_every", 2}}}});
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "b").string()}).code, 0);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir / "a");
    EXPECT_EQ(read_file(e.path()), read_file(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 5u);
}

TEST(Cli, SeedOverrideChangesRecord) {
  TempDir dir;
  const auto cfg = write_config(dir, {{"algorithm", {{"episodes", 3}, {"eval_every", 1}}}});
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--seed", "43", "--out", (dir / "b").string()}).code, 0);
  const auto a = json::parse(read_file(dir / "a" / "runs" / "run_0000" / "record.json"));
  const auto b = json::parse(read_file(dir / "b" / "runs" / "run_0000" / "record.json"));
  EXPECT_NE(a["seed"], b["seed"]);
}

TEST(Cli, DryRunListsGridPreset) {
  const auto r = invoke({"sweep", "--config", (testing::source_dir() / "configs" / "table3_phev.json").string(),
                         "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("runs=162\n", 0), 0u);
}

TEST(Cli, OracleCheckPassesAndDetectsSignFault) {
  const auto ok = invoke({"oracle-check"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(invoke({"oracle-check", "--td-sign", "-1"}).code, 1);
}

TEST(Cli, GenDataWritesTables) {
  TempDir dir;
  const auto r = invoke({"gen-data", "--out", (dir / "data").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"phev_engine_map.csv", "phev_motor_limits.csv", "fcev_battery.csv",
                        "fcev_fc_current_efficiency.csv"})
    EXPECT_EQ(read_file(dir / "data" / f), read_file(testing::source_dir() / "data" / f)) << f;
}

}  // namespace
}  // namespace emsrl::cli

#include "emsrl/env.hpp"

#include <gtest/gtest.h>

#include <memory>

#include "emsrl/error.hpp"
#include "emsrl/reference.hpp"

namespace emsrl::env {
namespace {

std::shared_ptr<const Plant> phev_plant() {
  powertrain::PhevPlant p;
  p.vehicle = reference::phev_vehicle();
  p.engine = reference::phev_engine_map();
  p.motor = reference::phev_motor_map();
  p.battery = reference::phev_battery();
  p.engine_speed = reference::phev_engine_speed_bounds();
  return std::make_shared<const Plant>(std::move(p));
}

std::shared_ptr<const cycle::DriveCycle> make_cycle(std::vector<double> v) {
  return std::make_shared<const cycle::DriveCycle>("test", 1.0, std::move(v));
}

EmsEnvironment make_env(std::vector<double> speeds, EnvSettings s = {}) {
  s.reward.v_bat = 350.0;
  s.reward.capacity_ah = reference::kPhevBatteryCapacity;
  return EmsEnvironment(phev_plant(), make_cycle(std::move(speeds)), s);
}

TEST(Discretize, Examples) {
  const Grid g(0.0, 1.0, 11);
  EXPECT_EQ(discretize(g, 0.0), 0u);
  EXPECT_EQ(discretize(g, 0.26), 3u);
  EXPECT_EQ(discretize(g, 5.0), 10u);
  EXPECT_EQ(discretize(g, -3.0), 0u);
}

TEST(Discretize, MidpointRoundsLow) {
  const Grid g(0.0, 1.0, 11);
  EXPECT_EQ(discretize(g, 0.25), 2u);
  const Grid h(0.0, 4.0, 5);
  EXPECT_EQ(discretize(h, 0.5), 0u);
  EXPECT_EQ(discretize(h, 2.5), 2u);
}

TEST(Grid, PointsAndValidation) {
  const Grid g(-1.0, 1.0, 5);
  EXPECT_EQ(g.point(0), -1.0);
  EXPECT_EQ(g.point(2), 0.0);
  EXPECT_EQ(g.point(4), 1.0);
  EXPECT_THROW(Grid(1.0, 1.0, 3), std::invalid_argument);
  EXPECT_THROW(Grid(0.0, 1.0, 1), std::invalid_argument);
}

TEST(EquivalenceFactor, Examples) {
  EXPECT_EQ(equivalence_factor(0.0, 350.0, 20.8, 42600.0), 0.0);
  EXPECT_NEAR(equivalence_factor(1.0, 350.0, 20.8, 42600.0), 615.2112676, 1e-6);
  EXPECT_DOUBLE_EQ(equivalence_factor(2.0, 350.0, 20.8, 42600.0),
                   2.0 * equivalence_factor(1.0, 350.0, 20.8, 42600.0));
}

TEST(RewardOf, FuelMin) {
  RewardSpec spec;
  powertrain::StepOutcome o;
  EXPECT_EQ(reward_of(spec, o, 0.6, 0.59, 0.65), 1.0);
  o.fuel_g = 0.4;
  EXPECT_DOUBLE_EQ(reward_of(spec, o, 0.6, 0.59, 0.65), 0.6);
}

TEST(RewardOf, EqInstantWithZeroFactorIsFuelMin) {
  RewardSpec fuel;
  RewardSpec eq = fuel;
  eq.kind = RewardKind::eq_instant;
  eq.equivalence_factor = 0.0;
  powertrain::StepOutcome o;
  o.fuel_g = 0.37;
  for (double next : {0.2, 0.5, 0.9})
    EXPECT_EQ(reward_of(eq, o, 0.6, next, 0.65), reward_of(fuel, o, 0.6, next, 0.65));
}

TEST(RewardOf, EqInstantChargesSocDrop) {
  RewardSpec eq;
  eq.kind = RewardKind::eq_instant;
  eq.equivalence_factor = 2.0;
  powertrain::StepOutcome o;
  o.fuel_g = 0.1;
  EXPECT_NEAR(reward_of(eq, o, 0.6, 0.59, 0.65), 1.0 - (0.1 + eq.alpha() * 0.01), 1e-12);
}

TEST(RewardOf, EqOverallNoDriftIsFuelOnly) {
  RewardSpec eq;
  eq.kind = RewardKind::eq_overall;
  eq.equivalence_factor = 500.0;
  powertrain::StepOutcome o;
  o.fuel_g = 0.25;
  EXPECT_DOUBLE_EQ(reward_of(eq, o, 0.6, 0.65, 0.65), 0.75);
  EXPECT_NEAR(reward_of(eq, o, 0.6, 0.55, 0.65), 0.75 - eq.alpha() * 0.01, 1e-9);
}

TEST(Penalty, Branches) {
  ConstraintSpec c;
  c.soc_min = 0.3;
  c.soc_max = 0.85;
  c.w_chg = 100.0;
  c.w_dis = 100.0;
  EXPECT_EQ(penalty(c, 0.5), 0.0);
  EXPECT_EQ(penalty(c, 0.3), 0.0);
  EXPECT_EQ(penalty(c, 0.85), 0.0);
  EXPECT_NEAR(penalty(c, 0.25), -5.0, 1e-12);
  EXPECT_NEAR(penalty(c, 0.9), -5.0, 1e-12);
  EXPECT_LT(penalty(c, 0.2999999), 0.0);
}

TEST(Environment, ResetEncodesStartSoc) {
  EnvSettings s;
  s.soc_grid_lo = 0.0;
  s.soc_grid_hi = 1.0;
  s.soc_points = 11;
  auto env = make_env({0.0, 5.0, 10.0}, s);
  const auto a = env.reset(0.65);
  EXPECT_EQ(a, env.state_spec().encode(discretize(env.state_spec().pdem, env.demands()[0].power), 6));
  EXPECT_EQ(env.reset(0.65), a);
  EXPECT_EQ(env.reset(0.0) % 11, 0u);
}

TEST(Environment, ZeroSpeedCycleZeroCommand) {
  auto env = make_env({0.0, 0.0, 0.0, 0.0});
  env.reset(0.6);
  const auto t = env.step(0);
  EXPECT_EQ(t.reward, 1.0);
  EXPECT_EQ(t.info.delta_soc, 0.0);
  EXPECT_EQ(t.info.fuel_g, 0.0);
}

TEST(Environment, EpisodeEndsAtCycleEnd) {
  auto env = make_env({0.0, 0.0, 0.0});
  env.reset(0.6);
  EXPECT_FALSE(env.step(3).done);
  EXPECT_FALSE(env.step(3).done);
  const auto last = env.step(3);
  EXPECT_TRUE(last.done);
  EXPECT_FALSE(last.terminated);
  EXPECT_THROW(env.step(3), EpisodeFinished);
}

TEST(Environment, ViolationTerminatesWithPenalty) {
  std::vector<double> speeds(50, 15.0);
  auto env = make_env(speeds);
  env.reset(env.constraints().soc_min + 1e-5);
  std::size_t steps = 0;
  env::Transition t;
  do {
    t = env.step_command(0.0);
    ++steps;
  } while (!t.done);
  EXPECT_LT(steps, speeds.size());
  EXPECT_TRUE(t.terminated);
  EXPECT_LT(t.soc_after, env.constraints().soc_min);
  const double pen = penalty(env.constraints(), t.soc_after);
  EXPECT_LT(pen, 0.0);
  EXPECT_DOUBLE_EQ(t.reward, 1.0 - t.info.fuel_g + pen);
}

TEST(Environment, NoTerminationWhenDisabled) {
  EnvSettings s;
  s.constraints.terminate_on_violation = false;
  std::vector<double> speeds(50, 15.0);
  auto env = make_env(speeds, s);
  env.reset(s.constraints.soc_min + 1e-5);
  std::size_t steps = 0;
  env::Transition t;
  do {
    t = env.step_command(0.0);
    ++steps;
  } while (!t.done);
  EXPECT_EQ(steps, speeds.size());
}

TEST(Environment, Deterministic) {
  const std::vector<double> speeds{0.0, 3.0, 6.0, 9.0, 9.0, 6.0, 2.0, 0.0};
  auto a = make_env(speeds);
  auto b = make_env(speeds);
  a.reset(0.6);
  b.reset(0.6);
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    const auto ta = a.step(k % 11);
    const auto tb = b.step(k % 11);
    EXPECT_EQ(ta.state, tb.state);
    EXPECT_EQ(ta.next_state, tb.next_state);
    EXPECT_EQ(ta.reward, tb.reward);
    EXPECT_EQ(ta.soc_after, tb.soc_after);
  }
}

TEST(Environment, ActionOutOfRange) {
  auto env = make_env({0.0, 0.0});
  env.reset(0.6);
  EXPECT_THROW(env.step(11), IndexOutOfRange);
}

}  // namespace
}  // namespace emsrl::env

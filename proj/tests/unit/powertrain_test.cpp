#include "emsrl/powertrain.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "emsrl/env.hpp"
#include "emsrl/error.hpp"
#include "emsrl/reference.hpp"
#include "test_util.hpp"

namespace emsrl::powertrain {
namespace {

using testing::TempDir;
using testing::write_file;

VehicleParams test_vehicle() {
  VehicleParams p;
  p.mass = 1200.0;
  p.air_density = 1.2;
  p.drag_coeff = 0.3;
  p.frontal_area = 2.2;
  p.roll_coeff = 0.012;
  p.gravity = 9.81;
  return p;
}

// Two-by-two grid: efficiency 0.2 on the low torque row, 0.4 on the high one.
TorqueSpeedMap small_map() {
  return TorqueSpeedMap({0.0, 100.0}, {0.0, 50.0}, {0.2, 0.2, 0.4, 0.4}, {0.0, 100.0},
                        {-10.0, -20.0}, {100.0, 200.0});
}

TorqueSpeedMap constant_engine(double eta) {
  return TorqueSpeedMap({0.0, 1000.0}, {0.0, 200.0}, {eta, eta, eta, eta}, {0.0, 1000.0},
                        {0.0, 0.0}, {200.0, 200.0});
}

TEST(RoadLoad, Standstill) {
  const auto d = road_load(test_vehicle(), 0.0, 0.0);
  EXPECT_EQ(d.force, 0.0);
  EXPECT_EQ(d.power, 0.0);
}

TEST(RoadLoad, CruiseTerms) {
  const auto f = road_forces(test_vehicle(), 10.0, 0.0);
  EXPECT_NEAR(f.air, 39.6, 1e-9);
  EXPECT_NEAR(f.roll, 141.264, 1e-9);
  EXPECT_EQ(f.gravity, 0.0);
  EXPECT_NEAR(road_load(test_vehicle(), 10.0, 0.0).force, 180.864, 1e-9);
}

TEST(RoadLoad, AccelerationAddsInertia) {
  EXPECT_NEAR(road_load(test_vehicle(), 10.0, 1.0).force, 1380.864, 1e-9);
}

TEST(RoadLoad, WheelQuantitiesConsistent) {
  auto p = test_vehicle();
  p.wheel_radius = 0.32;
  const auto d = road_load(p, 12.0, 0.4);
  EXPECT_NEAR(d.torque, d.force * 0.32, 1e-9);
  EXPECT_NEAR(d.speed, 12.0 / 0.32, 1e-12);
  EXPECT_NEAR(d.power, d.torque * d.speed, 1e-9 * std::abs(d.power));
}

TEST(RoadLoad, GradeAddsGravity) {
  auto p = test_vehicle();
  p.grade = 0.05;
  const auto f = road_forces(p, 10.0, 0.0);
  EXPECT_NEAR(f.gravity, std::sin(0.05) * 1200.0 * 9.81, 1e-9);
  EXPECT_NEAR(f.roll, std::cos(0.05) * 0.012 * 1200.0 * 9.81, 1e-9);
}

TEST(SelectGear, MidRangeUsesTopGear) {
  const auto p = reference::phev_vehicle();
  EXPECT_EQ(select_gear(p, 50.0, reference::phev_engine_speed_bounds()), 4u);
}

TEST(SelectGear, OnlyFirstGearAboveIdle) {
  const auto p = reference::phev_vehicle();
  EXPECT_EQ(select_gear(p, 8.0, reference::phev_engine_speed_bounds()), 0u);
}

TEST(SelectGear, StandstillPicksFirstGear) {
  const auto p = reference::phev_vehicle();
  EXPECT_EQ(select_gear(p, 0.0, reference::phev_engine_speed_bounds()), 0u);
}

TEST(MapLookup, NodeIdentity) {
  const auto m = small_map();
  EXPECT_DOUBLE_EQ(map_lookup(m, 0.0, 0.0), 0.2);
  EXPECT_DOUBLE_EQ(map_lookup(m, 50.0, 100.0), 0.4);
}

TEST(MapLookup, BilinearMidpoint) {
  EXPECT_NEAR(map_lookup(small_map(), 25.0, 50.0), 0.3, 1e-12);
}

TEST(MapLookup, ClampsBeyondAxes) {
  const auto m = small_map();
  EXPECT_DOUBLE_EQ(map_lookup(m, 50.0, 500.0), 0.4);
  EXPECT_DOUBLE_EQ(map_lookup(m, -80.0, -5.0), 0.2);
}

TEST(TorqueLimits, EngineMinimumIsZero) {
  const auto m = reference::phev_engine_map();
  for (double w : {0.0, 100.0, 300.0, 700.0}) EXPECT_EQ(torque_limits(m, w).min, 0.0);
}

TEST(TorqueLimits, NodeAndMidpoint) {
  const auto m = small_map();
  EXPECT_EQ(torque_limits(m, 0.0).max, 100.0);
  EXPECT_EQ(torque_limits(m, 0.0).min, -10.0);
  EXPECT_NEAR(torque_limits(m, 50.0).max, 150.0, 1e-12);
}

TEST(MotorPower, Branches) {
  EXPECT_NEAR(motor_power(100.0, 100.0, 0.9), 11111.111111, 1e-5);
  EXPECT_NEAR(motor_power(-100.0, 100.0, 0.9), -9000.0, 1e-9);
  EXPECT_EQ(motor_power(0.0, 250.0, 0.7), 0.0);
}

TEST(MotorPower, LossDirection) {
  for (double t : {-200.0, -10.0, 10.0, 200.0}) {
    const double p = motor_power(t, 150.0, 0.85);
    // driving draws more than the shaft delivers, regeneration returns less
    if (t >= 0)
      EXPECT_GE(p, t * 150.0);
    else
      EXPECT_LE(std::abs(p), std::abs(t * 150.0));
  }
}

TEST(EngineFuelRate, HandEvaluated) {
  const auto m = constant_engine(0.35);
  EXPECT_EQ(engine_fuel_rate(m, 0.0, 200.0, 42600.0), 0.0);
  EXPECT_NEAR(engine_fuel_rate(m, 100.0, 200.0, 42600.0), 20000.0 / (0.35 * 42600.0), 1e-12);
  EXPECT_NEAR(engine_fuel_rate(m, 100.0, 200.0, 42600.0), 1.3413, 1e-4);
  EXPECT_NEAR(engine_fuel_rate(m, 100.0, 200.0, 85200.0),
              0.5 * engine_fuel_rate(m, 100.0, 200.0, 42600.0), 1e-15);
}

FuelCellCurves flat_fuel_cell() {
  FuelCellCurves c;
  c.power_to_current = Table1D({0.0, 55000.0}, {0.0, 200.0});
  c.current_to_efficiency = Table1D({0.0, 200.0}, {0.5, 0.5});
  c.max_power = 55000.0;
  return c;
}

TEST(FuelCell, HandEvaluatedRate) {
  const auto r = fc_hydrogen_rate(flat_fuel_cell(), 20000.0, 120000.0);
  EXPECT_NEAR(r.grams_per_s, 1.0 / 3.0, 1e-12);
}

TEST(FuelCell, ZeroPower) {
  const auto r = fc_hydrogen_rate(flat_fuel_cell(), 0.0, 120000.0);
  EXPECT_EQ(r.current, 0.0);
  EXPECT_EQ(r.efficiency, 0.5);
  EXPECT_EQ(r.grams_per_s, 0.0);
}

TEST(FuelCell, NodeIdentity) {
  const auto c = reference::fcev_fuel_cell();
  const auto p = c.power_to_current.x();
  const auto i = c.power_to_current.y();
  const auto r = fc_hydrogen_rate(c, p[7], 120000.0);
  EXPECT_DOUBLE_EQ(r.current, i[7]);
  EXPECT_DOUBLE_EQ(r.efficiency, c.current_to_efficiency(i[7]));
}

TEST(FuelCell, OutOfRange) {
  EXPECT_THROW(fc_hydrogen_rate(flat_fuel_cell(), -1.0, 120000.0), PowerOutOfRange);
  EXPECT_THROW(fc_hydrogen_rate(flat_fuel_cell(), 55001.0, 120000.0), PowerOutOfRange);
}

TEST(Battery, ZeroPowerZeroCurrent) { EXPECT_EQ(battery_current(350.0, 0.1, 0.0), 0.0); }

TEST(Battery, SmallerRoot) {
  const double i = battery_current(350.0, 0.1, 10000.0);
  // (350 - sqrt(350^2 - 4 * 0.1 * 10000)) / (2 * 0.1)
  EXPECT_NEAR(i, 28.80855219, 1e-7);
  EXPECT_NEAR(350.0 * i - i * i * 0.1, 10000.0, 1e-6);
}

TEST(Battery, ChargingIsNegative) {
  const double i = battery_current(350.0, 0.1, -10000.0);
  EXPECT_LT(i, 0.0);
  EXPECT_NEAR(350.0 * i - i * i * 0.1, -10000.0, 1e-6);
}

TEST(Battery, Infeasible) {
  EXPECT_THROW(battery_current(350.0, 0.1, 400000.0), PowerInfeasible);
}

TEST(Battery, TableLookupUsesSoc) {
  const auto b = reference::phev_battery();
  const double i = battery_current(b, 0.5, 20000.0);
  const double v = b.open_circuit_voltage(0.5);
  const double r = b.resistance(0.5);
  EXPECT_NEAR(v * i - i * i * r, 20000.0, 1e-8);
}

TEST(SocDelta, Examples) {
  BatteryModel b;
  b.capacity_ah = 20.8;
  EXPECT_EQ(soc_delta(b, 0.0, 1.0), 0.0);
  EXPECT_NEAR(soc_delta(b, 20.8, 3600.0), -1.0, 1e-15);
  b.capacity_ah = 88.0;
  EXPECT_NEAR(soc_delta(b, 88.0, 1.0), -1.0 / 3600.0, 1e-15);
}

PhevPlant reference_phev() {
  PhevPlant p;
  p.vehicle = reference::phev_vehicle();
  p.engine = reference::phev_engine_map();
  p.motor = reference::phev_motor_map();
  p.battery = reference::phev_battery();
  p.engine_speed = reference::phev_engine_speed_bounds();
  return p;
}

FcevPlant reference_fcev() {
  FcevPlant p;
  p.vehicle = reference::fcev_vehicle();
  p.motor = reference::fcev_motor_map();
  p.battery = reference::fcev_battery();
  p.fuel_cell = reference::fcev_fuel_cell();
  return p;
}

TEST(PhevPlant, NoDemand) {
  const auto plant = reference_phev();
  for (double u : {0.0, 0.5, 1.0}) {
    const auto o = phev_plant_step(plant, 0.6, u, WheelDemand{}, 1.0);
    EXPECT_EQ(o.fuel_g, 0.0);
    EXPECT_EQ(o.delta_soc, 0.0);
    EXPECT_FALSE(o.clamped);
  }
}

TEST(PhevPlant, PureElectric) {
  const auto plant = reference_phev();
  const auto d = road_load(plant.vehicle, 12.0, 0.3);
  const auto o = phev_plant_step(plant, 0.6, 0.0, d, 1.0);
  EXPECT_EQ(o.fuel_g, 0.0);
  EXPECT_LT(o.delta_soc, 0.0);
  EXPECT_FALSE(o.clamped);
}

TEST(PhevPlant, PureEngine) {
  const auto plant = reference_phev();
  const auto d = road_load(plant.vehicle, 12.0, 0.3);
  const auto o = phev_plant_step(plant, 0.6, 1.0, d, 1.0);
  EXPECT_GT(o.fuel_g, 0.0);
  EXPECT_EQ(o.motor_point.load, 0.0);
  EXPECT_EQ(o.delta_soc, 0.0);
}

TEST(PhevPlant, BrakingRegenerates) {
  const auto plant = reference_phev();
  const auto d = road_load(plant.vehicle, 15.0, -1.0);
  const auto o = phev_plant_step(plant, 0.6, 0.7, d, 1.0);
  EXPECT_EQ(o.fuel_g, 0.0);
  EXPECT_GT(o.delta_soc, 0.0);
}

TEST(FcevPlant, NoDemandNoPower) {
  const auto o = fcev_plant_step(reference_fcev(), 0.6, 0.0, WheelDemand{}, 1.0);
  EXPECT_EQ(o.fuel_g, 0.0);
  EXPECT_EQ(o.delta_soc, 0.0);
}

TEST(FcevPlant, IdleChargingFromFuelCell) {
  const auto o = fcev_plant_step(reference_fcev(), 0.6, 10000.0, WheelDemand{}, 1.0);
  EXPECT_GT(o.fuel_g, 0.0);
  EXPECT_GT(o.delta_soc, 0.0);
}

TEST(FcevPlant, ExactLoadFollowing) {
  const auto plant = reference_fcev();
  const auto d = road_load(plant.vehicle, 15.0, 0.5);
  const double pm = env::fcev_motor_power(plant, d);
  ASSERT_GT(pm, 0.0);
  ASSERT_LT(pm, plant.fuel_cell.max_power);
  const auto o = fcev_plant_step(plant, 0.6, pm, d, 1.0);
  EXPECT_EQ(o.battery_current, 0.0);
  EXPECT_EQ(o.delta_soc, 0.0);
}

TEST(FcevPlant, SocSignFollowsBusBalance) {
  const auto plant = reference_fcev();
  const auto d = road_load(plant.vehicle, 20.0, 0.2);
  const double pm = env::fcev_motor_power(plant, d);
  for (double pfc : {0.0, 5000.0, 20000.0, 40000.0, 55000.0}) {
    const auto o = fcev_plant_step(plant, 0.6, pfc, d, 1.0);
    EXPECT_GE(o.fuel_g, 0.0);
    if (pfc > pm) EXPECT_GT(o.delta_soc, 0.0);
    if (pfc < pm) EXPECT_LT(o.delta_soc, 0.0);
  }
}

TEST(VehicleParams, Validation) {
  auto p = test_vehicle();
  p.gear_ratios = {2.0, 3.0};
  EXPECT_THROW(p.validate(), ConfigError);
  p = test_vehicle();
  p.mass = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Loaders, MapRoundTrip) {
  TempDir dir;
  const auto m = reference::phev_motor_map();
  save_torque_speed_map(m, dir / "m.csv", dir / "l.csv");
  const auto back = load_torque_speed_map(dir / "m.csv", dir / "l.csv");
  EXPECT_EQ(back.speed_axis(), m.speed_axis());
  EXPECT_EQ(back.torque_axis(), m.torque_axis());
  EXPECT_EQ(back.efficiency_grid(), m.efficiency_grid());
}

TEST(Loaders, NonMonotoneAxisRejected) {
  TempDir dir;
  write_file(dir / "m.csv", "# map v1\nT\\w,0,20,10\n0,0.5,0.5,0.5\n10,0.5,0.5,0.5\n");
  write_file(dir / "l.csv", "speed,Tmin,Tmax\n0,0,10\n20,0,10\n");
  EXPECT_THROW(load_torque_speed_map(dir / "m.csv", dir / "l.csv"), DataFileError);
}

TEST(Loaders, MissingFileNamesPath) {
  try {
    load_battery("/nonexistent/battery.csv", 20.8, std::nullopt);
    FAIL() << "expected DataFileError";
  } catch (const DataFileError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/battery.csv"), std::string::npos);
  }
}

TEST(Loaders, BatteryWithoutRintNeedsConstant) {
  TempDir dir;
  write_file(dir / "b.csv", "soc,voc_V\n0,500\n1,650\n");
  EXPECT_THROW(load_battery(dir / "b.csv", 88.0, std::nullopt), DataFileError);
  const auto b = load_battery(dir / "b.csv", 88.0, 0.06317);
  EXPECT_DOUBLE_EQ(b.resistance(0.4), 0.06317);
  EXPECT_DOUBLE_EQ(b.open_circuit_voltage(0.5), 575.0);
}

}  // namespace
}  // namespace emsrl::powertrain

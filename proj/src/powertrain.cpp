#include "emsrl/powertrain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emsrl/error.hpp"

namespace emsrl::powertrain {

void VehicleParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be positive");
  };
  positive(mass, "vehicle.mass");
  positive(air_density, "vehicle.air_density");
  positive(drag_coeff, "vehicle.drag_coeff");
  positive(frontal_area, "vehicle.frontal_area");
  positive(roll_coeff, "vehicle.roll_coeff");
  positive(gravity, "vehicle.gravity");
  positive(wheel_radius, "vehicle.wheel_radius");
  positive(final_ratio, "vehicle.final_ratio");
  if (!std::isfinite(grade)) throw ConfigError("vehicle.grade", "must be finite");
  if (gear_ratios.empty()) throw ConfigError("vehicle.gear_ratios", "must not be empty");
  for (std::size_t i = 0; i < gear_ratios.size(); ++i) {
    positive(gear_ratios[i], "vehicle.gear_ratios");
    if (i > 0 && !(gear_ratios[i] < gear_ratios[i - 1]))
      throw ConfigError("vehicle.gear_ratios", "must be strictly decreasing");
  }
}

RoadForces road_forces(const VehicleParams& p, double v, double a) {
  RoadForces f;
  f.traction = p.mass * a;
  f.air = 0.5 * p.air_density * p.drag_coeff * p.frontal_area * v * v;
  // no rolling resistance at standstill
  f.roll = v > 0.0 ? std::cos(p.grade) * p.roll_coeff * p.mass * p.gravity : 0.0;
  f.gravity = p.grade == 0.0 ? 0.0 : std::sin(p.grade) * p.mass * p.gravity;
  return f;
}

WheelDemand road_load(const VehicleParams& p, double v, double a) {
  WheelDemand d;
  d.force = road_forces(p, v, a).total();
  d.torque = d.force * p.wheel_radius;
  d.speed = v / p.wheel_radius;
  d.power = d.torque * d.speed;
  return d;
}

std::size_t select_gear(const VehicleParams& p, double wheel_speed, SpeedBounds bounds) {
  const auto& g = p.gear_ratios;
  for (std::size_t i = g.size(); i-- > 0;) {
    const double w = wheel_speed * g[i] * p.final_ratio;
    if (w >= bounds.lo && w <= bounds.hi) return i;
  }
  std::size_t best = 0;
  double best_violation = INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = wheel_speed * g[i] * p.final_ratio;
    const double violation = std::max({bounds.lo - w, w - bounds.hi, 0.0});
    if (violation < best_violation) {
      best_violation = violation;
      best = i;
    }
  }
  return best;
}

TorqueSpeedMap::TorqueSpeedMap(std::vector<double> speed_axis, std::vector<double> torque_axis,
                               std::vector<double> efficiency, std::vector<double> limit_speed,
                               std::vector<double> limit_min, std::vector<double> limit_max)
    : speed_axis_(std::move(speed_axis)),
      torque_axis_(std::move(torque_axis)),
      efficiency_(std::move(efficiency)) {
  if (speed_axis_.empty() || torque_axis_.empty())
    throw std::invalid_argument("map axes must not be empty");
  if (!strictly_increasing(speed_axis_) || !strictly_increasing(torque_axis_))
    throw std::invalid_argument("map axes must be strictly increasing");
  if (efficiency_.size() != speed_axis_.size() * torque_axis_.size())
    throw std::invalid_argument("efficiency grid shape does not match axes");
  for (double e : efficiency_)
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("efficiency outside (0,1]");
  if (limit_min.size() != limit_speed.size() || limit_max.size() != limit_speed.size())
    throw std::invalid_argument("limit curves must share the speed column");
  for (std::size_t i = 0; i < limit_speed.size(); ++i)
    if (limit_max[i] < limit_min[i]) throw std::invalid_argument("Tmax below Tmin");
  min_curve_ = Table1D(limit_speed, std::move(limit_min));
  max_curve_ = Table1D(std::move(limit_speed), std::move(limit_max));
}

double map_lookup(const TorqueSpeedMap& map, double torque, double speed) {
  const auto& ts = map.torque_axis();
  const auto& ws = map.speed_axis();
  if (ts.size() == 1 && ws.size() == 1) return map.node(0, 0);
  const auto bt = ts.size() > 1 ? bracket(ts, torque) : Bracket{0, 0.0};
  const auto bw = ws.size() > 1 ? bracket(ws, speed) : Bracket{0, 0.0};
  const std::size_t i1 = std::min(bt.index + 1, ts.size() - 1);
  const std::size_t j1 = std::min(bw.index + 1, ws.size() - 1);
  const double e00 = map.node(bt.index, bw.index);
  const double e01 = map.node(bt.index, j1);
  const double e10 = map.node(i1, bw.index);
  const double e11 = map.node(i1, j1);
  const double lo = e00 + bw.frac * (e01 - e00);
  const double hi = e10 + bw.frac * (e11 - e10);
  return lo + bt.frac * (hi - lo);
}

TorqueLimits torque_limits(const TorqueSpeedMap& map, double speed) {
  return {map.min_torque_curve()(speed), map.max_torque_curve()(speed)};
}

double motor_power(double torque, double speed, double eta) {
  if (torque >= 0.0) return torque * speed / eta;
  return torque * speed * eta;
}

double engine_fuel_rate(const TorqueSpeedMap& map, double torque, double speed, double q_lhv) {
  const double power = torque * speed;
  if (power == 0.0) return 0.0;
  return power / (map_lookup(map, torque, speed) * q_lhv);
}

FuelCellRate fc_hydrogen_rate(const FuelCellCurves& curves, double power, double q_lhv_h2) {
  if (!(power >= 0.0) || power > curves.max_power)
    throw PowerOutOfRange("fuel-cell power " + std::to_string(power) + " W outside [0, " +
                          std::to_string(curves.max_power) + "]");
  FuelCellRate r;
  r.current = curves.power_to_current(power);
  r.efficiency = curves.current_to_efficiency(r.current);
  r.grams_per_s = power == 0.0 ? 0.0 : power / (r.efficiency * q_lhv_h2);
  return r;
}

double battery_current(double v_oc, double r_int, double p_batt) {
  if (p_batt == 0.0) return 0.0;
  const double disc = v_oc * v_oc - 4.0 * r_int * p_batt;
  if (disc < 0.0)
    throw PowerInfeasible("battery power " + std::to_string(p_batt) + " W exceeds peak " +
                          std::to_string(v_oc * v_oc / (4.0 * r_int)) + " W");
  // smaller root of R I^2 - V I + P = 0, written without cancellation
  return 2.0 * p_batt / (v_oc + std::sqrt(disc));
}

double battery_current(const BatteryModel& b, double soc, double p_batt) {
  return battery_current(b.open_circuit_voltage(soc), b.resistance(soc), p_batt);
}

double soc_delta(const BatteryModel& b, double current, double dt) {
  return -(current * dt) / (3600.0 * b.capacity_ah);
}

namespace {

double clamp_flag(double v, double lo, double hi, bool& clamped) {
  if (v < lo) {
    clamped = true;
    return lo;
  }
  if (v > hi) {
    clamped = true;
    return hi;
  }
  return v;
}

void settle_battery(const BatteryModel& b, double soc, double p_batt, double dt,
                    StepOutcome& out) {
  out.battery_power = p_batt;
  out.battery_current = battery_current(b, soc, p_batt);
  out.delta_soc = soc_delta(b, out.battery_current, dt);
}

}  // namespace

StepOutcome phev_plant_step(const PhevPlant& plant, double soc, double split,
                            const WheelDemand& demand, double dt) {
  StepOutcome out;
  const auto& veh = plant.vehicle;
  out.gear = select_gear(veh, demand.speed, plant.engine_speed);
  const double ratio = veh.gear_ratios[out.gear] * veh.final_ratio;
  const double shaft_speed = demand.speed * ratio;
  const double shaft_torque = demand.torque / ratio;

  double engine_torque = 0.0;
  double motor_torque = 0.0;
  const auto mlim = torque_limits(plant.motor, shaft_speed);
  if (shaft_torque >= 0.0) {
    const auto elim = torque_limits(plant.engine, shaft_speed);
    engine_torque = clamp_flag(split * shaft_torque, 0.0, elim.max, out.clamped);
    motor_torque = clamp_flag(shaft_torque - engine_torque, mlim.min, mlim.max, out.clamped);
  } else {
    // regeneration; friction brakes absorb what the motor cannot
    motor_torque = clamp_flag(shaft_torque, mlim.min, 0.0, out.clamped);
  }

  const double eta_e = map_lookup(plant.engine, engine_torque, shaft_speed);
  out.source_point = {engine_torque, shaft_speed, eta_e};
  out.fuel_g = engine_fuel_rate(plant.engine, engine_torque, shaft_speed, plant.q_lhv) * dt;

  const double eta_m = map_lookup(plant.motor, motor_torque, shaft_speed);
  out.motor_point = {motor_torque, shaft_speed, eta_m};
  settle_battery(plant.battery, soc, motor_power(motor_torque, shaft_speed, eta_m), dt, out);
  return out;
}

StepOutcome fcev_plant_step(const FcevPlant& plant, double soc, double fc_power,
                            const WheelDemand& demand, double dt) {
  StepOutcome out;
  const double ratio = plant.vehicle.final_ratio;
  const double motor_speed = demand.speed * ratio;
  const auto mlim = torque_limits(plant.motor, motor_speed);
  const double motor_torque = clamp_flag(demand.torque / ratio, mlim.min, mlim.max, out.clamped);
  const double eta_m = map_lookup(plant.motor, motor_torque, motor_speed);
  out.motor_point = {motor_torque, motor_speed, eta_m};
  const double p_motor = motor_power(motor_torque, motor_speed, eta_m);

  const auto fc = fc_hydrogen_rate(plant.fuel_cell, fc_power, plant.q_lhv_h2);
  out.source_point = {fc_power, fc.current, fc.efficiency};
  out.fuel_g = fc.grams_per_s * dt;
  settle_battery(plant.battery, soc, p_motor - fc_power, dt, out);
  return out;
}

}  // namespace emsrl::powertrain

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "emsrl/interp.hpp"

namespace emsrl::powertrain {

// Longitudinal vehicle parameters for the backward model.
struct VehicleParams {
  double mass = 1200.0;          // kg
  double air_density = 1.2;      // kg/m^3
  double drag_coeff = 0.3;
  double frontal_area = 2.2;     // m^2
  double roll_coeff = 0.012;
  double gravity = 9.81;         // m/s^2
  double grade = 0.0;            // rad
  double wheel_radius = 0.32;    // m
  std::vector<double> gear_ratios{1.0};
  double final_ratio = 1.0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct RoadForces {
  double traction = 0.0;
  double air = 0.0;
  double roll = 0.0;
  double gravity = 0.0;
  double total() const { return traction + air + roll + gravity; }
};

struct WheelDemand {
  double force = 0.0;   // N
  double torque = 0.0;  // Nm
  double speed = 0.0;   // rad/s
  double power = 0.0;   // W
};

RoadForces road_forces(const VehicleParams& p, double v, double a);
WheelDemand road_load(const VehicleParams& p, double v, double a);

struct SpeedBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Highest gear (smallest ratio) keeping the shaft speed inside `bounds`;
// otherwise the gear with the smallest bound violation (lowest index on ties).
std::size_t select_gear(const VehicleParams& p, double wheel_speed, SpeedBounds bounds);

struct TorqueLimits {
  double min = 0.0;
  double max = 0.0;
};

// Efficiency grid over (torque, speed) plus speed-dependent torque limits.
class TorqueSpeedMap {
 public:
  TorqueSpeedMap() = default;
  // `efficiency` is row-major with one row per torque axis point.
  TorqueSpeedMap(std::vector<double> speed_axis, std::vector<double> torque_axis,
                 std::vector<double> efficiency, std::vector<double> limit_speed,
                 std::vector<double> limit_min, std::vector<double> limit_max);

  const std::vector<double>& speed_axis() const { return speed_axis_; }
  const std::vector<double>& torque_axis() const { return torque_axis_; }
  const std::vector<double>& efficiency_grid() const { return efficiency_; }
  double node(std::size_t torque_i, std::size_t speed_j) const {
    return efficiency_[torque_i * speed_axis_.size() + speed_j];
  }
  const Table1D& min_torque_curve() const { return min_curve_; }
  const Table1D& max_torque_curve() const { return max_curve_; }

 private:
  std::vector<double> speed_axis_;
  std::vector<double> torque_axis_;
  std::vector<double> efficiency_;
  Table1D min_curve_;
  Table1D max_curve_;
};

// Bilinear efficiency lookup, inputs clamped to the grid.
double map_lookup(const TorqueSpeedMap& map, double torque, double speed);
TorqueLimits torque_limits(const TorqueSpeedMap& map, double speed);

// Electrical power of a motor delivering (torque, speed) at efficiency eta.
double motor_power(double torque, double speed, double eta);

// Fuel mass flow in g/s; zero when the engine delivers no power.
double engine_fuel_rate(const TorqueSpeedMap& map, double torque, double speed, double q_lhv);

struct FuelCellCurves {
  Table1D power_to_current;       // W -> A
  Table1D current_to_efficiency;  // A -> (0,1]
  double max_power = 55000.0;     // W
};

struct FuelCellRate {
  double current = 0.0;
  double efficiency = 0.0;
  double grams_per_s = 0.0;
};

// Throws PowerOutOfRange outside [0, max_power].
FuelCellRate fc_hydrogen_rate(const FuelCellCurves& curves, double power, double q_lhv_h2);

struct BatteryModel {
  double capacity_ah = 1.0;
  Table1D ocv;        // soc -> V
  Table1D rint;       // soc -> ohm
  double soc_floor = 0.0;
  double soc_ceiling = 1.0;

  double open_circuit_voltage(double soc) const { return ocv(soc); }
  double resistance(double soc) const { return rint(soc); }
};

// Current (A, positive when discharging) delivering P_batt at the terminals
// of an R_int equivalent circuit. Throws PowerInfeasible when the request
// exceeds the peak power V_oc^2 / (4 R_int).
double battery_current(const BatteryModel& b, double soc, double p_batt);
double battery_current(double v_oc, double r_int, double p_batt);

// Coulomb counting: -(I dt) / (3600 Q_max).
double soc_delta(const BatteryModel& b, double current, double dt);

struct OperatingPoint {
  double load = 0.0;        // torque (Nm) or power (W) for the fuel cell
  double speed = 0.0;       // rad/s, or current (A) for the fuel cell
  double efficiency = 0.0;
};

struct StepOutcome {
  double fuel_g = 0.0;
  double delta_soc = 0.0;
  double battery_current = 0.0;
  double battery_power = 0.0;
  OperatingPoint source_point;  // engine or fuel cell
  OperatingPoint motor_point;
  std::size_t gear = 0;
  bool clamped = false;
};

struct PhevPlant {
  VehicleParams vehicle;
  TorqueSpeedMap engine;
  TorqueSpeedMap motor;
  BatteryModel battery;
  SpeedBounds engine_speed;
  double q_lhv = 42600.0;  // J/g
};

struct FcevPlant {
  VehicleParams vehicle;
  TorqueSpeedMap motor;
  BatteryModel battery;
  FuelCellCurves fuel_cell;
  double q_lhv_h2 = 120000.0;  // J/g
};

// `split` is the engine share of positive shaft torque, in [0,1].
StepOutcome phev_plant_step(const PhevPlant& plant, double soc, double split,
                            const WheelDemand& demand, double dt);

// `fc_power` is the fuel-cell output command in W.
StepOutcome fcev_plant_step(const FcevPlant& plant, double soc, double fc_power,
                            const WheelDemand& demand, double dt);

// Data-file loaders and writers. Loaders throw DataFileError with the path.
TorqueSpeedMap load_torque_speed_map(const std::filesystem::path& map_csv,
                                     const std::filesystem::path& limits_csv);
void save_torque_speed_map(const TorqueSpeedMap& map, const std::filesystem::path& map_csv,
                           const std::filesystem::path& limits_csv);

FuelCellCurves load_fuel_cell_curves(const std::filesystem::path& power_current_csv,
                                     const std::filesystem::path& current_efficiency_csv,
                                     double max_power);
void save_fuel_cell_curves(const FuelCellCurves& curves,
                           const std::filesystem::path& power_current_csv,
                           const std::filesystem::path& current_efficiency_csv);

// When the file has no rint column, `constant_rint` must be provided.
BatteryModel load_battery(const std::filesystem::path& csv_path, double capacity_ah,
                          std::optional<double> constant_rint);
void save_battery(const BatteryModel& b, const std::filesystem::path& csv_path, bool with_rint);

}  // namespace emsrl::powertrain

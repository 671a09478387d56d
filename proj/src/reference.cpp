#include "emsrl/reference.hpp"

#include <algorithm>
#include <cmath>

namespace emsrl::reference {
namespace {

using powertrain::BatteryModel;
using powertrain::FuelCellCurves;
using powertrain::TorqueSpeedMap;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Rounded so the written CSV reloads to the same doubles.
double round6(double v) { return std::round(v * 1e6) / 1e6; }

template <class Eff>
TorqueSpeedMap build_map(const std::vector<double>& speeds, const std::vector<double>& torques,
                         Eff eff, const std::vector<double>& limit_speed,
                         const std::vector<double>& tmin, const std::vector<double>& tmax) {
  std::vector<double> grid;
  grid.reserve(speeds.size() * torques.size());
  for (double t : torques)
    for (double w : speeds) grid.push_back(round6(std::clamp(eff(t, w), 0.01, 1.0)));
  return TorqueSpeedMap(speeds, torques, std::move(grid), limit_speed, tmin, tmax);
}

// Motor limit curve: constant torque up to base speed, constant power above.
void motor_limits(double t_max, double p_max, const std::vector<double>& speeds,
                  std::vector<double>& tmin, std::vector<double>& tmax) {
  for (double w : speeds) {
    const double t = round6(w > 0.0 ? std::min(t_max, p_max / w) : t_max);
    tmax.push_back(t);
    tmin.push_back(-t);
  }
}

const std::vector<double> kSocAxis{0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
// LFP cell open-circuit voltage with its characteristic plateau
const std::vector<double> kCellOcv{2.80, 3.05, 3.18, 3.24, 3.27, 3.285, 3.295, 3.305, 3.315, 3.33, 3.35, 3.38, 3.45};

// Fuel-cell polarization, per effective cell
double fc_cell_voltage(double current) {
  return 0.95 - 0.045 * std::log1p(current / 1.5) - 0.00045 * current;
}

}  // namespace

powertrain::VehicleParams phev_vehicle() {
  powertrain::VehicleParams p;
  p.mass = 1200.0;
  p.gear_ratios = {3.527, 2.025, 1.382, 1.058, 0.958};
  p.final_ratio = 4.021;
  p.wheel_radius = 0.32;
  return p;
}

powertrain::VehicleParams fcev_vehicle() {
  powertrain::VehicleParams p;
  p.mass = 1200.0;
  p.gear_ratios = {1.0};
  p.final_ratio = 7.38;
  p.wheel_radius = 0.32;
  return p;
}

powertrain::SpeedBounds phev_engine_speed_bounds() { return {800.0 * kRpm, 6500.0 * kRpm}; }

TorqueSpeedMap phev_engine_map() {
  const auto speeds = linspace(800.0 * kRpm, 6500.0 * kRpm, 24);
  const auto torques = linspace(0.0, 170.0, 35);
  // Willans line: brake efficiency = indicated efficiency * T / (T + friction torque)
  auto eff = [](double t, double w) {
    const double dw = (w - 260.0) / 420.0;
    const double indicated = 0.41 - 0.06 * dw * dw;
    const double friction = 9.0 + 0.012 * w;
    return indicated * t / (t + friction);
  };
  // full-load curve: 165 Nm plateau, tapering to 150 Nm (about 102 kW) at 6500 rpm
  std::vector<double> ls, lmax;
  for (double rpm : {800.0, 1500.0, 2000.0, 4500.0, 6500.0}) ls.push_back(round6(rpm * kRpm));
  lmax = {115.0, 140.0, 165.0, 165.0, 150.0};
  std::vector<double> lmin(ls.size(), 0.0);
  return build_map(speeds, torques, eff, ls, lmin, lmax);
}

TorqueSpeedMap phev_motor_map() {
  const auto speeds = linspace(0.0, 700.0, 29);
  const auto torques = linspace(-320.0, 320.0, 33);
  auto eff = [](double t, double w) {
    const double dw = (w - 330.0) / 330.0;
    const double dt = (std::abs(t) - 110.0) / 200.0;
    return std::clamp(0.94 - 0.06 * dw * dw - 0.08 * dt * dt - 0.20 * std::exp(-std::abs(t) / 12.0) -
                          0.12 * std::exp(-w / 30.0),
                      0.5, 0.97);
  };
  std::vector<double> tmin, tmax;
  motor_limits(307.0, 126000.0, speeds, tmin, tmax);
  return build_map(speeds, torques, eff, speeds, tmin, tmax);
}

TorqueSpeedMap fcev_motor_map() {
  // speed axis extends past the rated 3500 rpm so the whole cycle stays on the grid
  const auto speeds = linspace(0.0, 900.0, 31);
  const auto torques = linspace(-2500.0, 2500.0, 41);
  auto eff = [](double t, double w) {
    const double dw = (w - 300.0) / 450.0;
    const double dt = (std::abs(t) - 200.0) / 1200.0;
    return std::clamp(0.94 - 0.06 * dw * dw - 0.10 * dt * dt - 0.20 * std::exp(-std::abs(t) / 25.0) -
                          0.12 * std::exp(-w / 30.0),
                      0.5, 0.97);
  };
  std::vector<double> tmin, tmax;
  motor_limits(2500.0, 249000.0, speeds, tmin, tmax);
  return build_map(speeds, torques, eff, speeds, tmin, tmax);
}

FuelCellCurves fcev_fuel_cell() {
  const auto currents = linspace(0.0, 400.0, 41);
  const double cells = kFcevFuelCellMaxPower / (fc_cell_voltage(400.0) * 400.0);
  constexpr double aux_power = 1000.0;  // balance-of-plant draw, W
  std::vector<double> power, current, eff;
  for (double i : currents) {
    const double p = round6(cells * fc_cell_voltage(i) * i);
    power.push_back(p);
    current.push_back(i);
    eff.push_back(round6(std::max(0.05, fc_cell_voltage(i) / 1.254 * p / (p + aux_power))));
  }
  power.back() = kFcevFuelCellMaxPower;
  FuelCellCurves c;
  c.power_to_current = Table1D(power, current);
  c.current_to_efficiency = Table1D(current, eff);
  c.max_power = kFcevFuelCellMaxPower;
  return c;
}

BatteryModel phev_battery() {
  constexpr double cells = 108.0;
  const std::vector<double> rint{0.20, 0.16, 0.14, 0.125, 0.12, 0.118, 0.117, 0.117, 0.118, 0.12, 0.125, 0.128, 0.13};
  std::vector<double> ocv;
  for (double v : kCellOcv) ocv.push_back(round6(v * cells));
  BatteryModel b;
  b.capacity_ah = kPhevBatteryCapacity;
  b.ocv = Table1D(kSocAxis, ocv);
  b.rint = Table1D(kSocAxis, rint);
  return b;
}

BatteryModel fcev_battery() {
  // scaled so the mid-SOC voltage is the nominal 600 V
  const double cells = 600.0 / 3.295;
  std::vector<double> ocv;
  for (double v : kCellOcv) ocv.push_back(round6(v * cells));
  BatteryModel b;
  b.capacity_ah = kFcevBatteryCapacity;
  b.ocv = Table1D(kSocAxis, ocv);
  b.rint = Table1D({0.0}, {kFcevBatteryResistance});
  return b;
}

void write_reference_data(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  powertrain::save_torque_speed_map(phev_engine_map(), dir / "phev_engine_map.csv",
                                    dir / "phev_engine_limits.csv");
  powertrain::save_torque_speed_map(phev_motor_map(), dir / "phev_motor_map.csv",
                                    dir / "phev_motor_limits.csv");
  powertrain::save_torque_speed_map(fcev_motor_map(), dir / "fcev_motor_map.csv",
                                    dir / "fcev_motor_limits.csv");
  powertrain::save_battery(phev_battery(), dir / "phev_battery.csv", true);
  powertrain::save_battery(fcev_battery(), dir / "fcev_battery.csv", false);
  powertrain::save_fuel_cell_curves(fcev_fuel_cell(), dir / "fcev_fc_power_current.csv",
                                    dir / "fcev_fc_current_efficiency.csv");
}

}  // namespace emsrl::reference

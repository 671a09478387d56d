#pragma once

#include <filesystem>

#include "emsrl/powertrain.hpp"

// Synthetic reference component data for the two vehicles. The shapes are
// smooth parametric stand-ins for measured maps: an engine with a mid-range
// efficiency island, motors with an efficiency bowl, and a fuel cell whose
// system efficiency peaks at partial load.
namespace emsrl::reference {

inline constexpr double kRpm = 3.14159265358979323846 / 30.0;  // rpm -> rad/s

powertrain::VehicleParams phev_vehicle();
powertrain::VehicleParams fcev_vehicle();
powertrain::SpeedBounds phev_engine_speed_bounds();

powertrain::TorqueSpeedMap phev_engine_map();
powertrain::TorqueSpeedMap phev_motor_map();
powertrain::TorqueSpeedMap fcev_motor_map();
powertrain::FuelCellCurves fcev_fuel_cell();
powertrain::BatteryModel phev_battery();
powertrain::BatteryModel fcev_battery();

inline constexpr double kFcevBatteryResistance = 0.06317;  // ohm
inline constexpr double kFcevFuelCellMaxPower = 55000.0;   // W
inline constexpr double kPhevBatteryCapacity = 20.8;       // Ah
inline constexpr double kFcevBatteryCapacity = 88.0;       // Ah

// Writes every reference table under `dir` using the loader file formats.
void write_reference_data(const std::filesystem::path& dir);

}  // namespace emsrl::reference

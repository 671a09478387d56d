#include <fstream>
#include <string>

#include "emsrl/csv.hpp"
#include "emsrl/error.hpp"
#include "emsrl/powertrain.hpp"

namespace emsrl::powertrain {
namespace {

namespace fs = std::filesystem;

double number(const fs::path& path, const csv::Row& row, std::size_t col) {
  if (col >= row.fields.size())
    throw DataFileError(path.string(), "line " + std::to_string(row.line) + ": missing column");
  const auto v = csv::to_double(row.fields[col]);
  if (!v)
    throw DataFileError(path.string(), "line " + std::to_string(row.line) + ": '" +
                                           row.fields[col] + "' is not a number");
  return *v;
}

// Numeric columns of a table whose first row may be a header.
std::vector<std::vector<double>> numeric_table(const fs::path& path, std::size_t min_cols,
                                               std::size_t max_cols) {
  auto rows = csv::read(path);
  if (!rows.empty() && !csv::to_double(rows.front().fields.front())) rows.erase(rows.begin());
  if (rows.empty()) throw DataFileError(path.string(), "no data rows");
  std::vector<std::vector<double>> cols(rows.front().fields.size());
  if (cols.size() < min_cols || cols.size() > max_cols)
    throw DataFileError(path.string(), "unexpected column count");
  for (const auto& r : rows) {
    if (r.fields.size() != cols.size())
      throw DataFileError(path.string(), "line " + std::to_string(r.line) + ": ragged row");
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(number(path, r, c));
  }
  return cols;
}

void require_increasing(const fs::path& path, const std::vector<double>& axis, const char* what) {
  if (!strictly_increasing(axis))
    throw DataFileError(path.string(), std::string(what) + " must be strictly increasing");
}

void require_efficiency(const fs::path& path, const std::vector<double>& v) {
  for (double e : v)
    if (!(e > 0.0 && e <= 1.0)) throw DataFileError(path.string(), "efficiency outside (0,1]");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

TorqueSpeedMap load_torque_speed_map(const fs::path& map_csv, const fs::path& limits_csv) {
  const auto rows = csv::read(map_csv);
  if (rows.empty() || rows.front().fields.size() != 1 || rows.front().fields[0] != "# map v1")
    throw DataFileError(map_csv.string(), "missing '# map v1' header");
  if (rows.size() < 3) throw DataFileError(map_csv.string(), "map needs an axis row and data");

  const auto& axis_row = rows[1];
  std::vector<double> speeds;
  for (std::size_t c = 1; c < axis_row.fields.size(); ++c) speeds.push_back(number(map_csv, axis_row, c));
  require_increasing(map_csv, speeds, "speed axis");

  std::vector<double> torques;
  std::vector<double> eff;
  for (std::size_t r = 2; r < rows.size(); ++r) {
    if (rows[r].fields.size() != speeds.size() + 1)
      throw DataFileError(map_csv.string(), "line " + std::to_string(rows[r].line) + ": ragged row");
    torques.push_back(number(map_csv, rows[r], 0));
    for (std::size_t c = 1; c < rows[r].fields.size(); ++c) eff.push_back(number(map_csv, rows[r], c));
  }
  require_increasing(map_csv, torques, "torque axis");
  require_efficiency(map_csv, eff);

  auto lim = numeric_table(limits_csv, 3, 3);
  require_increasing(limits_csv, lim[0], "speed column");
  for (std::size_t i = 0; i < lim[0].size(); ++i)
    if (lim[2][i] < lim[1][i]) throw DataFileError(limits_csv.string(), "Tmax below Tmin");

  return TorqueSpeedMap(std::move(speeds), std::move(torques), std::move(eff), std::move(lim[0]),
                        std::move(lim[1]), std::move(lim[2]));
}

void save_torque_speed_map(const TorqueSpeedMap& map, const fs::path& map_csv,
                           const fs::path& limits_csv) {
  auto out = open_out(map_csv);
  out << "# map v1\n";
  out << "torque_Nm\\speed_rad_s";
  for (double w : map.speed_axis()) out << ',' << csv::fmt(w);
  out << '\n';
  for (std::size_t i = 0; i < map.torque_axis().size(); ++i) {
    out << csv::fmt(map.torque_axis()[i]);
    for (std::size_t j = 0; j < map.speed_axis().size(); ++j) out << ',' << csv::fmt(map.node(i, j));
    out << '\n';
  }
  auto lim = open_out(limits_csv);
  lim << "speed,Tmin,Tmax\n";
  const auto& mn = map.min_torque_curve();
  const auto& mx = map.max_torque_curve();
  for (std::size_t i = 0; i < mn.x().size(); ++i)
    lim << csv::fmt(mn.x()[i]) << ',' << csv::fmt(mn.y()[i]) << ',' << csv::fmt(mx.y()[i]) << '\n';
}

FuelCellCurves load_fuel_cell_curves(const fs::path& power_current_csv,
                                     const fs::path& current_efficiency_csv, double max_power) {
  auto pi = numeric_table(power_current_csv, 2, 2);
  auto ie = numeric_table(current_efficiency_csv, 2, 2);
  require_increasing(power_current_csv, pi[0], "power column");
  require_increasing(power_current_csv, pi[1], "current column");
  require_increasing(current_efficiency_csv, ie[0], "current column");
  require_efficiency(current_efficiency_csv, ie[1]);
  FuelCellCurves c;
  c.power_to_current = Table1D(std::move(pi[0]), std::move(pi[1]));
  c.current_to_efficiency = Table1D(std::move(ie[0]), std::move(ie[1]));
  c.max_power = max_power;
  return c;
}

void save_fuel_cell_curves(const FuelCellCurves& curves, const fs::path& power_current_csv,
                           const fs::path& current_efficiency_csv) {
  auto a = open_out(power_current_csv);
  a << "power_W,current_A\n";
  for (std::size_t i = 0; i < curves.power_to_current.x().size(); ++i)
    a << csv::fmt(curves.power_to_current.x()[i]) << ',' << csv::fmt(curves.power_to_current.y()[i]) << '\n';
  auto b = open_out(current_efficiency_csv);
  b << "current_A,efficiency\n";
  for (std::size_t i = 0; i < curves.current_to_efficiency.x().size(); ++i)
    b << csv::fmt(curves.current_to_efficiency.x()[i]) << ','
      << csv::fmt(curves.current_to_efficiency.y()[i]) << '\n';
}

BatteryModel load_battery(const fs::path& csv_path, double capacity_ah,
                          std::optional<double> constant_rint) {
  auto cols = numeric_table(csv_path, 2, 3);
  require_increasing(csv_path, cols[0], "soc column");
  for (double v : cols[1])
    if (!(v > 0.0)) throw DataFileError(csv_path.string(), "open-circuit voltage must be positive");
  BatteryModel b;
  b.capacity_ah = capacity_ah;
  if (cols.size() == 3) {
    for (double r : cols[2])
      if (!(r > 0.0)) throw DataFileError(csv_path.string(), "internal resistance must be positive");
    b.rint = Table1D(cols[0], std::move(cols[2]));
  } else {
    if (!constant_rint || !(*constant_rint > 0.0))
      throw DataFileError(csv_path.string(), "no rint column and no constant resistance given");
    b.rint = Table1D({0.0}, {*constant_rint});
  }
  b.ocv = Table1D(std::move(cols[0]), std::move(cols[1]));
  return b;
}

void save_battery(const BatteryModel& b, const fs::path& csv_path, bool with_rint) {
  auto out = open_out(csv_path);
  out << (with_rint ? "soc,voc_V,rint_ohm\n" : "soc,voc_V\n");
  for (std::size_t i = 0; i < b.ocv.x().size(); ++i) {
    const double soc = b.ocv.x()[i];
    out << csv::fmt(soc) << ',' << csv::fmt(b.ocv.y()[i]);
    if (with_rint) out << ',' << csv::fmt(b.rint(soc));
    out << '\n';
  }
}

}  // namespace emsrl::powertrain

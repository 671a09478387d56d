#include "emsrl/cycle.hpp"

#include <cmath>
#include <fstream>

#include "emsrl/csv.hpp"
#include "emsrl/error.hpp"

namespace emsrl::cycle {

SpeedUnit parse_speed_unit(const std::string& s) {
  if (s == "mps" || s == "m/s") return SpeedUnit::mps;
  if (s == "kph" || s == "km/h") return SpeedUnit::kph;
  throw ParseError("unknown speed unit '" + s + "' (expected mps or kph)");
}

DriveCycle::DriveCycle(std::string name, double dt, std::vector<double> speeds_mps)
    : name_(std::move(name)), dt_(dt), speeds_(std::move(speeds_mps)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ParseError("cycle timestep must be positive");
  if (speeds_.size() < 2) throw ParseError("cycle needs at least two samples");
  for (std::size_t i = 0; i < speeds_.size(); ++i) {
    if (!std::isfinite(speeds_[i])) throw ParseError("non-finite speed at sample " + std::to_string(i));
    if (speeds_[i] < 0.0) throw NegativeSpeed("negative speed at sample " + std::to_string(i));
  }
}

DriveCycle load_cycle(const std::filesystem::path& path, SpeedUnit unit) {
  const auto rows = csv::read(path);
  std::vector<double> times;
  std::vector<double> speeds;
  for (const auto& row : rows) {
    const auto where = path.string() + ":" + std::to_string(row.line);
    if (row.fields.size() != 2) throw ParseError(where + ": expected two columns");
    const auto t = csv::to_double(row.fields[0]);
    const auto v = csv::to_double(row.fields[1]);
    if (!t || !v) {
      // a single leading header row is allowed
      if (times.empty() && &row == &rows.front()) continue;
      throw ParseError(where + ": malformed row");
    }
    if (!std::isfinite(*t) || !std::isfinite(*v)) throw ParseError(where + ": non-finite value");
    if (*v < 0.0) throw NegativeSpeed(where + ": negative speed");
    if (!times.empty() && !(*t > times.back()))
      throw ParseError(where + ": timestamps must be strictly increasing");
    times.push_back(*t);
    speeds.push_back(unit == SpeedUnit::kph ? *v / 3.6 : *v);
  }
  if (times.size() < 2) throw ParseError(path.string() + ": cycle needs at least two rows");
  const double dt = times[1] - times[0];
  for (std::size_t i = 2; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9)
      throw NonUniformTimestep(path.string() + ": timestep changes at row " + std::to_string(i + 1));
  }
  return DriveCycle(path.stem().string(), dt, std::move(speeds));
}

void save_cycle(const DriveCycle& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "time_s,speed\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    out << csv::fmt(c.dt() * static_cast<double>(i)) << ',' << csv::fmt(c.speeds()[i]) << '\n';
}

double accel_at(const DriveCycle& c, std::size_t k) {
  if (k >= c.size()) throw IndexOutOfRange("cycle step " + std::to_string(k) + " out of range");
  if (k + 1 == c.size()) return 0.0;
  return (c.speeds()[k + 1] - c.speeds()[k]) / c.dt();
}

}  // namespace emsrl::cycle

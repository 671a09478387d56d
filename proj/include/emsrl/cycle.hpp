#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace emsrl::cycle {

enum class SpeedUnit { mps, kph };

SpeedUnit parse_speed_unit(const std::string& s);

// Uniformly sampled vehicle speed trace. Immutable once constructed.
class DriveCycle {
 public:
  // Throws NegativeSpeed, ParseError (non-finite values, fewer than two
  // samples, non-positive dt).
  DriveCycle(std::string name, double dt, std::vector<double> speeds_mps);

  const std::string& name() const { return name_; }
  double dt() const { return dt_; }
  const std::vector<double>& speeds() const { return speeds_; }
  std::size_t size() const { return speeds_.size(); }
  double duration() const { return dt_ * static_cast<double>(speeds_.size() - 1); }

 private:
  std::string name_;
  double dt_;
  std::vector<double> speeds_;
};

// Reads `time_s,speed` rows (header optional). Timestamps must be strictly
// increasing and uniformly spaced to within 1e-9 s.
DriveCycle load_cycle(const std::filesystem::path& path, SpeedUnit unit);

// Writes the cycle back in m/s with a `time_s,speed` header.
void save_cycle(const DriveCycle& c, const std::filesystem::path& path);

// Forward difference (v[k+1]-v[k])/dt; zero at the final sample.
double accel_at(const DriveCycle& c, std::size_t k);

}  // namespace emsrl::cycle

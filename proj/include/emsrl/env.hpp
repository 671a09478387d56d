#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "emsrl/cycle.hpp"
#include "emsrl/powertrain.hpp"

namespace emsrl::env {

// Uniform grid lo + i (hi-lo)/(n-1), i in [0, n).
class Grid {
 public:
  Grid(double lo, double hi, std::size_t n);
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return n_; }
  double point(std::size_t i) const;

 private:
  double lo_;
  double hi_;
  std::size_t n_;
};

// Nearest grid index with x clamped to [lo, hi]; exact midpoints go low.
std::size_t discretize(const Grid& g, double x);

struct StateSpec {
  Grid pdem;  // W
  Grid soc;
  std::size_t size() const { return pdem.size() * soc.size(); }
  std::size_t encode(std::size_t pdem_index, std::size_t soc_index) const {
    return pdem_index * soc.size() + soc_index;
  }
};

enum class ActionKind { torque_split, fc_power };

struct ActionSpec {
  ActionKind kind;
  Grid grid;
};

enum class RewardKind { fuel_min, eq_instant, eq_overall };

struct RewardSpec {
  RewardKind kind = RewardKind::fuel_min;
  double tau = 1.0;
  double equivalence_factor = 0.0;  // S
  double v_bat = 350.0;             // V, nominal open-circuit voltage
  double capacity_ah = 20.8;
  double q_lhv = 42600.0;           // J/g

  // Grams of fuel per unit SOC: S 3600 V_bat Q_max / Q_LHV.
  double alpha() const;
};

double equivalence_factor(double s, double v_bat, double capacity_ah, double q_lhv);

double reward_of(const RewardSpec& spec, const powertrain::StepOutcome& outcome, double soc_now,
                 double soc_next, double soc_start);

struct ConstraintSpec {
  double soc_min = 0.30;
  double soc_max = 0.85;
  double w_dis = 1000.0;
  double w_chg = 1000.0;
  bool terminate_on_violation = true;
};

// Non-positive SOC band penalty, linear in the violation.
double penalty(const ConstraintSpec& c, double soc);

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool done = false;
  powertrain::StepOutcome info;
  double soc_before = 0.0;
  double soc_after = 0.0;
  bool violation = false;   // SOC left the band or the battery could not deliver
  bool infeasible = false;  // PowerInfeasible from the plant
  bool terminated = false;  // episode ended by a violation rather than the cycle end
};

// Episodic finite MDP as seen by the tabular learners.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t state_count() const = 0;
  virtual std::size_t action_count() const = 0;
  // `start` is the initial SOC for vehicle environments; fixtures ignore it.
  virtual std::size_t reset(double start) = 0;
  virtual Transition step(std::size_t action) = 0;
};

using Plant = std::variant<powertrain::PhevPlant, powertrain::FcevPlant>;

struct EnvSettings {
  std::size_t pdem_points = 21;
  std::size_t soc_points = 21;
  std::size_t action_points = 11;
  // SOC grid bounds; the constraint band when unset (lo >= hi)
  double soc_grid_lo = 0.0;
  double soc_grid_hi = 0.0;
  RewardSpec reward;
  ConstraintSpec constraints;
};

// Drive-cycle episode over a PHEV or FCEV plant. One instance is
// single-threaded; plant and cycle are shared read-only.
class EmsEnvironment : public Environment {
 public:
  EmsEnvironment(std::shared_ptr<const Plant> plant, std::shared_ptr<const cycle::DriveCycle> cycle,
                 const EnvSettings& settings);

  std::size_t state_count() const override { return states_.size(); }
  std::size_t action_count() const override { return actions_.grid.size(); }
  std::size_t reset(double start_soc) override;
  Transition step(std::size_t action) override;
  // Applies a physical command (split fraction or fuel-cell watts) directly;
  // the transition reports the nearest action index.
  Transition step_command(double command);

  bool done() const { return done_; }
  std::size_t step_index() const { return k_; }
  double soc() const { return soc_; }
  double soc_start() const { return soc_start_; }
  double total_fuel() const { return fuel_total_; }
  std::size_t encode(double pdem, double soc) const;

  const StateSpec& state_spec() const { return states_; }
  const ActionSpec& action_spec() const { return actions_; }
  const RewardSpec& reward_spec() const { return settings_.reward; }
  const ConstraintSpec& constraints() const { return settings_.constraints; }
  const std::vector<powertrain::WheelDemand>& demands() const { return demands_; }
  const cycle::DriveCycle& drive_cycle() const { return *cycle_; }
  const Plant& plant() const { return *plant_; }
  bool is_phev() const { return std::holds_alternative<powertrain::PhevPlant>(*plant_); }

  // Command of the no-battery-management reference policy at the current
  // step: engine-only for the PHEV, load following for the FCEV.
  double baseline_command() const;

 private:
  std::shared_ptr<const Plant> plant_;
  std::shared_ptr<const cycle::DriveCycle> cycle_;
  EnvSettings settings_;
  std::vector<powertrain::WheelDemand> demands_;
  StateSpec states_;
  ActionSpec actions_;
  std::size_t k_ = 0;
  double soc_ = 0.0;
  double soc_start_ = 0.0;
  double fuel_total_ = 0.0;
  bool done_ = true;
};

std::vector<powertrain::WheelDemand> cycle_demands(const powertrain::VehicleParams& p,
                                                   const cycle::DriveCycle& c);

// Electrical motor power the FCEV bus must supply for `demand`.
double fcev_motor_power(const powertrain::FcevPlant& plant, const powertrain::WheelDemand& demand);

}  // namespace emsrl::env

#include "emsrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emsrl/error.hpp"

namespace emsrl::env {

using powertrain::StepOutcome;
using powertrain::WheelDemand;

Grid::Grid(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi), n_(n) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("grid requires finite lo < hi");
  if (n < 2) throw std::invalid_argument("grid requires at least two points");
}

double Grid::point(std::size_t i) const {
  if (i + 1 == n_) return hi_;
  return lo_ + static_cast<double>(i) * (hi_ - lo_) / static_cast<double>(n_ - 1);
}

std::size_t discretize(const Grid& g, double x) {
  if (!(x > g.lo())) return 0;
  if (x >= g.hi()) return g.size() - 1;
  const double pos = (x - g.lo()) / (g.hi() - g.lo()) * static_cast<double>(g.size() - 1);
  const double base = std::floor(pos);
  auto i = static_cast<std::size_t>(base);
  if (pos - base > 0.5) ++i;
  return std::min(i, g.size() - 1);
}

double equivalence_factor(double s, double v_bat, double capacity_ah, double q_lhv) {
  return s * 3600.0 * v_bat * capacity_ah / q_lhv;
}

double RewardSpec::alpha() const {
  return env::equivalence_factor(equivalence_factor, v_bat, capacity_ah, q_lhv);
}

double reward_of(const RewardSpec& spec, const StepOutcome& outcome, double soc_now,
                 double soc_next, double soc_start) {
  switch (spec.kind) {
    case RewardKind::fuel_min:
      return spec.tau - outcome.fuel_g;
    case RewardKind::eq_instant:
      return spec.tau - (outcome.fuel_g + spec.alpha() * (soc_now - soc_next));
    case RewardKind::eq_overall: {
      const double drop = soc_start - soc_next;
      return spec.tau - (outcome.fuel_g + spec.alpha() * drop * drop);
    }
  }
  return spec.tau;
}

double penalty(const ConstraintSpec& c, double soc) {
  if (soc > c.soc_max) return -c.w_dis * (soc - c.soc_max);
  if (soc < c.soc_min) return -c.w_chg * (c.soc_min - soc);
  return 0.0;
}

std::vector<WheelDemand> cycle_demands(const powertrain::VehicleParams& p,
                                       const cycle::DriveCycle& c) {
  std::vector<WheelDemand> out;
  out.reserve(c.size());
  for (std::size_t k = 0; k < c.size(); ++k)
    out.push_back(powertrain::road_load(p, c.speeds()[k], cycle::accel_at(c, k)));
  return out;
}

double fcev_motor_power(const powertrain::FcevPlant& plant, const WheelDemand& demand) {
  const double ratio = plant.vehicle.final_ratio;
  const double speed = demand.speed * ratio;
  const auto lim = powertrain::torque_limits(plant.motor, speed);
  const double torque = std::clamp(demand.torque / ratio, lim.min, lim.max);
  return powertrain::motor_power(torque, speed, powertrain::map_lookup(plant.motor, torque, speed));
}

namespace {

const powertrain::VehicleParams& vehicle_of(const Plant& p) {
  return std::visit([](const auto& plant) -> const powertrain::VehicleParams& { return plant.vehicle; }, p);
}

const powertrain::BatteryModel& battery_of(const Plant& p) {
  return std::visit([](const auto& plant) -> const powertrain::BatteryModel& { return plant.battery; }, p);
}

Grid pdem_grid(const std::vector<WheelDemand>& demands, std::size_t n) {
  auto [lo, hi] = std::minmax_element(demands.begin(), demands.end(),
                                      [](const auto& a, const auto& b) { return a.power < b.power; });
  double a = lo->power;
  double b = hi->power;
  if (!(b > a)) b = a + 1.0;
  return Grid(a, b, n);
}

Grid soc_grid(const EnvSettings& s) {
  if (s.soc_grid_lo < s.soc_grid_hi) return Grid(s.soc_grid_lo, s.soc_grid_hi, s.soc_points);
  return Grid(s.constraints.soc_min, s.constraints.soc_max, s.soc_points);
}

ActionSpec make_action_spec(const Plant& p, std::size_t n) {
  if (const auto* fcev = std::get_if<powertrain::FcevPlant>(&p))
    return {ActionKind::fc_power, Grid(0.0, fcev->fuel_cell.max_power, n)};
  return {ActionKind::torque_split, Grid(0.0, 1.0, n)};
}

}  // namespace

EmsEnvironment::EmsEnvironment(std::shared_ptr<const Plant> plant,
                               std::shared_ptr<const cycle::DriveCycle> cycle,
                               const EnvSettings& settings)
    : plant_(std::move(plant)),
      cycle_(std::move(cycle)),
      settings_(settings),
      demands_(cycle_demands(vehicle_of(*plant_), *cycle_)),
      states_{pdem_grid(demands_, settings.pdem_points), soc_grid(settings)},
      actions_(make_action_spec(*plant_, settings.action_points)) {}

std::size_t EmsEnvironment::encode(double pdem, double soc) const {
  return states_.encode(discretize(states_.pdem, pdem), discretize(states_.soc, soc));
}

std::size_t EmsEnvironment::reset(double start_soc) {
  k_ = 0;
  soc_ = start_soc;
  soc_start_ = start_soc;
  fuel_total_ = 0.0;
  done_ = false;
  return encode(demands_[0].power, soc_);
}

Transition EmsEnvironment::step(std::size_t action) {
  if (action >= actions_.grid.size())
    throw IndexOutOfRange("action index " + std::to_string(action) + " out of range");
  auto tr = step_command(actions_.grid.point(action));
  tr.action = action;
  return tr;
}

Transition EmsEnvironment::step_command(double command) {
  if (done_) throw EpisodeFinished("step called on a finished episode; call reset first");
  Transition tr;
  tr.state = encode(demands_[k_].power, soc_);
  tr.action = discretize(actions_.grid, command);
  tr.soc_before = soc_;

  const double dt = cycle_->dt();
  const auto& battery = battery_of(*plant_);
  const auto& c = settings_.constraints;
  try {
    tr.info = std::visit(
        [&](const auto& plant) {
          if constexpr (std::is_same_v<std::decay_t<decltype(plant)>, powertrain::PhevPlant>)
            return powertrain::phev_plant_step(plant, soc_, command, demands_[k_], dt);
          else
            return powertrain::fcev_plant_step(plant, soc_, command, demands_[k_], dt);
        },
        *plant_);
    tr.soc_after = std::clamp(soc_ + tr.info.delta_soc, battery.soc_floor, battery.soc_ceiling);
    tr.reward = reward_of(settings_.reward, tr.info, soc_, tr.soc_after, soc_start_) +
                penalty(c, tr.soc_after);
    tr.violation = tr.soc_after < c.soc_min || tr.soc_after > c.soc_max;
  } catch (const PowerInfeasible&) {
    // the battery cannot carry the request: no energy flows, full-scale penalty
    tr.info = {};
    tr.infeasible = true;
    tr.violation = true;
    tr.soc_after = soc_;
    tr.reward = reward_of(settings_.reward, tr.info, soc_, soc_, soc_start_) - c.w_chg;
  }

  ++k_;
  soc_ = tr.soc_after;
  fuel_total_ += tr.info.fuel_g;
  tr.terminated = tr.infeasible || (c.terminate_on_violation && tr.violation);
  tr.done = k_ == demands_.size() || tr.terminated;
  done_ = tr.done;
  tr.next_state = encode(demands_[std::min(k_, demands_.size() - 1)].power, soc_);
  return tr;
}

double EmsEnvironment::baseline_command() const {
  if (const auto* fcev = std::get_if<powertrain::FcevPlant>(plant_.get())) {
    const double pm = fcev_motor_power(*fcev, demands_[std::min(k_, demands_.size() - 1)]);
    return std::clamp(pm, 0.0, fcev->fuel_cell.max_power);
  }
  return 1.0;
}

}  // namespace emsrl::env

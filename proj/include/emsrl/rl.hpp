#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "emsrl/env.hpp"

namespace emsrl::rl {

using Rng = std::mt19937_64;

enum class Algorithm { mc, sarsa, qlearning, sarsa_lambda };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

// Dense action values and update counts over (state, action).
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  std::size_t cell(std::size_t s, std::size_t a) const { return s * actions_ + a; }

  double& q(std::size_t s, std::size_t a) { return values_[cell(s, a)]; }
  double q(std::size_t s, std::size_t a) const { return values_[cell(s, a)]; }
  std::span<const double> row(std::size_t s) const {
    return {values_.data() + s * actions_, actions_};
  }
  std::uint64_t visits(std::size_t s, std::size_t a) const { return visits_[cell(s, a)]; }
  void count(std::size_t s, std::size_t a) { ++visits_[cell(s, a)]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<std::uint64_t>& visit_counts() { return visits_; }
  const std::vector<std::uint64_t>& visit_counts() const { return visits_; }

  // First maximizing action (ties broken toward the lowest index).
  std::size_t greedy(std::size_t s) const;
  double max_value(std::size_t s) const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

struct Hyperparams {
  double alpha = 0.1;          // learning rate, (0,1]
  double epsilon = 0.1;        // behaviour exploration rate
  double gamma = 0.99;
  std::size_t episodes = 1000;
  double start_soc = 0.65;
  double lambda = 0.9;         // SARSA(lambda) only
  std::size_t eval_every = 100;
  double eval_epsilon = 0.3;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

std::size_t epsilon_greedy(const QTable& q, std::size_t s, double epsilon, Rng& rng);

// One-step updates. The TD error is multiplied by `td_sign` (always +1 outside
// fault-injection checks). Terminal transitions bootstrap from 0.
void sarsa_update(QTable& q, const env::Transition& t, std::size_t next_action, double alpha,
                  double gamma, double td_sign = 1.0);
void qlearning_update(QTable& q, const env::Transition& t, double alpha, double gamma,
                      double td_sign = 1.0);

// Accumulating traces over (state, action) cells with a sparse active set.
// Traces that decay below `kTraceFloor` are dropped.
class EligibilityTrace {
 public:
  static constexpr double kTraceFloor = 1e-12;

  explicit EligibilityTrace(std::size_t cells = 0);
  void clear();
  void decay(double factor);
  void bump(std::size_t cell);
  double operator[](std::size_t cell) const { return trace_[cell]; }
  const std::vector<std::size_t>& active() const { return active_; }

 private:
  std::vector<double> trace_;
  std::vector<std::size_t> active_;
};

struct CurvePoint {
  std::size_t episode = 0;
  double reward_sum = 0.0;
  double fuel_g = 0.0;
  double delta_soc = 0.0;  // soc_start - soc_end
  std::size_t length = 0;
  bool terminated = false;  // ended early on a constraint violation
};

using LearningCurve = std::vector<CurvePoint>;

struct EpisodeTrace {
  CurvePoint summary;
  double soc_start = 0.0;
  double soc_end = 0.0;
  std::vector<double> soc;                         // soc after each step, soc_start first
  std::vector<std::size_t> actions;
  std::vector<powertrain::StepOutcome> points;     // empty unless requested
};

struct TrainOptions {
  bool keep_eval_soc = true;
  bool keep_eval_points = false;
  double td_sign = 1.0;
  // Called after every training episode (1-based episode number).
  std::function<void(std::size_t, const QTable&)> on_episode;
};

struct TrainResult {
  QTable q;
  LearningCurve curve;
  std::vector<EpisodeTrace> evaluations;  // one per curve point
  EpisodeTrace greedy;                    // epsilon = 0 rollout after training
  std::vector<std::size_t> updates_per_episode;
};

// Runs one episode with epsilon-greedy actions and no learning.
EpisodeTrace rollout(env::Environment& env, const QTable& q, double start, double epsilon, Rng& rng,
                     bool keep_soc, bool keep_points);

TrainResult train(Algorithm algorithm, env::Environment& env, const Hyperparams& hyper,
                  const TrainOptions& options = {});

// Per-algorithm entry points.
std::pair<QTable, LearningCurve> mc_train(env::Environment& env, const Hyperparams& hyper);
std::pair<QTable, LearningCurve> sarsa_train(env::Environment& env, const Hyperparams& hyper);
std::pair<QTable, LearningCurve> qlearning_train(env::Environment& env, const Hyperparams& hyper);
std::pair<QTable, LearningCurve> sarsa_lambda_train(env::Environment& env, const Hyperparams& hyper);

// Training and evaluation use distinct streams derived from one seed.
Rng training_rng(std::uint64_t seed);
Rng evaluation_rng(std::uint64_t seed);

}  // namespace emsrl::rl

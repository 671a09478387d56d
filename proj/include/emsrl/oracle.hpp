#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "emsrl/env.hpp"
#include "emsrl/rl.hpp"

// Exact solutions of small explicit MDPs, used as ground truth for the
// tabular learners.
namespace emsrl::oracle {

struct Outcome {
  std::size_t next = 0;
  double prob = 1.0;
};

struct ExplicitMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  // transitions[s * n_actions + a] lists the successor distribution
  std::vector<std::vector<Outcome>> transitions;
  std::vector<double> reward;  // per (s, a)
  std::vector<bool> terminal;
  double gamma = 0.9;

  std::size_t cell(std::size_t s, std::size_t a) const { return s * n_actions + a; }
  void set(std::size_t s, std::size_t a, std::size_t next, double r) {
    transitions[cell(s, a)] = {{next, 1.0}};
    reward[cell(s, a)] = r;
  }
  // Throws std::invalid_argument on malformed transitions or rewards.
  void validate() const;
};

ExplicitMdp make_mdp(std::size_t n_states, std::size_t n_actions, double gamma);

struct Solution {
  std::vector<double> v;  // per state
  std::vector<double> q;  // per (s, a)
  std::size_t iterations = 0;
};

// Bellman optimality iteration until the max-norm change drops below `tol`.
// Terminal states are absorbing with value 0.
Solution value_iteration(const ExplicitMdp& mdp, double tol);

// Action values of a fixed stochastic policy (`policy` holds per (s, a)
// probabilities), iterated until the max-norm change drops below `tol`.
std::vector<double> policy_evaluation(const ExplicitMdp& mdp, const std::vector<double>& policy,
                                      double tol);

// Per (s, a) probabilities of the epsilon-greedy policy over `q` (ties to the
// lowest index, exploration uniform over all actions).
std::vector<double> epsilon_greedy_policy(const ExplicitMdp& mdp, const std::vector<double>& q,
                                          double epsilon);

// Max-norm Bellman residual |T v - v|.
double bellman_residual(const ExplicitMdp& mdp, const std::vector<double>& v);

// Chain of n states: action 0 moves left (self-loop at 0), action 1 moves
// right; reward -1 per step; state n-1 is terminal.
ExplicitMdp build_chain_mdp(std::size_t n, double gamma = 0.99);

// Deterministic MDP with distinct random rewards, used for argmax checks.
ExplicitMdp build_random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                             std::uint64_t seed);

// Environment adapter. Starts from `start` or, when unset, a uniformly
// drawn non-terminal state; episodes are truncated after `max_steps`.
class MdpEnvironment : public env::Environment {
 public:
  MdpEnvironment(ExplicitMdp mdp, std::optional<std::size_t> start, std::uint64_t seed,
                 std::size_t max_steps = 1000);

  std::size_t state_count() const override { return mdp_.n_states; }
  std::size_t action_count() const override { return mdp_.n_actions; }
  std::size_t reset(double) override;
  env::Transition step(std::size_t action) override;

 private:
  ExplicitMdp mdp_;
  std::optional<std::size_t> start_;
  rl::Rng rng_;
  std::size_t max_steps_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  bool done_ = true;
};

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Fixture suite behind `oracle-check`: Q-learning against value iteration,
// SARSA(0) against SARSA, Monte Carlo convergence. `td_sign` = -1 injects a
// sign fault into every learner.
std::vector<CheckResult> run_fixture_checks(double td_sign = 1.0);

}  // namespace emsrl::oracle

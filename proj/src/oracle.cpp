#include "emsrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emsrl/error.hpp"

namespace emsrl::oracle {

void ExplicitMdp::validate() const {
  const std::size_t cells = n_states * n_actions;
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("empty MDP");
  if (transitions.size() != cells || reward.size() != cells || terminal.size() != n_states)
    throw std::invalid_argument("MDP table sizes do not match state/action counts");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma outside [0,1]");
  for (std::size_t c = 0; c < cells; ++c) {
    if (!std::isfinite(reward[c])) throw std::invalid_argument("non-finite reward");
    if (terminal[c / n_actions]) continue;
    double total = 0.0;
    for (const auto& o : transitions[c]) {
      if (o.next >= n_states) throw std::invalid_argument("transition leaves the state space");
      if (!(o.prob >= 0.0)) throw std::invalid_argument("negative transition probability");
      total += o.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("transition probabilities do not sum to 1");
  }
}

ExplicitMdp make_mdp(std::size_t n_states, std::size_t n_actions, double gamma) {
  ExplicitMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.transitions.assign(n_states * n_actions, {});
  m.reward.assign(n_states * n_actions, 0.0);
  m.terminal.assign(n_states, false);
  m.gamma = gamma;
  return m;
}

namespace {

double backup(const ExplicitMdp& m, std::size_t s, std::size_t a, const std::vector<double>& v) {
  if (m.terminal[s]) return 0.0;
  const auto c = m.cell(s, a);
  double expected = 0.0;
  for (const auto& o : m.transitions[c]) expected += o.prob * v[o.next];
  return m.reward[c] + m.gamma * expected;
}

}  // namespace

Solution value_iteration(const ExplicitMdp& mdp, double tol) {
  mdp.validate();
  if (!(mdp.gamma < 1.0)) throw std::invalid_argument("value iteration requires gamma < 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  Solution sol;
  sol.v.assign(mdp.n_states, 0.0);
  sol.q.assign(mdp.n_states * mdp.n_actions, 0.0);
  while (true) {
    ++sol.iterations;
    double change = 0.0;
    std::vector<double> next(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      double best = -INFINITY;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const double qa = backup(mdp, s, a, sol.v);
        sol.q[mdp.cell(s, a)] = qa;
        best = std::max(best, qa);
      }
      next[s] = best;
      change = std::max(change, std::abs(best - sol.v[s]));
    }
    sol.v = std::move(next);
    if (change < tol) break;
  }
  // recompute Q from the final V so that V = max_a Q holds exactly
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      sol.q[mdp.cell(s, a)] = backup(mdp, s, a, sol.v);
      best = std::max(best, sol.q[mdp.cell(s, a)]);
    }
    sol.v[s] = best;
  }
  return sol;
}

std::vector<double> policy_evaluation(const ExplicitMdp& mdp, const std::vector<double>& policy,
                                      double tol) {
  mdp.validate();
  if (!(mdp.gamma < 1.0)) throw std::invalid_argument("policy evaluation requires gamma < 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (policy.size() != mdp.n_states * mdp.n_actions) throw std::invalid_argument("policy size mismatch");
  std::vector<double> v(mdp.n_states, 0.0);
  std::vector<double> q(policy.size(), 0.0);
  while (true) {
    double change = 0.0;
    std::vector<double> next(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      double value = 0.0;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        q[mdp.cell(s, a)] = backup(mdp, s, a, v);
        value += policy[mdp.cell(s, a)] * q[mdp.cell(s, a)];
      }
      next[s] = mdp.terminal[s] ? 0.0 : value;
      change = std::max(change, std::abs(next[s] - v[s]));
    }
    v = std::move(next);
    if (change < tol) break;
  }
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    for (std::size_t a = 0; a < mdp.n_actions; ++a) q[mdp.cell(s, a)] = backup(mdp, s, a, v);
  return q;
}

std::vector<double> epsilon_greedy_policy(const ExplicitMdp& mdp, const std::vector<double>& q,
                                          double epsilon) {
  std::vector<double> pi(mdp.n_states * mdp.n_actions, epsilon / static_cast<double>(mdp.n_actions));
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < mdp.n_actions; ++a)
      if (q[mdp.cell(s, a)] > q[mdp.cell(s, best)]) best = a;
    pi[mdp.cell(s, best)] += 1.0 - epsilon;
  }
  return pi;
}

double bellman_residual(const ExplicitMdp& mdp, const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    double best = -INFINITY;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) best = std::max(best, backup(mdp, s, a, v));
    worst = std::max(worst, std::abs(best - v[s]));
  }
  return worst;
}

ExplicitMdp build_chain_mdp(std::size_t n, double gamma) {
  if (n < 2) throw std::invalid_argument("chain needs at least two states");
  auto m = make_mdp(n, 2, gamma);
  for (std::size_t s = 0; s < n; ++s) {
    m.set(s, 0, s == 0 ? 0 : s - 1, -1.0);
    m.set(s, 1, std::min(s + 1, n - 1), -1.0);
  }
  m.terminal[n - 1] = true;
  return m;
}

ExplicitMdp build_random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                             std::uint64_t seed) {
  auto m = make_mdp(n_states, n_actions, gamma);
  rl::Rng rng(seed);
  std::uniform_int_distribution<std::size_t> next(0, n_states - 1);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) m.set(s, a, next(rng), reward(rng));
  return m;
}

MdpEnvironment::MdpEnvironment(ExplicitMdp mdp, std::optional<std::size_t> start,
                               std::uint64_t seed, std::size_t max_steps)
    : mdp_(std::move(mdp)), start_(start), rng_(seed), max_steps_(max_steps) {
  mdp_.validate();
  if (start_ && *start_ >= mdp_.n_states) throw std::invalid_argument("start state out of range");
  if (std::all_of(mdp_.terminal.begin(), mdp_.terminal.end(), [](bool t) { return t; }))
    throw std::invalid_argument("MDP has no non-terminal state");
}

std::size_t MdpEnvironment::reset(double) {
  if (start_) {
    state_ = *start_;
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, mdp_.n_states - 1);
    do state_ = pick(rng_);
    while (mdp_.terminal[state_]);
  }
  steps_ = 0;
  done_ = mdp_.terminal[state_];
  return state_;
}

env::Transition MdpEnvironment::step(std::size_t action) {
  if (done_) throw EpisodeFinished("fixture episode already finished");
  if (action >= mdp_.n_actions) throw IndexOutOfRange("action out of range");
  env::Transition t;
  t.state = state_;
  t.action = action;
  const auto c = mdp_.cell(state_, action);
  t.reward = mdp_.reward[c];
  const auto& outs = mdp_.transitions[c];
  std::size_t next = outs.front().next;
  if (outs.size() > 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng_);
    next = outs.back().next;
    for (const auto& o : outs) {
      if (x < o.prob) {
        next = o.next;
        break;
      }
      x -= o.prob;
    }
  }
  state_ = next;
  ++steps_;
  t.next_state = next;
  t.done = mdp_.terminal[next] || steps_ >= max_steps_;
  done_ = t.done;
  return t;
}

std::vector<CheckResult> run_fixture_checks(double td_sign) {
  std::vector<CheckResult> out;
  rl::TrainOptions opts;
  opts.keep_eval_soc = false;
  opts.td_sign = td_sign;

  {
    const auto chain = build_chain_mdp(5, 0.99);
    const auto sol = value_iteration(chain, 1e-9);
    MdpEnvironment env(chain, 0, 11);
    rl::Hyperparams h{.alpha = 0.1, .epsilon = 0.2, .gamma = 0.99, .episodes = 5000, .eval_every = 0, .seed = 3};
    const auto r = rl::train(rl::Algorithm::qlearning, env, h, opts);
    double worst = 0.0;
    for (std::size_t s = 0; s + 1 < chain.n_states; ++s)
      worst = std::max(worst, std::abs(r.q.max_value(s) - sol.v[s]));
    out.push_back({"qlearning_vs_value_iteration_chain5", worst, 1e-6, worst < 1e-6});
  }

  {
    const auto chain = build_chain_mdp(5, 0.99);
    rl::Hyperparams h{.alpha = 0.1, .epsilon = 0.2, .gamma = 0.99, .episodes = 100, .lambda = 0.0,
                      .eval_every = 0, .seed = 5};
    std::vector<std::vector<double>> sarsa_traj, lambda_traj;
    auto o1 = opts;
    o1.on_episode = [&](std::size_t, const rl::QTable& q) { sarsa_traj.push_back(q.values()); };
    MdpEnvironment e1(chain, 0, 13);
    rl::train(rl::Algorithm::sarsa, e1, h, o1);
    auto o2 = opts;
    o2.on_episode = [&](std::size_t, const rl::QTable& q) { lambda_traj.push_back(q.values()); };
    MdpEnvironment e2(chain, 0, 13);
    rl::train(rl::Algorithm::sarsa_lambda, e2, h, o2);
    double worst = 0.0;
    for (std::size_t i = 0; i < sarsa_traj.size(); ++i)
      for (std::size_t c = 0; c < sarsa_traj[i].size(); ++c)
        worst = std::max(worst, std::abs(sarsa_traj[i][c] - lambda_traj[i][c]));
    const bool same = sarsa_traj == lambda_traj && !sarsa_traj.empty();
    out.push_back({"sarsa_lambda0_equals_sarsa", worst, 0.0, same});
  }

  {
    const auto chain = build_chain_mdp(5, 0.9);
    const auto sol = value_iteration(chain, 1e-12);
    MdpEnvironment env(chain, std::nullopt, 17);
    rl::Hyperparams h{.alpha = 0.005, .epsilon = 0.2, .gamma = 0.9, .episodes = 200000, .eval_every = 0, .seed = 7};
    // iterate average over the second half smooths the constant-step noise
    std::vector<double> mean(chain.n_states * chain.n_actions, 0.0);
    std::size_t averaged = 0;
    auto o = opts;
    o.on_episode = [&](std::size_t ep, const rl::QTable& q) {
      if (ep <= h.episodes / 2) return;
      ++averaged;
      for (std::size_t c = 0; c < mean.size(); ++c)
        mean[c] += (q.values()[c] - mean[c]) / static_cast<double>(averaged);
    };
    const auto r = rl::train(rl::Algorithm::mc, env, h, o);
    // constant-epsilon Monte Carlo estimates the values of its own
    // epsilon-greedy policy; its greedy part must still be optimal
    const auto exact = policy_evaluation(chain, epsilon_greedy_policy(chain, r.q.values(), h.epsilon), 1e-12);
    double worst = 0.0;
    bool optimal = true;
    for (std::size_t s = 0; s + 1 < chain.n_states; ++s) {
      for (std::size_t a = 0; a < chain.n_actions; ++a)
        worst = std::max(worst, std::abs(mean[chain.cell(s, a)] - exact[chain.cell(s, a)]));
      const std::size_t best = sol.q[chain.cell(s, 1)] > sol.q[chain.cell(s, 0)] ? 1 : 0;
      optimal = optimal && r.q.greedy(s) == best;
    }
    out.push_back({"mc_converges_to_policy_values_chain5", worst, 0.05, optimal && worst < 0.05});
  }
  return out;
}

}  // namespace emsrl::oracle

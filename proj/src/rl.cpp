#include "emsrl/rl.hpp"

#include <algorithm>
#include <cmath>

#include "emsrl/error.hpp"

namespace emsrl::rl {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "mc") return Algorithm::mc;
  if (name == "sarsa") return Algorithm::sarsa;
  if (name == "qlearning") return Algorithm::qlearning;
  if (name == "sarsa_lambda") return Algorithm::sarsa_lambda;
  throw ConfigError("algorithm.name", "unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mc: return "mc";
    case Algorithm::sarsa: return "sarsa";
    case Algorithm::qlearning: return "qlearning";
    case Algorithm::sarsa_lambda: return "sarsa_lambda";
  }
  return "?";
}

QTable::QTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), values_(states * actions, 0.0), visits_(states * actions, 0) {}

std::size_t QTable::greedy(std::size_t s) const {
  const auto r = row(s);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

double QTable::max_value(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

void Hyperparams::validate() const {
  auto in = [](double v, double lo, double hi, bool lo_open, const char* key) {
    const bool ok = std::isfinite(v) && (lo_open ? v > lo : v >= lo) && v <= hi;
    if (!ok) throw ConfigError(key, "out of range");
  };
  in(alpha, 0.0, 1.0, true, "algorithm.alpha");
  in(epsilon, 0.0, 1.0, false, "algorithm.epsilon");
  in(gamma, 0.0, 1.0, false, "algorithm.gamma");
  in(start_soc, 0.0, 1.0, false, "env.start_soc");
  in(lambda, 0.0, 1.0, false, "algorithm.lambda");
  in(eval_epsilon, 0.0, 1.0, false, "algorithm.eval_epsilon");
}

std::size_t epsilon_greedy(const QTable& q, std::size_t s, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.actions() - 1);
    return pick(rng);
  }
  return q.greedy(s);
}

void sarsa_update(QTable& q, const env::Transition& t, std::size_t next_action, double alpha,
                  double gamma, double td_sign) {
  const double bootstrap = t.done ? 0.0 : gamma * q.q(t.next_state, next_action);
  double& cell = q.q(t.state, t.action);
  const double td = td_sign * (t.reward + bootstrap - cell);
  cell += alpha * td;
  q.count(t.state, t.action);
}

void qlearning_update(QTable& q, const env::Transition& t, double alpha, double gamma,
                      double td_sign) {
  const double bootstrap = t.done ? 0.0 : gamma * q.max_value(t.next_state);
  double& cell = q.q(t.state, t.action);
  const double td = td_sign * (t.reward + bootstrap - cell);
  cell += alpha * td;
  q.count(t.state, t.action);
}

EligibilityTrace::EligibilityTrace(std::size_t cells) : trace_(cells, 0.0) {}

void EligibilityTrace::clear() {
  for (auto c : active_) trace_[c] = 0.0;
  active_.clear();
}

void EligibilityTrace::decay(double factor) {
  std::size_t kept = 0;
  for (auto c : active_) {
    double& e = trace_[c];
    e *= factor;
    if (e < kTraceFloor) {
      e = 0.0;
    } else {
      active_[kept++] = c;
    }
  }
  active_.resize(kept);
}

void EligibilityTrace::bump(std::size_t cell) {
  if (trace_[cell] == 0.0) active_.push_back(cell);
  trace_[cell] += 1.0;
}

Rng training_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7261696eu};
  return Rng(seq);
}

Rng evaluation_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6576616cu};
  return Rng(seq);
}

EpisodeTrace rollout(env::Environment& env, const QTable& q, double start, double epsilon, Rng& rng,
                     bool keep_soc, bool keep_points) {
  EpisodeTrace tr;
  std::size_t s = env.reset(start);
  bool first = true;
  while (true) {
    const std::size_t a = epsilon_greedy(q, s, epsilon, rng);
    const auto t = env.step(a);
    if (first) {
      tr.soc_start = t.soc_before;
      if (keep_soc) tr.soc.push_back(t.soc_before);
      first = false;
    }
    tr.summary.reward_sum += t.reward;
    tr.summary.fuel_g += t.info.fuel_g;
    ++tr.summary.length;
    tr.soc_end = t.soc_after;
    if (keep_soc) {
      tr.soc.push_back(t.soc_after);
      tr.actions.push_back(a);
    }
    if (keep_points) tr.points.push_back(t.info);
    if (t.done) {
      tr.summary.terminated = t.terminated;
      break;
    }
    s = t.next_state;
  }
  tr.summary.delta_soc = tr.soc_start - tr.soc_end;
  return tr;
}

namespace {

struct Learner {
  env::Environment& env;
  const Hyperparams& hp;
  const TrainOptions& opt;
  QTable& q;
  Rng& rng;

  std::size_t mc_episode() {
    struct Step {
      std::size_t s, a;
      double r;
    };
    std::vector<Step> path;
    std::size_t s = env.reset(hp.start_soc);
    while (true) {
      const std::size_t a = epsilon_greedy(q, s, hp.epsilon, rng);
      const auto t = env.step(a);
      path.push_back({s, a, t.reward});
      if (t.done) break;
      s = t.next_state;
    }
    // every-visit returns, accumulated backwards
    std::vector<double> returns(path.size());
    double g = 0.0;
    for (std::size_t i = path.size(); i-- > 0;) {
      g = path[i].r + hp.gamma * g;
      returns[i] = g;
    }
    for (std::size_t i = 0; i < path.size(); ++i) {
      double& cell = q.q(path[i].s, path[i].a);
      cell += hp.alpha * (opt.td_sign * (returns[i] - cell));
      q.count(path[i].s, path[i].a);
    }
    return path.size();
  }

  std::size_t sarsa_episode() {
    std::size_t s = env.reset(hp.start_soc);
    std::size_t a = epsilon_greedy(q, s, hp.epsilon, rng);
    std::size_t steps = 0;
    while (true) {
      const auto t = env.step(a);
      ++steps;
      if (t.done) {
        sarsa_update(q, t, 0, hp.alpha, hp.gamma, opt.td_sign);
        return steps;
      }
      const std::size_t next = epsilon_greedy(q, t.next_state, hp.epsilon, rng);
      sarsa_update(q, t, next, hp.alpha, hp.gamma, opt.td_sign);
      s = t.next_state;
      a = next;
    }
  }

  std::size_t qlearning_episode() {
    std::size_t s = env.reset(hp.start_soc);
    std::size_t steps = 0;
    while (true) {
      const std::size_t a = epsilon_greedy(q, s, hp.epsilon, rng);
      const auto t = env.step(a);
      ++steps;
      qlearning_update(q, t, hp.alpha, hp.gamma, opt.td_sign);
      if (t.done) return steps;
      s = t.next_state;
    }
  }

  std::size_t sarsa_lambda_episode(EligibilityTrace& trace) {
    trace.clear();
    std::size_t s = env.reset(hp.start_soc);
    std::size_t a = epsilon_greedy(q, s, hp.epsilon, rng);
    std::size_t steps = 0;
    auto& values = q.values();
    while (true) {
      const auto t = env.step(a);
      ++steps;
      std::size_t next = 0;
      double bootstrap = 0.0;
      if (!t.done) {
        next = epsilon_greedy(q, t.next_state, hp.epsilon, rng);
        bootstrap = hp.gamma * q.q(t.next_state, next);
      }
      trace.decay(hp.gamma * hp.lambda);
      trace.bump(q.cell(s, a));
      const double td = opt.td_sign * (t.reward + bootstrap - q.q(s, a));
      for (auto c : trace.active()) values[c] += hp.alpha * td * trace[c];
      q.count(s, a);
      if (t.done) return steps;
      s = t.next_state;
      a = next;
    }
  }
};

}  // namespace

TrainResult train(Algorithm algorithm, env::Environment& env, const Hyperparams& hyper,
                  const TrainOptions& options) {
  hyper.validate();
  TrainResult out;
  out.q = QTable(env.state_count(), env.action_count());
  Rng rng = training_rng(hyper.seed);
  Rng eval_rng = evaluation_rng(hyper.seed);
  Learner learner{env, hyper, options, out.q, rng};
  EligibilityTrace trace(algorithm == Algorithm::sarsa_lambda ? out.q.values().size() : 0);

  out.updates_per_episode.reserve(hyper.episodes);
  for (std::size_t ep = 1; ep <= hyper.episodes; ++ep) {
    std::size_t n = 0;
    switch (algorithm) {
      case Algorithm::mc: n = learner.mc_episode(); break;
      case Algorithm::sarsa: n = learner.sarsa_episode(); break;
      case Algorithm::qlearning: n = learner.qlearning_episode(); break;
      case Algorithm::sarsa_lambda: n = learner.sarsa_lambda_episode(trace); break;
    }
    out.updates_per_episode.push_back(n);
    if (options.on_episode) options.on_episode(ep, out.q);
    if (hyper.eval_every > 0 && ep % hyper.eval_every == 0) {
      auto ev = rollout(env, out.q, hyper.start_soc, hyper.eval_epsilon, eval_rng,
                        options.keep_eval_soc, options.keep_eval_points);
      ev.summary.episode = ep;
      out.curve.push_back(ev.summary);
      out.evaluations.push_back(std::move(ev));
    }
  }
  out.greedy = rollout(env, out.q, hyper.start_soc, 0.0, eval_rng, true, true);
  out.greedy.summary.episode = hyper.episodes;
  return out;
}

namespace {
std::pair<QTable, LearningCurve> train_pair(Algorithm a, env::Environment& env, const Hyperparams& h) {
  TrainOptions opts;
  opts.keep_eval_soc = false;
  auto r = train(a, env, h, opts);
  return {std::move(r.q), std::move(r.curve)};
}
}  // namespace

std::pair<QTable, LearningCurve> mc_train(env::Environment& env, const Hyperparams& hyper) {
  return train_pair(Algorithm::mc, env, hyper);
}
std::pair<QTable, LearningCurve> sarsa_train(env::Environment& env, const Hyperparams& hyper) {
  return train_pair(Algorithm::sarsa, env, hyper);
}
std::pair<QTable, LearningCurve> qlearning_train(env::Environment& env, const Hyperparams& hyper) {
  return train_pair(Algorithm::qlearning, env, hyper);
}
std::pair<QTable, LearningCurve> sarsa_lambda_train(env::Environment& env, const Hyperparams& hyper) {
  return train_pair(Algorithm::sarsa_lambda, env, hyper);
}

}  // namespace emsrl::rl

#pragma once

// Episode driver and greedy goal-fraction evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "otlpp/agents.hpp"
#include "otlpp/common.hpp"
#include "otlpp/dqn.hpp"
#include "otlpp/env.hpp"

namespace otlpp {

// Plays one episode. `choose(features)` returns the agent's action and
// `observe(transition, status)` sees every step. Returns the final status.
template <class Choose, class Observe>
Status play_episode(const EnvConfig& cfg, const BehaviorParams& mate, std::uint64_t env_seed,
                    Choose&& choose, Observe&& observe) {
  auto [world, s] = reset(env_seed, cfg);
  while (true) {
    Action a = choose(s);
    Action mate_action = teammate_policy(mate, world, cfg);
    StepResult r = step(std::move(world), a, mate_action, cfg);
    Transition t{s, index_of(a), reward(r.status), r.features, r.status != Status::InGame};
    observe(t, r.status);
    if (r.status != Status::InGame) return r.status;
    world = std::move(r.world);
    s = r.features;
  }
}

struct EvalResult {
  std::string teammate;
  std::string policy_id;
  std::size_t games = 0;
  std::size_t goals = 0;
  double goal_fraction = 0.0;
  std::vector<Status> statuses;
  std::uint64_t seed = 0;
};

// Game g is played on environment seed split_seed(seed, g).
inline EvalResult eval_goal_fraction(const Policy& policy, const std::string& teammate_name,
                                     const BehaviorParams& mate, std::size_t n_games, std::uint64_t seed,
                                     const EnvConfig& cfg, std::string policy_id = {}) {
  if (n_games == 0) throw ConfigError("eval: n_games must be >= 1");
  EvalResult out;
  out.teammate = teammate_name;
  out.policy_id = std::move(policy_id);
  out.games = n_games;
  out.seed = seed;
  out.statuses.reserve(n_games);
  for (std::size_t g = 0; g < n_games; ++g) {
    Status st = play_episode(
        cfg, mate, split_seed(seed, g), [&](const FeatureVector& s) { return policy.act(s); },
        [](const Transition&, Status) {});
    out.statuses.push_back(st);
    if (st == Status::Goal) ++out.goals;
  }
  out.goal_fraction = static_cast<double>(out.goals) / static_cast<double>(n_games);
  return out;
}

}  // namespace otlpp

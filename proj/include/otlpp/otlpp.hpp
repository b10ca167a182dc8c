#pragma once

// Library construction, teammate identification, parameter-sharing transfer
// and post-transfer learning.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otlpp/agents.hpp"
#include "otlpp/beliefs.hpp"
#include "otlpp/common.hpp"
#include "otlpp/dqn.hpp"
#include "otlpp/env.hpp"
#include "otlpp/eval.hpp"
#include "otlpp/model.hpp"

namespace otlpp {

struct TransferSpec {
  enum class Mode { AllLayers, ShallowOnly };
  Mode mode = Mode::AllLayers;
  std::size_t shallow_layers = 1;  // k, used by ShallowOnly
  bool freeze_shallow = false;

  static TransferSpec all_layers(bool freeze = false) { return {Mode::AllLayers, 0, freeze}; }
  static TransferSpec shallow_only(std::size_t k, bool freeze = false) {
    return {Mode::ShallowOnly, k, freeze};
  }

  std::size_t copied_layers(std::size_t num_layers) const {
    return mode == Mode::AllLayers ? num_layers : shallow_layers;
  }

  void validate(std::size_t num_layers) const {
    if (mode == Mode::ShallowOnly && (shallow_layers == 0 || shallow_layers >= num_layers))
      throw ConfigError("transfer: ShallowOnly(k) needs 1 <= k < number of layers");
  }
};

struct OtlppConfig {
  EnvConfig env;
  DqnConfig dqn;
  // Exploration start after transfer; the rest of the schedule is dqn.schedule.
  double post_transfer_epsilon_start = 0.2;
  double eta = 0.10;
  // 4.0 field units in a 52.5-unit half court, rescaled to the unit field.
  double sigma = 4.0 / 52.5;
  std::size_t model_cap = TeammateModel::kDefaultCap;
  IdentificationCriterion criterion = IdentificationCriterion::fixed_games(25);
  std::size_t identification_max_games = 200;
  TransferSpec transfer;
  std::size_t library_episodes = 1500;
  std::size_t post_transfer_episodes = 600;
  std::size_t eval_interval = 100;
  std::size_t eval_games = 200;
  bool leave_one_out = true;
  bool seed_replay_with_identification = false;
  std::uint64_t seed = 1;

  void validate() const {
    env.validate();
    dqn.validate();
    criterion.validate();
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("otlpp: eta must lie in (0, 1)");
    if (!(sigma > 0.0)) throw ConfigError("otlpp: sigma must be positive");
    if (!(post_transfer_epsilon_start >= dqn.schedule.end && post_transfer_epsilon_start <= 1.0))
      throw ConfigError("otlpp: post-transfer epsilon must lie in [epsilon_end, 1]");
    if (library_episodes < 1 || post_transfer_episodes < 1 || identification_max_games < 1)
      throw ConfigError("otlpp: episode budgets must be >= 1");
    if (eval_interval < 1 || eval_games < 1) throw ConfigError("otlpp: eval interval/games must be >= 1");
    if (model_cap < 1) throw ConfigError("otlpp: model cap must be >= 1");
    transfer.validate(dqn.layer_dims().size() - 1);
  }

  DqnConfig post_transfer_dqn() const {
    DqnConfig c = dqn;
    c.schedule.start = post_transfer_epsilon_start;
    return c;
  }
};

struct EvalPoint {
  std::size_t episode = 0;
  double goal_fraction = 0.0;
};

struct TrainingLog {
  std::vector<Status> outcomes;
  std::vector<EvalPoint> curve;
  std::uint64_t steps = 0;
};

// Trains `agent` alongside the given teammate for `episodes` episodes.
// Evaluates the greedy policy before episode 0, every `eval_interval`
// episodes, and after the last one (when eval_games > 0). Training episode e
// runs on environment seed split_seed(seed, e).
template <class OnTransition>
TrainingLog train_with_teammate(DqnAgent& agent, const std::string& mate_name, const BehaviorParams& mate,
                                const EnvConfig& env, std::size_t episodes, std::uint64_t seed,
                                std::size_t eval_interval, std::size_t eval_games, std::uint64_t eval_seed,
                                OnTransition&& on_transition) {
  TrainingLog log;
  auto evaluate = [&](std::size_t e) {
    if (eval_games == 0) return;
    auto r = eval_goal_fraction(agent.snapshot(), mate_name, mate, eval_games, eval_seed, env);
    log.curve.push_back({e, r.goal_fraction});
  };
  for (std::size_t e = 0; e < episodes; ++e) {
    if (eval_interval > 0 && e % eval_interval == 0) evaluate(e);
    Status st = play_episode(
        env, mate, split_seed(seed, e), [&](const FeatureVector& s) { return agent.act(s, true); },
        [&](const Transition& t, Status) {
          on_transition(t);
          agent.train_step(t);
          ++log.steps;
        });
    log.outcomes.push_back(st);
  }
  evaluate(episodes);
  return log;
}

struct LibraryBuildStats {
  std::size_t episodes = 0;
  std::uint64_t transitions = 0;
  std::uint64_t updates = 0;
  std::size_t goals = 0;
};

// Trains a DQN with the teammate, derives the policy snapshot and fits the
// nearest-neighbor model to every transition collected on the way.
inline LibraryEntry learn_about_prior_teammate(const std::string& name, const BehaviorParams& mate,
                                               const OtlppConfig& cfg, std::uint64_t seed,
                                               LibraryBuildStats* stats = nullptr) {
  cfg.validate();
  mate.validate();
  DqnAgent agent(cfg.dqn, split_seed(seed, 0));
  std::vector<Transition> data;
  auto log = train_with_teammate(agent, name, mate, cfg.env, cfg.library_episodes, split_seed(seed, 1), 0, 0, 0,
                                 [&](const Transition& t) { data.push_back(t); });
  if (stats) {
    stats->episodes = cfg.library_episodes;
    stats->transitions = data.size();
    stats->updates = agent.updates();
    stats->goals = static_cast<std::size_t>(std::count(log.outcomes.begin(), log.outcomes.end(), Status::Goal));
  }
  auto model = std::make_shared<const TeammateModel>(
      TeammateModel::build(data, cfg.sigma, cfg.model_cap, split_seed(seed, 2)));
  return LibraryEntry{name, agent.snapshot(), std::move(model)};
}

// Fresh agent whose online (and target) network is seeded from the most
// likely entry's source network according to `spec`.
inline DqnAgent transfer_knowledge(const BeliefState& b, const TransferSpec& spec, const DqnConfig& dqn,
                                   std::uint64_t seed) {
  const MLP& source = b.entries()[b.argmax()].source_net();
  std::vector<std::size_t> dims = dqn.layer_dims();
  if (source.dims != dims) throw ConfigError("transfer: source and target architectures differ");
  spec.validate(source.num_layers());
  MLP online = init_mlp(std::span<const std::size_t>(dims), mix64(seed));
  std::size_t copied = spec.copied_layers(source.num_layers());
  for (std::size_t k = 0; k < copied; ++k) online.layers[k] = source.layers[k];
  DqnAgent agent(dqn, std::move(online), seed);
  if (spec.freeze_shallow)
    for (std::size_t k = 0; k < copied; ++k) agent.set_frozen(k, true);
  return agent;
}

struct BeliefRow {
  std::size_t game = 0;
  std::size_t step = 0;
  std::vector<double> probs;
};

struct RunReport {
  std::string method;  // "otlpp" or "scratch"
  std::string teammate;
  std::uint64_t seed = 0;
  std::vector<std::string> library;
  std::vector<BeliefRow> beliefs;
  std::optional<std::size_t> identified;
  std::string identified_name;
  bool identified_by_criterion = false;
  std::size_t identification_games = 0;
  std::uint64_t identification_steps = 0;
  std::uint64_t post_transfer_steps = 0;
  std::uint64_t post_transfer_updates = 0;
  std::vector<Status> outcomes;
  std::vector<EvalPoint> curve;
};

inline void check_leave_one_out(const std::vector<LibraryEntry>& library, const std::string& teammate) {
  for (const auto& e : library)
    if (e.name == teammate)
      throw UsageError("leave-one-out: library contains the evaluated teammate '" + teammate + "'");
}

struct IdentificationResult {
  BeliefState beliefs;
  std::vector<BeliefRow> log;
  std::vector<Transition> transitions;
  std::size_t games = 0;
  std::uint64_t steps = 0;
  bool by_criterion = false;
};

// Acts greedily with the most likely library policy and updates beliefs after
// every step until the criterion fires (or the game cap is hit).
inline IdentificationResult identify_teammate(const std::vector<LibraryEntry>& library,
                                              const BehaviorParams& mate, const OtlppConfig& cfg,
                                              std::uint64_t seed, std::vector<double> prior = {}) {
  IdentificationResult out{prior.empty() ? BeliefState(library, cfg.eta)
                                         : BeliefState(library, std::move(prior), cfg.eta),
                               {}, {}, 0, 0, false};
  for (std::size_t game = 0; game < cfg.identification_max_games; ++game) {
    std::size_t step_in_game = 0;
    bool done = false;
    auto [world, s] = reset(split_seed(seed, game), cfg.env);
    while (true) {
      Action a = out.beliefs.select_action(s);
      Action mate_action = teammate_policy(mate, world, cfg.env);
      StepResult r = step(std::move(world), a, mate_action, cfg.env);
      out.beliefs.update(s, r.features);
      out.transitions.push_back({s, index_of(a), reward(r.status), r.features, r.status != Status::InGame});
      ++out.steps;
      ++step_in_game;
      out.log.push_back({game, step_in_game, out.beliefs.probs()});
      bool over = r.status != Status::InGame;
      if (identified(out.beliefs, game + (over ? 1 : 0), cfg.criterion)) {
        done = true;
        out.by_criterion = true;
      }
      if (over || done) break;
      world = std::move(r.world);
      s = r.features;
    }
    out.games = game + 1;
    if (done) break;
  }
  return out;
}

// Identification, transfer, then learning with the new teammate.
inline RunReport run_otlpp(const std::vector<LibraryEntry>& library, const std::string& teammate,
                           const BehaviorParams& mate, const OtlppConfig& cfg, std::uint64_t seed,
                           std::uint64_t eval_seed) {
  cfg.validate();
  if (library.empty()) throw ConfigError("otlpp: library is empty");
  if (cfg.leave_one_out) check_leave_one_out(library, teammate);

  RunReport rep;
  rep.method = "otlpp";
  rep.teammate = teammate;
  rep.seed = seed;
  for (const auto& e : library) rep.library.push_back(e.name);

  IdentificationResult id = identify_teammate(library, mate, cfg, split_seed(seed, 0));
  rep.beliefs = std::move(id.log);
  rep.identified = id.beliefs.argmax();
  rep.identified_name = library[*rep.identified].name;
  rep.identified_by_criterion = id.by_criterion;
  rep.identification_games = id.games;
  rep.identification_steps = id.steps;

  DqnAgent agent = transfer_knowledge(id.beliefs, cfg.transfer, cfg.post_transfer_dqn(), split_seed(seed, 1));
  if (cfg.seed_replay_with_identification)
    for (const auto& t : id.transitions) agent.train_step(t);

  auto log = train_with_teammate(agent, teammate, mate, cfg.env, cfg.post_transfer_episodes, split_seed(seed, 2),
                                 cfg.eval_interval, cfg.eval_games, eval_seed, [](const Transition&) {});
  rep.post_transfer_steps = log.steps;
  rep.post_transfer_updates = agent.updates();
  rep.outcomes = std::move(log.outcomes);
  rep.curve = std::move(log.curve);
  return rep;
}

// Learning from scratch with the library-phase exploration schedule, for the
// same episode budget and evaluation points as the post-transfer phase.
inline RunReport run_scratch(const std::string& teammate, const BehaviorParams& mate, const OtlppConfig& cfg,
                             std::uint64_t seed, std::uint64_t eval_seed) {
  cfg.validate();
  RunReport rep;
  rep.method = "scratch";
  rep.teammate = teammate;
  rep.seed = seed;
  DqnAgent agent(cfg.dqn, split_seed(seed, 1));
  auto log = train_with_teammate(agent, teammate, mate, cfg.env, cfg.post_transfer_episodes, split_seed(seed, 2),
                                 cfg.eval_interval, cfg.eval_games, eval_seed, [](const Transition&) {});
  rep.post_transfer_steps = log.steps;
  rep.post_transfer_updates = agent.updates();
  rep.outcomes = std::move(log.outcomes);
  rep.curve = std::move(log.curve);
  return rep;
}

}  // namespace otlpp

#pragma once

// Deep Q-learning: replay buffer, epsilon-greedy schedule, TD targets against
// a periodically synced target network, and the DQNv1 checkpoint format.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "otlpp/common.hpp"
#include "otlpp/mlp.hpp"
#include "otlpp/world.hpp"

namespace otlpp {

struct Transition {
  FeatureVector s{};
  std::size_t a = 0;
  double r = 0.0;
  FeatureVector s_next{};
  bool terminal = false;
};

struct EpsilonSchedule {
  double start = 0.8;
  double end = 0.05;
  std::uint64_t decay_steps = 20000;
};

inline double epsilon(std::uint64_t step, const EpsilonSchedule& s) {
  if (step >= s.decay_steps) return s.end;
  double e = s.start - static_cast<double>(step) * (s.start - s.end) / static_cast<double>(s.decay_steps);
  return std::max(s.end, e);
}

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay: capacity must be positive");
  }

  void push(const Transition& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[head_] = t;
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const { return data_[(head_ + i) % data_.size()]; }

  // Uniform sampling with replacement.
  std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n) const {
    if (data_.empty()) throw UsageError("replay: sampling from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  const Transition& raw(std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> q) {
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

inline Action greedy_action(const MLP& net, const FeatureVector& s) {
  return action_from_index(argmax(forward(net, s)));
}

// Frozen network snapshot.
class Policy {
 public:
  Policy() = default;
  explicit Policy(MLP net) : net_(std::make_shared<const MLP>(std::move(net))) {}

  Action act(const FeatureVector& s) const { return greedy_action(*net_, s); }
  std::vector<double> q_values(const FeatureVector& s) const { return forward(*net_, s); }
  const MLP& net() const { return *net_; }
  bool empty() const { return !net_; }

 private:
  std::shared_ptr<const MLP> net_;
};

inline double td_target(double r, const FeatureVector& s_next, bool terminal, const MLP& target_net,
                        double gamma) {
  if (terminal) return r;
  auto q = forward(target_net, s_next);
  return r + gamma * *std::max_element(q.begin(), q.end());
}

// Mean over `batch` of the squared-TD-error gradients.
inline Gradient batch_gradient(const MLP& online, const MLP& target_net,
                               std::span<const Transition* const> batch, double gamma,
                               double reward_scale = 1.0) {
  Gradient g = Gradient::zeros_like(online);
  if (batch.empty()) return g;
  double w = 1.0 / static_cast<double>(batch.size());
  for (const Transition* t : batch) {
    double y = td_target(reward_scale * t->r, t->s_next, t->terminal, target_net, gamma);
    accumulate_td_gradient(online, t->s, t->a, y, g, w);
  }
  return g;
}

struct DqnConfig {
  std::vector<std::size_t> hidden = {64, 64};
  double learning_rate = 0.00025;
  double gamma = 0.995;
  std::size_t batch_size = 64;
  std::size_t replay_capacity = 50000;
  std::size_t warmup = 1000;
  std::uint64_t sync_period = 500;
  // Rewards are multiplied by this inside TD targets; greedy policies are
  // invariant to it, but it keeps regression targets O(1).
  double reward_scale = 1.0;
  EpsilonSchedule schedule;

  std::vector<std::size_t> layer_dims() const {
    std::vector<std::size_t> d{kNumFeatures};
    d.insert(d.end(), hidden.begin(), hidden.end());
    d.push_back(kNumActions);
    return d;
  }

  void validate() const {
    for (std::size_t h : hidden)
      if (h == 0) throw ConfigError("dqn: hidden layer sizes must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("dqn: gamma must lie in (0, 1)");
    if (!(reward_scale > 0.0)) throw ConfigError("dqn: reward scale must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("dqn: learning rate must be positive");
    if (batch_size == 0 || replay_capacity == 0 || sync_period == 0)
      throw ConfigError("dqn: batch size, capacity and sync period must be positive");
    if (!(schedule.start >= schedule.end && schedule.end >= 0.0 && schedule.start <= 1.0))
      throw ConfigError("dqn: epsilon schedule must satisfy 0 <= end <= start <= 1");
  }
};

class DqnAgent {
 public:
  DqnAgent(const DqnConfig& cfg, std::uint64_t seed)
      : DqnAgent(cfg, init_mlp(std::span<const std::size_t>(cfg.layer_dims()), mix64(seed)), seed) {}

  // Starts from given online parameters; the target is synced to them.
  DqnAgent(const DqnConfig& cfg, MLP online, std::uint64_t seed)
      : cfg_(cfg), online_(std::move(online)), buffer_(cfg.replay_capacity), rng_(seed) {
    cfg_.validate();
    if (online_.dims != cfg_.layer_dims()) throw ConfigError("dqn: network dims do not match config");
    target_ = online_;
    adam_ = AdamState::for_net(online_, cfg_.learning_rate);
    frozen_.assign(online_.num_layers(), false);
  }

  Action act(const FeatureVector& s, bool explore) {
    if (explore) {
      double eps = epsilon(steps_, cfg_.schedule);
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < eps)
        return action_from_index(std::uniform_int_distribution<std::size_t>(0, kNumActions - 1)(rng_));
    }
    return greedy_action(online_, s);
  }

  // Stores the transition, runs one batch update once warm, and syncs the
  // target every sync_period environment steps. Returns true when a gradient
  // step was applied.
  bool train_step(const Transition& t) {
    buffer_.push(t);
    ++steps_;
    bool updated = false;
    if (buffer_.size() >= cfg_.warmup) {
      auto idx = buffer_.sample_indices(rng_, cfg_.batch_size);
      std::vector<const Transition*> batch;
      batch.reserve(idx.size());
      for (auto i : idx) batch.push_back(&buffer_.raw(i));
      Gradient g = batch_gradient(online_, target_, batch, cfg_.gamma, cfg_.reward_scale);
      adam_step(online_, adam_, g, frozen_);
      ++updates_;
      updated = true;
    }
    if (steps_ % cfg_.sync_period == 0) sync_target();
    return updated;
  }

  void sync_target() { target_ = online_; }

  void set_frozen(std::size_t layer, bool frozen) { frozen_.at(layer) = frozen; }
  bool is_frozen(std::size_t layer) const { return frozen_.at(layer); }

  Policy snapshot() const { return Policy(online_); }

  const MLP& online() const { return online_; }
  const MLP& target() const { return target_; }
  const DqnConfig& config() const { return cfg_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const AdamState& adam() const { return adam_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t updates() const { return updates_; }
  double current_epsilon() const { return epsilon(steps_, cfg_.schedule); }

  // Restores counters and optimizer state from a checkpoint.
  void restore(std::uint64_t steps, std::uint64_t updates, MLP target, AdamState adam) {
    steps_ = steps;
    updates_ = updates;
    target_ = std::move(target);
    adam_ = std::move(adam);
  }

 private:
  DqnConfig cfg_;
  MLP online_;
  MLP target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::vector<bool> frozen_;
  std::uint64_t steps_ = 0;
  std::uint64_t updates_ = 0;
};

// DQNv1 checkpoint: `DQNv1` line, `key value` lines for the schedule and
// counters, then `online` + QNETv1 block, `target` + QNETv1 block, and the
// Adam moments as `adam_m` / `adam_v` tensor blocks. The replay buffer is not
// stored.
inline void write_dqn(std::ostream& os, const DqnAgent& agent) {
  const DqnConfig& c = agent.config();
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return std::string(buf);
  };
  os << "DQNv1\n";
  os << "steps " << agent.steps() << '\n';
  os << "updates " << agent.updates() << '\n';
  os << "epsilon_start " << num(c.schedule.start) << '\n';
  os << "epsilon_end " << num(c.schedule.end) << '\n';
  os << "decay_steps " << c.schedule.decay_steps << '\n';
  os << "gamma " << num(c.gamma) << '\n';
  os << "learning_rate " << num(c.learning_rate) << '\n';
  os << "batch_size " << c.batch_size << '\n';
  os << "replay_capacity " << c.replay_capacity << '\n';
  os << "warmup " << c.warmup << '\n';
  os << "sync_period " << c.sync_period << '\n';
  os << "reward_scale " << num(c.reward_scale) << '\n';
  os << "adam_t " << agent.adam().t << '\n';
  os << "online\n";
  write_qnet(os, agent.online());
  os << "target\n";
  write_qnet(os, agent.target());
  const AdamState& a = agent.adam();
  for (const auto* moments : {&a.m, &a.v}) {
    os << (moments == &a.m ? "adam_m\n" : "adam_v\n");
    for (std::size_t k = 0; k < moments->w.size(); ++k) {
      detail::write_values(os, moments->w[k]);
      detail::write_values(os, moments->b[k]);
    }
  }
}

inline DqnAgent read_dqn(std::istream& is, std::uint64_t seed) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() {
    ++line_no;
    if (!std::getline(is, line)) throw ParseError("DQNv1: unexpected end of file", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "DQNv1") throw ParseError("expected DQNv1 header", line_no);
  auto field = [&](const char* key) {
    std::istringstream ls(next_line());
    std::string k, v;
    ls >> k >> v;
    if (k != key || v.empty()) throw ParseError(std::string("DQNv1: expected key ") + key, line_no);
    return v;
  };
  auto as_u64 = [&](const std::string& v) {
    try {
      return static_cast<std::uint64_t>(std::stoull(v));
    } catch (const std::exception&) {
      throw ParseError("DQNv1: malformed integer", line_no);
    }
  };
  auto as_double = [&](const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw ParseError("DQNv1: malformed number", line_no);
    }
  };
  DqnConfig c;
  std::uint64_t steps = as_u64(field("steps"));
  std::uint64_t updates = as_u64(field("updates"));
  c.schedule.start = as_double(field("epsilon_start"));
  c.schedule.end = as_double(field("epsilon_end"));
  c.schedule.decay_steps = as_u64(field("decay_steps"));
  c.gamma = as_double(field("gamma"));
  c.learning_rate = as_double(field("learning_rate"));
  c.batch_size = as_u64(field("batch_size"));
  c.replay_capacity = as_u64(field("replay_capacity"));
  c.warmup = as_u64(field("warmup"));
  c.sync_period = as_u64(field("sync_period"));
  c.reward_scale = as_double(field("reward_scale"));
  std::uint64_t adam_t = as_u64(field("adam_t"));
  if (next_line() != "online") throw ParseError("DQNv1: expected 'online'", line_no);
  MLP online = read_qnet(is, line_no);
  if (next_line() != "target") throw ParseError("DQNv1: expected 'target'", line_no);
  MLP target = read_qnet(is, line_no);
  if (target.dims != online.dims) throw ParseError("DQNv1: target dims differ from online", line_no);
  c.hidden.assign(online.dims.begin() + 1, online.dims.end() - 1);
  if (online.dims.front() != kNumFeatures || online.dims.back() != kNumActions)
    throw ParseError("DQNv1: network is not 12 -> 11", line_no);

  AdamState adam = AdamState::for_net(online, c.learning_rate);
  adam.t = adam_t;
  for (Gradient* moments : {&adam.m, &adam.v}) {
    std::string expect = moments == &adam.m ? "adam_m" : "adam_v";
    if (next_line() != expect) throw ParseError("DQNv1: expected '" + expect + "'", line_no);
    for (std::size_t k = 0; k < moments->w.size(); ++k) {
      moments->w[k] = detail::read_values(is, moments->w[k].size(), line_no, expect.c_str());
      moments->b[k] = detail::read_values(is, moments->b[k].size(), line_no, expect.c_str());
    }
  }
  DqnAgent agent(c, std::move(online), seed);
  agent.restore(steps, updates, std::move(target), std::move(adam));
  return agent;
}

// Q-table indexed [state][action].
using QTable = std::vector<std::vector<double>>;

inline void tabular_q_update(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                             bool terminal, double alpha, double gamma) {
  double next = terminal ? 0.0 : *std::max_element(q[s_next].begin(), q[s_next].end());
  q[s][a] = (1.0 - alpha) * q[s][a] + alpha * (r + gamma * next);
}

}  // namespace otlpp

#pragma once

// 2-vs-2 half-court environment: reset, step and the status reward.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "otlpp/agents.hpp"
#include "otlpp/common.hpp"
#include "otlpp/world.hpp"

namespace otlpp {

inline double reward(Status s) {
  switch (s) {
    case Status::Goal: return 1000.0;
    case Status::InGame: return -1.0;
    default: return -1000.0;
  }
}

struct ResetResult {
  WorldState world;
  FeatureVector features;
};

struct StepResult {
  WorldState world;
  FeatureVector features;
  Status status;
};

inline ResetResult reset(std::uint64_t seed, const EnvConfig& cfg) {
  cfg.validate();
  WorldState w;
  w.rng.seed(seed);
  const double L = cfg.field_length, W = cfg.field_half_width;
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(w.rng); };
  w.agent_pos = {uni(0.1, 0.4) * L, uni(-0.6, 0.6) * W};
  w.teammate_pos = {uni(0.1, 0.4) * L, uni(-0.6, 0.6) * W};
  w.opponent_pos[0] = clamp_to_keeper_area({L, uni(-0.1, 0.1) * W}, cfg);
  w.opponent_pos[1] = {uni(0.55, 0.75) * L, uni(-0.4, 0.4) * W};
  w.ball_owner = uni(0.0, 1.0) < 0.5 ? PlayerId::Agent : PlayerId::Teammate;
  w.ball_pos = position_of(w, *w.ball_owner);
  w.step_count = 0;
  w.status = Status::InGame;
  return {w, features(w, cfg)};
}

namespace detail {

inline double gaussian(Rng& rng, double stddev) {
  if (stddev <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, stddev)(rng);
}

inline bool is_offense(std::optional<PlayerId> id) {
  return id == PlayerId::Agent || id == PlayerId::Teammate;
}

inline void hand_to_defense(WorldState& w, PlayerId defender) {
  w.ball_owner = defender;
  w.ball_pos = position_of(w, defender);
}

// Shoot or PassTo by `self`; no effect unless `self` holds the ball.
inline Status resolve_ball_action(WorldState& w, PlayerId self, Action a, const EnvConfig& cfg) {
  if (w.ball_owner != self) return Status::InGame;
  Vec2 p = position_of(w, self);
  if (a == Action::Shoot) {
    OpenWindow win = goal_window(p, w, cfg);
    if (distance(p, cfg.goal_center()) > cfg.shot_range || win.width < cfg.shot_angle_threshold) {
      hand_to_defense(w, PlayerId::Keeper);
      return Status::CapturedByDefense;
    }
    double dev = gaussian(w.rng, cfg.shot_noise);
    double heading = win.center + dev;
    double run = cfg.field_length - p.x;
    double landing_y = p.y + run * std::tan(heading);
    w.ball_owner.reset();
    w.ball_pos = {cfg.field_length, std::clamp(landing_y, -cfg.field_half_width, cfg.field_half_width)};
    if (std::abs(dev) <= 0.5 * win.width) return Status::Goal;
    if (std::abs(landing_y) > cfg.goal_half_width) return Status::OutOfBounds;
    hand_to_defense(w, PlayerId::Keeper);
    return Status::CapturedByDefense;
  }
  if (a == Action::PassTo) {
    PlayerId mate = partner_of(self);
    Vec2 q = position_of(w, mate);
    OpenWindow win = pass_window(p, q, w, cfg);
    if (distance(p, q) <= cfg.pass_range && win.width >= cfg.pass_angle_threshold) {
      double dev = gaussian(w.rng, cfg.pass_noise);
      if (std::abs(dev) <= 0.5 * win.width) {
        w.ball_owner = mate;
        w.ball_pos = q;
        return Status::InGame;
      }
    }
    hand_to_defense(w, PlayerId::Chaser);
    return Status::CapturedByDefense;
  }
  return Status::InGame;
}

inline double move_speed(Action a, bool carrying, const EnvConfig& cfg) {
  if (!carrying) return cfg.player_speed;
  return a == Action::LongDribble ? cfg.long_dribble_speed : cfg.dribble_speed;
}

inline bool moves(Action a, bool carrying) {
  switch (a) {
    case Action::Shoot:
    case Action::PassTo:
    case Action::NoOp: return false;
    case Action::ShortDribble:
    case Action::LongDribble: return carrying;
    case Action::GoToBall: return !carrying;
    default: return true;
  }
}

inline void move_offense(WorldState& w, PlayerId self, Action a, const EnvConfig& cfg) {
  bool carrying = w.ball_owner == self;
  if (!moves(a, carrying)) return;
  Vec2 dir = move_direction(a, self, w, cfg);
  if (dir == Vec2{0.0, 0.0}) return;
  Vec2& pos = position_of(w, self);
  pos = pos + move_speed(a, carrying, cfg) * dir;
  pos.x += gaussian(w.rng, cfg.move_noise);
  pos.y += gaussian(w.rng, cfg.move_noise);
  double heading = std::atan2(dir.y, dir.x);
  (self == PlayerId::Agent ? w.agent_orientation : w.teammate_orientation) = heading;
  if (!carrying) pos = clamp_to_field(pos, cfg);
}

// Goal / out-of-bounds check on the ball carrier's position.
inline Status carrier_status(WorldState& w, const EnvConfig& cfg) {
  if (!is_offense(w.ball_owner)) return Status::InGame;
  Vec2& pos = position_of(w, *w.ball_owner);
  w.ball_pos = pos;
  if (pos.x >= cfg.field_length && std::abs(pos.y) <= cfg.goal_half_width) {
    pos = clamp_to_field(pos, cfg);
    w.ball_pos = pos;
    return Status::Goal;
  }
  if (!in_field(pos, cfg)) {
    pos = clamp_to_field(pos, cfg);
    w.ball_pos = pos;
    return Status::OutOfBounds;
  }
  return Status::InGame;
}

inline Status capture_status(WorldState& w, const EnvConfig& cfg) {
  if (!is_offense(w.ball_owner)) return Status::InGame;
  for (PlayerId d : {PlayerId::Keeper, PlayerId::Chaser}) {
    if (distance(position_of(w, d), w.ball_pos) <= cfg.capture_radius) {
      hand_to_defense(w, d);
      return Status::CapturedByDefense;
    }
  }
  return Status::InGame;
}

}  // namespace detail

// Advances one macro-step of cfg.ticks_per_step internal ticks.
inline StepResult step(WorldState w, Action agent_action, Action teammate_action,
                       const EnvConfig& cfg) {
  using namespace detail;
  if (w.status != Status::InGame) throw UsageError("step called on a terminated episode");

  Status status = resolve_ball_action(w, PlayerId::Agent, agent_action, cfg);
  if (status == Status::InGame)
    status = resolve_ball_action(w, PlayerId::Teammate, teammate_action, cfg);

  bool long_dribble = false;
  for (int tick = 0; tick < cfg.ticks_per_step && status == Status::InGame; ++tick) {
    if (w.ball_owner == PlayerId::Agent && agent_action == Action::LongDribble) long_dribble = true;
    if (w.ball_owner == PlayerId::Teammate && teammate_action == Action::LongDribble)
      long_dribble = true;
    move_offense(w, PlayerId::Agent, agent_action, cfg);
    move_offense(w, PlayerId::Teammate, teammate_action, cfg);
    status = carrier_status(w, cfg);
    if (status != Status::InGame) break;

    Vec2 keeper_step = defender_policy(DefenderRole::Keeper, w, cfg);
    Vec2 chaser_step = defender_policy(DefenderRole::Chaser, w, cfg);
    w.opponent_pos[0] = w.opponent_pos[0] + keeper_step;
    w.opponent_pos[1] = w.opponent_pos[1] + chaser_step;
    status = capture_status(w, cfg);
  }

  if (status == Status::InGame && long_dribble && is_offense(w.ball_owner)) {
    Vec2& pos = position_of(w, *w.ball_owner);
    pos.x += gaussian(w.rng, cfg.long_dribble_noise);
    pos.y += gaussian(w.rng, cfg.long_dribble_noise);
    status = carrier_status(w, cfg);
  }

  ++w.step_count;
  if (status == Status::InGame && w.step_count >= cfg.max_steps) status = Status::OutOfTime;
  w.status = status;
  FeatureVector f = features(w, cfg);
  return {std::move(w), f, status};
}

}  // namespace otlpp

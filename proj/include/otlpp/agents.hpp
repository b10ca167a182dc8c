#pragma once

// Scripted teammate archetypes and the two scripted defenders.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "otlpp/common.hpp"
#include "otlpp/world.hpp"

namespace otlpp {

enum class Positioning { Wing, Center, Trailing };

struct BehaviorParams {
  double pass_willingness = 0.5;
  double dribble_preference = 0.5;
  double shot_range_threshold = 0.65;  // shoots only once x >= this (field units)
  Positioning positioning_bias = Positioning::Center;
  double aggression = 0.5;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(pass_willingness) || !unit(dribble_preference) || !unit(aggression))
      throw ConfigError("behavior: probabilities must lie in [0, 1]");
    if (!(shot_range_threshold >= 0.0)) throw ConfigError("behavior: negative shot range");
  }
};

struct NamedPreset {
  std::string_view name;
  BehaviorParams params;
};

// Five archetypes. Positioning differs between every pair so that teammate
// trajectories separate them.
inline constexpr std::array<NamedPreset, 5> kPresets = {{
    {"A", {0.9, 0.2, 0.70, Positioning::Wing, 0.8}},
    {"B", {0.3, 0.7, 0.60, Positioning::Center, 0.7}},
    {"C", {0.6, 0.5, 0.75, Positioning::Trailing, 0.3}},
    {"D", {0.5, 0.3, 0.65, Positioning::Wing, 0.1}},
    {"E", {0.1, 0.9, 0.55, Positioning::Center, 0.1}},
}};

inline BehaviorParams preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p.params;
  throw ConfigError("unknown teammate preset '" + std::string(name) + "'");
}

inline Vec2& position_of(WorldState& w, PlayerId id) {
  switch (id) {
    case PlayerId::Agent: return w.agent_pos;
    case PlayerId::Teammate: return w.teammate_pos;
    case PlayerId::Keeper: return w.opponent_pos[0];
    case PlayerId::Chaser: return w.opponent_pos[1];
  }
  return w.agent_pos;
}

inline Vec2 position_of(const WorldState& w, PlayerId id) {
  return position_of(const_cast<WorldState&>(w), id);
}

inline PlayerId partner_of(PlayerId id) {
  return id == PlayerId::Agent ? PlayerId::Teammate : PlayerId::Agent;
}

inline Vec2 nearest_opponent(Vec2 p, const WorldState& w) {
  return distance(p, w.opponent_pos[0]) <= distance(p, w.opponent_pos[1]) ? w.opponent_pos[0]
                                                                          : w.opponent_pos[1];
}

// Dribbles head for the goal but veer so that a nearby opponent stays at
// least 60 degrees off the heading.
inline Vec2 dribble_direction(Vec2 p, const WorldState& w, const EnvConfig& cfg) {
  constexpr double kClearance = kPi / 3.0;
  constexpr double kAvoidRadius = 0.3;
  Vec2 goal_dir = direction(p, cfg.goal_center());
  Vec2 opp = nearest_opponent(p, w);
  if (distance(p, opp) >= kAvoidRadius) return goal_dir;
  double to_goal = std::atan2(goal_dir.y, goal_dir.x);
  double to_opp = std::atan2(opp.y - p.y, opp.x - p.x);
  double off = wrap_angle(to_opp - to_goal);
  if (std::abs(off) >= kClearance) return goal_dir;
  double heading = off >= 0.0 ? to_opp - kClearance : to_opp + kClearance;
  return {std::cos(heading), std::sin(heading)};
}

// Unit heading of an offense player's movement action; zero for actions that
// do not move the player (ball actions, NoOp, or GoToBall while carrying).
inline Vec2 move_direction(Action a, PlayerId self, const WorldState& w, const EnvConfig& cfg) {
  Vec2 p = position_of(w, self);
  Vec2 mate = position_of(w, partner_of(self));
  switch (a) {
    case Action::ShortDribble:
    case Action::LongDribble: return dribble_direction(p, w, cfg);
    case Action::GoToGoal: return direction(p, cfg.goal_center());
    case Action::GoToBall: return direction(p, w.ball_pos);
    case Action::GoToTeammate: return direction(p, mate);
    case Action::GoAwayFromTeammate: return direction(mate, p);
    case Action::GoToNearestOpponent: return direction(p, nearest_opponent(p, w));
    case Action::GoAwayFromOpponent: return direction(nearest_opponent(p, w), p);
    default: return {0.0, 0.0};
  }
}

// Point an off-ball teammate drifts toward.
inline Vec2 positioning_anchor(const BehaviorParams& params, const WorldState& w) {
  switch (params.positioning_bias) {
    case Positioning::Wing: {
      double side = w.teammate_pos.y >= 0.0 ? 1.0 : -1.0;
      return {0.35 + 0.5 * params.aggression, side * (0.4 + 0.4 * (1.0 - params.aggression))};
    }
    case Positioning::Center: return {0.35 + 0.5 * params.aggression, 0.0};
    case Positioning::Trailing:
      return {std::max(0.05, w.ball_pos.x - 0.25 + 0.2 * params.aggression), 0.5 * w.ball_pos.y};
  }
  return w.teammate_pos;
}

namespace detail {
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}
}  // namespace detail

// Decision of the scripted teammate. Randomness is derived from a copy of the
// world's generator, so the same world always yields the same action and the
// world itself is not advanced.
inline Action teammate_policy(const BehaviorParams& params, const WorldState& w,
                              const EnvConfig& cfg) {
  Rng peek = w.rng;
  std::uint64_t key = mix64(peek() ^ 0x7a3d5c1e9b2f4081ULL);
  double u_pass = detail::unit_from_bits(mix64(key));
  double u_dribble = detail::unit_from_bits(mix64(key + 1));

  const Vec2 me = w.teammate_pos;
  if (w.ball_owner == PlayerId::Teammate) {
    bool agent_open = distance(me, w.agent_pos) <= cfg.pass_range &&
                      pass_window(me, w.agent_pos, w, cfg).width >= cfg.pass_angle_threshold;
    if (agent_open && u_pass < params.pass_willingness) return Action::PassTo;
    if (me.x >= params.shot_range_threshold &&
        goal_window(me, w, cfg).width >= cfg.shot_angle_threshold)
      return Action::Shoot;
    // Cautious players release the ball when the chaser closes in.
    double pressure = distance(me, w.chaser_pos());
    if (pressure < 0.15 && params.aggression < 0.5 && agent_open) return Action::PassTo;
    return u_dribble < params.dribble_preference ? Action::LongDribble : Action::ShortDribble;
  }

  // Off the ball: pick the movement that lands closest to the anchor point.
  Vec2 anchor = positioning_anchor(params, w);
  double reach = cfg.player_speed * cfg.ticks_per_step;
  static constexpr std::array<Action, 7> kMoves = {
      Action::NoOp,         Action::GoToGoal,           Action::GoToBall,
      Action::GoToTeammate, Action::GoAwayFromTeammate, Action::GoAwayFromOpponent,
      Action::GoToNearestOpponent};
  Action best = Action::NoOp;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Action a : kMoves) {
    Vec2 next = clamp_to_field(me + reach * move_direction(a, PlayerId::Teammate, w, cfg), cfg);
    double d = distance(next, anchor);
    if (d < best_dist) {
      best_dist = d;
      best = a;
    }
  }
  return best;
}

enum class DefenderRole { Keeper, Chaser };

inline bool in_keeper_area(Vec2 p, const EnvConfig& cfg) {
  return p.x >= cfg.field_length - cfg.keeper_area_depth &&
         std::abs(p.y) <= cfg.keeper_area_half_width;
}

inline Vec2 clamp_to_keeper_area(Vec2 p, const EnvConfig& cfg) {
  return {std::clamp(p.x, cfg.field_length - cfg.keeper_area_depth,
                     cfg.field_length - cfg.body_radius),
          std::clamp(p.y, -cfg.keeper_area_half_width, cfg.keeper_area_half_width)};
}

// One-tick displacement of a defender. The keeper shadows the ball's y on
// its goal line and charges a carrier that enters its area; the chaser runs
// straight at the ball.
inline Vec2 defender_policy(DefenderRole role, const WorldState& w, const EnvConfig& cfg) {
  Vec2 self = role == DefenderRole::Keeper ? w.keeper_pos() : w.chaser_pos();
  Vec2 target;
  double speed;
  if (role == DefenderRole::Keeper) {
    speed = cfg.keeper_speed;
    target = in_keeper_area(w.ball_pos, cfg)
                 ? clamp_to_keeper_area(w.ball_pos, cfg)
                 : clamp_to_keeper_area({cfg.field_length, w.ball_pos.y}, cfg);
  } else {
    speed = cfg.chaser_speed;
    target = w.ball_pos;
  }
  double d = distance(self, target);
  Vec2 step = std::min(speed, d) * direction(self, target);
  Vec2 next = self + step;
  if (role == DefenderRole::Keeper) {
    next = clamp_to_keeper_area(next, cfg);
  } else {
    next = clamp_to_field(next, cfg);
    next.x = std::min(next.x, cfg.field_length - cfg.body_radius);
  }
  return next - self;
}

}  // namespace otlpp

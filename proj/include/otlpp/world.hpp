#pragma once

// World state, action/status enums, and the 12-feature view of the half court.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "otlpp/common.hpp"

namespace otlpp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Unit vector from `from` toward `to`; zero when the points coincide.
inline Vec2 direction(Vec2 from, Vec2 to) {
  Vec2 d = to - from;
  double n = norm(d);
  if (n <= 0.0) return {0.0, 0.0};
  return (1.0 / n) * d;
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

enum class Action : int {
  Shoot = 0,
  ShortDribble,
  LongDribble,
  PassTo,
  NoOp,
  GoToBall,
  GoToGoal,
  GoToTeammate,
  GoAwayFromTeammate,
  GoToNearestOpponent,
  GoAwayFromOpponent,
};

inline constexpr std::size_t kNumActions = 11;

inline constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "Shoot",        "ShortDribble", "LongDribble",        "PassTo",
    "NoOp",         "GoToBall",     "GoToGoal",           "GoToTeammate",
    "GoAwayFromTeammate", "GoToNearestOpponent", "GoAwayFromOpponent"};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

inline Action action_from_index(std::size_t i) {
  if (i >= kNumActions) throw UsageError("action index out of range");
  return static_cast<Action>(i);
}

enum class Status { InGame, Goal, CapturedByDefense, OutOfBounds, OutOfTime, ServerDown };

inline constexpr std::array<Status, 6> kAllStatuses = {
    Status::InGame,     Status::Goal,      Status::CapturedByDefense,
    Status::OutOfBounds, Status::OutOfTime, Status::ServerDown};

inline std::string_view status_name(Status s) {
  switch (s) {
    case Status::InGame: return "InGame";
    case Status::Goal: return "Goal";
    case Status::CapturedByDefense: return "CapturedByDefense";
    case Status::OutOfBounds: return "OutOfBounds";
    case Status::OutOfTime: return "OutOfTime";
    case Status::ServerDown: return "ServerDown";
  }
  return "?";
}

enum class PlayerId { Agent, Teammate, Keeper, Chaser };

// Feature order is the network input order.
enum Feature : std::size_t {
  kAgentX = 0,
  kAgentY,
  kOrientation,
  kBallX,
  kBallY,
  kGoalOpeningAngle,
  kProximityToOpponent,
  kTeammateGoalOpeningAngle,
  kTeammateProximityToOpponent,
  kPassOpeningAngle,
  kTeammateX,
  kTeammateY,
};

inline constexpr std::size_t kNumFeatures = 12;
using FeatureVector = std::array<double, kNumFeatures>;

struct EnvConfig {
  // Field: x in [0, field_length] with the goal line at x = field_length,
  // y in [-field_half_width, field_half_width].
  double field_length = 1.0;
  double field_half_width = 1.0;
  double goal_half_width = 0.2;
  int max_steps = 500;
  int ticks_per_step = 4;

  double player_speed = 0.02;  // per tick, without the ball
  double dribble_speed = 0.015;
  double long_dribble_speed = 0.022;
  double long_dribble_noise = 0.02;  // std of positional ball noise per long dribble
  double move_noise = 0.003;         // std of per-tick offense positional noise

  double body_radius = 0.03;
  double capture_radius = 0.045;

  double shot_range = 0.35;
  double shot_angle_threshold = 0.2;
  double shot_noise = 0.08;  // std of angular shot deviation, radians

  double pass_range = 0.9;
  double pass_angle_threshold = 0.1;
  double pass_noise = 0.04;
  double pass_target_radius = 0.1;

  double keeper_speed = 0.012;
  double chaser_speed = 0.013;
  double keeper_area_depth = 0.15;
  double keeper_area_half_width = 0.3;

  void validate() const {
    if (!(field_length > 0.0) || !(field_half_width > 0.0) || !(goal_half_width > 0.0))
      throw ConfigError("env: field dimensions must be positive");
    if (goal_half_width > field_half_width) throw ConfigError("env: goal wider than field");
    if (max_steps < 1) throw ConfigError("env: max_steps must be >= 1");
    if (ticks_per_step < 1) throw ConfigError("env: ticks_per_step must be >= 1");
    for (double v : {player_speed, dribble_speed, long_dribble_speed, keeper_speed, chaser_speed,
                     body_radius, capture_radius, shot_range, pass_range, pass_target_radius,
                     keeper_area_depth, keeper_area_half_width})
      if (!(v > 0.0)) throw ConfigError("env: speeds, radii and ranges must be positive");
    for (double v : {long_dribble_noise, move_noise, shot_noise, pass_noise, shot_angle_threshold,
                     pass_angle_threshold})
      if (!(v >= 0.0)) throw ConfigError("env: noise and thresholds must be non-negative");
    if (keeper_area_depth <= body_radius) throw ConfigError("env: keeper area too shallow");
  }

  double diagonal() const { return std::hypot(field_length, 2.0 * field_half_width); }
  Vec2 goal_center() const { return {field_length, 0.0}; }
};

struct WorldState {
  Vec2 agent_pos;
  double agent_orientation = 0.0;
  Vec2 teammate_pos;
  double teammate_orientation = 0.0;
  std::array<Vec2, 2> opponent_pos;  // [0] keeper, [1] chaser
  Vec2 ball_pos;
  std::optional<PlayerId> ball_owner;
  int step_count = 0;
  Status status = Status::InGame;
  Rng rng;

  Vec2 keeper_pos() const { return opponent_pos[0]; }
  Vec2 chaser_pos() const { return opponent_pos[1]; }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

// ---------------------------------------------------------------------------
// Opening-window geometry

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

struct OpenWindow {
  double width = 0.0;   // radians
  double center = 0.0;  // absolute direction of the window's bisector
};

// Largest angular window inside [center - half_width, center + half_width]
// (as seen from `eye`) that no disc in `occluders` intersects.
inline OpenWindow largest_open_window(Vec2 eye, double center, double half_width,
                                      std::span<const Disc> occluders) {
  struct Interval {
    double lo, hi;
  };
  std::vector<Interval> blocked;
  for (const Disc& d : occluders) {
    double dist = distance(eye, d.center);
    if (dist <= d.radius) return {0.0, center};
    double rel = wrap_angle(std::atan2(d.center.y - eye.y, d.center.x - eye.x) - center);
    double alpha = std::asin(d.radius / dist);
    for (double shift : {-2.0 * kPi, 0.0, 2.0 * kPi}) {
      double lo = std::max(rel + shift - alpha, -half_width);
      double hi = std::min(rel + shift + alpha, half_width);
      if (lo < hi) blocked.push_back({lo, hi});
    }
  }
  std::sort(blocked.begin(), blocked.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

  OpenWindow best{0.0, center};
  double cursor = -half_width;
  auto consider = [&](double lo, double hi) {
    if (hi - lo > best.width) best = {hi - lo, wrap_angle(center + 0.5 * (lo + hi))};
  };
  for (const Interval& b : blocked) {
    if (b.lo > cursor) consider(cursor, b.lo);
    cursor = std::max(cursor, b.hi);
  }
  if (half_width > cursor) consider(cursor, half_width);
  return best;
}

inline std::array<Disc, 2> opponent_discs(const WorldState& w, const EnvConfig& cfg) {
  return {Disc{w.opponent_pos[0], cfg.body_radius}, Disc{w.opponent_pos[1], cfg.body_radius}};
}

// Angular extent of the goal mouth seen from `p`: (bisector, half width).
inline std::pair<double, double> goal_interval(Vec2 p, const EnvConfig& cfg) {
  double lo = std::atan2(-cfg.goal_half_width - p.y, cfg.field_length - p.x);
  double hi = std::atan2(cfg.goal_half_width - p.y, cfg.field_length - p.x);
  if (hi < lo) std::swap(lo, hi);
  return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

inline OpenWindow goal_window(Vec2 p, const WorldState& w, const EnvConfig& cfg) {
  auto [mid, half] = goal_interval(p, cfg);
  auto discs = opponent_discs(w, cfg);
  return largest_open_window(p, mid, half, discs);
}

// Angular extent of the receiver's target disc seen from the passer.
inline std::pair<double, double> pass_interval(Vec2 from, Vec2 to, const EnvConfig& cfg) {
  double d = distance(from, to);
  double mid = std::atan2(to.y - from.y, to.x - from.x);
  double half = d > cfg.pass_target_radius ? std::asin(cfg.pass_target_radius / d) : kPi / 2.0;
  return {mid, half};
}

// Only opponents strictly closer to the passer than the receiver can block.
inline std::vector<Disc> pass_occluders(Vec2 from, Vec2 to, const WorldState& w,
                                        const EnvConfig& cfg) {
  std::vector<Disc> out;
  double d = distance(from, to);
  for (Vec2 o : w.opponent_pos)
    if (distance(from, o) < d) out.push_back({o, cfg.body_radius});
  return out;
}

inline OpenWindow pass_window(Vec2 from, Vec2 to, const WorldState& w, const EnvConfig& cfg) {
  auto [mid, half] = pass_interval(from, to, cfg);
  auto discs = pass_occluders(from, to, w, cfg);
  return largest_open_window(from, mid, half, discs);
}

inline double proximity_to_opponent(Vec2 p, const WorldState& w, const EnvConfig& cfg) {
  double nearest = std::min(distance(p, w.opponent_pos[0]), distance(p, w.opponent_pos[1]));
  return std::clamp(1.0 - nearest / cfg.diagonal(), 0.0, 1.0);
}

inline FeatureVector features(const WorldState& w, const EnvConfig& cfg) {
  FeatureVector f{};
  f[kAgentX] = w.agent_pos.x;
  f[kAgentY] = w.agent_pos.y;
  f[kOrientation] = w.agent_orientation;
  f[kBallX] = w.ball_pos.x;
  f[kBallY] = w.ball_pos.y;
  f[kGoalOpeningAngle] = goal_window(w.agent_pos, w, cfg).width;
  f[kProximityToOpponent] = proximity_to_opponent(w.agent_pos, w, cfg);
  f[kTeammateGoalOpeningAngle] = goal_window(w.teammate_pos, w, cfg).width;
  f[kTeammateProximityToOpponent] = proximity_to_opponent(w.teammate_pos, w, cfg);
  f[kPassOpeningAngle] = pass_window(w.agent_pos, w.teammate_pos, w, cfg).width;
  f[kTeammateX] = w.teammate_pos.x;
  f[kTeammateY] = w.teammate_pos.y;
  return f;
}

inline bool in_field(Vec2 p, const EnvConfig& cfg) {
  return p.x >= 0.0 && p.x <= cfg.field_length && std::abs(p.y) <= cfg.field_half_width;
}

inline Vec2 clamp_to_field(Vec2 p, const EnvConfig& cfg) {
  return {std::clamp(p.x, 0.0, cfg.field_length),
          std::clamp(p.y, -cfg.field_half_width, cfg.field_half_width)};
}

}  // namespace otlpp

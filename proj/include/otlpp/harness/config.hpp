#pragma once

// Experiment configuration: INI files with one section per module, plus
// `section.key=value` overrides. Every key is checked against the schema
// below; unknown keys and malformed values are configuration errors.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <type_traits>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "otlpp/agents.hpp"
#include "otlpp/common.hpp"
#include "otlpp/harness/format.hpp"
#include "otlpp/otlpp.hpp"

namespace otlpp::harness {

struct ExperimentConfig {
  OtlppConfig otlpp;
  std::vector<std::string> presets = {"A", "B", "C", "D", "E"};
  std::size_t seeds = 3;
  std::string out_dir = "out";
  std::string library_dir;  // empty: <out_dir>/library
  std::size_t workers = 0;  // 0: hardware concurrency

  std::uint64_t master_seed() const { return otlpp.seed; }

  std::string resolved_library_dir() const {
    return library_dir.empty() ? out_dir + "/library" : library_dir;
  }

  void validate() const {
    otlpp.validate();
    if (presets.empty()) throw ConfigError("experiment: no presets configured");
    for (std::size_t i = 0; i < presets.size(); ++i) {
      preset(presets[i]);
      for (std::size_t j = 0; j < i; ++j)
        if (presets[i] == presets[j]) throw ConfigError("experiment: duplicate preset '" + presets[i] + "'");
    }
    if (seeds < 1) throw ConfigError("experiment: seeds must be >= 1");
    if (out_dir.empty()) throw ConfigError("experiment: out_dir is empty");
  }
};

// 2x64 networks and budgets that finish in minutes on one core.
inline ExperimentConfig desk_scale() {
  ExperimentConfig c;
  c.otlpp.dqn.hidden = {64, 64};
  c.otlpp.dqn.learning_rate = 0.001;
  c.otlpp.dqn.reward_scale = 0.001;
  c.otlpp.dqn.schedule = {0.8, 0.05, 8000};
  c.otlpp.library_episodes = 3000;
  c.otlpp.post_transfer_episodes = 2000;
  c.otlpp.eval_interval = 250;
  c.otlpp.eval_games = 200;
  return c;
}

// 3x512 networks with the original optimizer and exploration settings.
inline ExperimentConfig full_scale() {
  ExperimentConfig c;
  c.otlpp.dqn.hidden = {512, 512, 512};
  c.otlpp.dqn.learning_rate = 0.00025;
  c.otlpp.dqn.reward_scale = 1.0;
  c.otlpp.dqn.schedule = {0.8, 0.05, 20000};
  c.otlpp.library_episodes = 20000;
  c.otlpp.post_transfer_episodes = 20000;
  c.otlpp.eval_interval = 1000;
  c.otlpp.eval_games = 200;
  return c;
}

namespace detail {

inline double parse_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config: " + key + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config: " + key + ": expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto& item : split(v, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

struct Key {
  std::string name;  // section.key
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T, class Field>
Key number_key(std::string name, Field field) {
  return {name,
          [field](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(field(c));
            else
              return std::to_string(field(c));
          },
          [field, name](ExperimentConfig& c, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>)
              field(c) = parse_double(name, v);
            else
              field(c) = static_cast<T>(parse_uint(name, v));
          }};
}

template <class Field>
Key bool_key(std::string name, Field field) {
  return {name, [field](const ExperimentConfig& c) { return std::string(field(c) ? "true" : "false"); },
          [field, name](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(name, v); }};
}

#define OTLPP_DOUBLE(name, expr) number_key<double>(name, [](auto& c) -> auto& { return expr; })
#define OTLPP_SIZE(name, expr) number_key<std::size_t>(name, [](auto& c) -> auto& { return expr; })
#define OTLPP_U64(name, expr) number_key<std::uint64_t>(name, [](auto& c) -> auto& { return expr; })
#define OTLPP_INT(name, expr) number_key<int>(name, [](auto& c) -> auto& { return expr; })
#define OTLPP_BOOL(name, expr) bool_key(name, [](auto& c) -> auto& { return expr; })

inline const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(OTLPP_DOUBLE("env.field_length", c.otlpp.env.field_length));
    k.push_back(OTLPP_DOUBLE("env.field_half_width", c.otlpp.env.field_half_width));
    k.push_back(OTLPP_DOUBLE("env.goal_half_width", c.otlpp.env.goal_half_width));
    k.push_back(OTLPP_INT("env.max_steps", c.otlpp.env.max_steps));
    k.push_back(OTLPP_INT("env.ticks_per_step", c.otlpp.env.ticks_per_step));
    k.push_back(OTLPP_DOUBLE("env.player_speed", c.otlpp.env.player_speed));
    k.push_back(OTLPP_DOUBLE("env.dribble_speed", c.otlpp.env.dribble_speed));
    k.push_back(OTLPP_DOUBLE("env.long_dribble_speed", c.otlpp.env.long_dribble_speed));
    k.push_back(OTLPP_DOUBLE("env.long_dribble_noise", c.otlpp.env.long_dribble_noise));
    k.push_back(OTLPP_DOUBLE("env.move_noise", c.otlpp.env.move_noise));
    k.push_back(OTLPP_DOUBLE("env.body_radius", c.otlpp.env.body_radius));
    k.push_back(OTLPP_DOUBLE("env.capture_radius", c.otlpp.env.capture_radius));
    k.push_back(OTLPP_DOUBLE("env.shot_range", c.otlpp.env.shot_range));
    k.push_back(OTLPP_DOUBLE("env.shot_angle_threshold", c.otlpp.env.shot_angle_threshold));
    k.push_back(OTLPP_DOUBLE("env.shot_noise", c.otlpp.env.shot_noise));
    k.push_back(OTLPP_DOUBLE("env.pass_range", c.otlpp.env.pass_range));
    k.push_back(OTLPP_DOUBLE("env.pass_angle_threshold", c.otlpp.env.pass_angle_threshold));
    k.push_back(OTLPP_DOUBLE("env.pass_noise", c.otlpp.env.pass_noise));
    k.push_back(OTLPP_DOUBLE("env.pass_target_radius", c.otlpp.env.pass_target_radius));
    k.push_back(OTLPP_DOUBLE("env.keeper_speed", c.otlpp.env.keeper_speed));
    k.push_back(OTLPP_DOUBLE("env.chaser_speed", c.otlpp.env.chaser_speed));
    k.push_back(OTLPP_DOUBLE("env.keeper_area_depth", c.otlpp.env.keeper_area_depth));
    k.push_back(OTLPP_DOUBLE("env.keeper_area_half_width", c.otlpp.env.keeper_area_half_width));

    k.push_back({"dqn.hidden",
                 [](const ExperimentConfig& c) {
                   std::vector<std::string> parts;
                   for (auto h : c.otlpp.dqn.hidden) parts.push_back(std::to_string(h));
                   return join(parts);
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                   std::vector<std::size_t> hidden;
                   for (const auto& item : parse_list(v)) hidden.push_back(parse_uint("dqn.hidden", item));
                   c.otlpp.dqn.hidden = std::move(hidden);
                 }});
    k.push_back(OTLPP_DOUBLE("dqn.learning_rate", c.otlpp.dqn.learning_rate));
    k.push_back(OTLPP_DOUBLE("dqn.gamma", c.otlpp.dqn.gamma));
    k.push_back(OTLPP_SIZE("dqn.batch_size", c.otlpp.dqn.batch_size));
    k.push_back(OTLPP_SIZE("dqn.replay_capacity", c.otlpp.dqn.replay_capacity));
    k.push_back(OTLPP_SIZE("dqn.warmup", c.otlpp.dqn.warmup));
    k.push_back(OTLPP_U64("dqn.sync_period", c.otlpp.dqn.sync_period));
    k.push_back(OTLPP_DOUBLE("dqn.reward_scale", c.otlpp.dqn.reward_scale));
    k.push_back(OTLPP_DOUBLE("dqn.epsilon_start", c.otlpp.dqn.schedule.start));
    k.push_back(OTLPP_DOUBLE("dqn.epsilon_end", c.otlpp.dqn.schedule.end));
    k.push_back(OTLPP_U64("dqn.decay_steps", c.otlpp.dqn.schedule.decay_steps));

    k.push_back(OTLPP_DOUBLE("otlpp.eta", c.otlpp.eta));
    k.push_back(OTLPP_DOUBLE("otlpp.sigma", c.otlpp.sigma));
    k.push_back(OTLPP_SIZE("otlpp.model_cap", c.otlpp.model_cap));
    k.push_back(OTLPP_DOUBLE("otlpp.post_transfer_epsilon_start", c.otlpp.post_transfer_epsilon_start));
    k.push_back({"otlpp.criterion",
                 [](const ExperimentConfig& c) {
                   return std::string(c.otlpp.criterion.kind == IdentificationCriterion::Kind::FixedGames
                                          ? "fixed_games"
                                          : "threshold");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "fixed_games")
                     c.otlpp.criterion.kind = IdentificationCriterion::Kind::FixedGames;
                   else if (v == "threshold")
                     c.otlpp.criterion.kind = IdentificationCriterion::Kind::Threshold;
                   else
                     throw ConfigError("config: otlpp.criterion: expected fixed_games or threshold, got '" + v + "'");
                 }});
    k.push_back(OTLPP_SIZE("otlpp.criterion_games", c.otlpp.criterion.games));
    k.push_back(OTLPP_DOUBLE("otlpp.criterion_threshold", c.otlpp.criterion.threshold));
    k.push_back(OTLPP_SIZE("otlpp.identification_max_games", c.otlpp.identification_max_games));
    k.push_back({"otlpp.transfer",
                 [](const ExperimentConfig& c) {
                   return std::string(c.otlpp.transfer.mode == TransferSpec::Mode::AllLayers ? "all_layers"
                                                                                             : "shallow_only");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "all_layers")
                     c.otlpp.transfer.mode = TransferSpec::Mode::AllLayers;
                   else if (v == "shallow_only")
                     c.otlpp.transfer.mode = TransferSpec::Mode::ShallowOnly;
                   else
                     throw ConfigError("config: otlpp.transfer: expected all_layers or shallow_only, got '" + v +
                                       "'");
                 }});
    k.push_back(OTLPP_SIZE("otlpp.transfer_layers", c.otlpp.transfer.shallow_layers));
    k.push_back(OTLPP_BOOL("otlpp.freeze_transferred", c.otlpp.transfer.freeze_shallow));
    k.push_back(OTLPP_SIZE("otlpp.library_episodes", c.otlpp.library_episodes));
    k.push_back(OTLPP_SIZE("otlpp.post_transfer_episodes", c.otlpp.post_transfer_episodes));
    k.push_back(OTLPP_SIZE("otlpp.eval_interval", c.otlpp.eval_interval));
    k.push_back(OTLPP_SIZE("otlpp.eval_games", c.otlpp.eval_games));
    k.push_back(OTLPP_BOOL("otlpp.leave_one_out", c.otlpp.leave_one_out));
    k.push_back(OTLPP_BOOL("otlpp.seed_replay_with_identification",
                           c.otlpp.seed_replay_with_identification));

    k.push_back(OTLPP_U64("experiment.seed", c.otlpp.seed));
    k.push_back(OTLPP_SIZE("experiment.seeds", c.seeds));
    k.push_back(OTLPP_SIZE("experiment.workers", c.workers));
    k.push_back({"experiment.presets", [](const ExperimentConfig& c) { return join(c.presets); },
                 [](ExperimentConfig& c, const std::string& v) { c.presets = parse_list(v); }});
    k.push_back({"experiment.out_dir", [](const ExperimentConfig& c) { return c.out_dir; },
                 [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }});
    k.push_back({"experiment.library_dir", [](const ExperimentConfig& c) { return c.library_dir; },
                 [](ExperimentConfig& c, const std::string& v) { c.library_dir = v; }});
    return k;
  }();
  return keys;
}

#undef OTLPP_DOUBLE
#undef OTLPP_SIZE
#undef OTLPP_U64
#undef OTLPP_INT
#undef OTLPP_BOOL

}  // namespace detail

// Applies one `section.key=value` assignment.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("config: expected key=value, got '" + std::string(assignment) + "'");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  for (const auto& k : detail::schema())
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  throw ConfigError("config: unknown key '" + key + "'");
}

// Parses INI text on top of `base`. Does not validate the result.
inline ExperimentConfig parse_ini(std::istream& is, ExperimentConfig base = desk_scale()) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) apply_override(base, section + "." + key + "=" + value.data());
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = desk_scale()) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file '" + path + "'");
  return parse_ini(in, std::move(base));
}

// Every key, grouped by section, in schema order. parse_ini(to_ini(c)) == c.
inline std::string to_ini(const ExperimentConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& k : detail::schema()) {
    auto dot = k.name.find('.');
    std::string section = k.name.substr(0, dot);
    if (section != current) {
      out += (current.empty() ? "[" : "\n[") + section + "]\n";
      current = section;
    }
    out += k.name.substr(dot + 1) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace otlpp::harness

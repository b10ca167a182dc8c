#pragma once

// Library snapshots on disk (`<dir>/<name>.qnet` + `<dir>/<name>.nnm`) and
// JSON run reports.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "otlpp/beliefs.hpp"
#include "otlpp/common.hpp"
#include "otlpp/harness/csv.hpp"
#include "otlpp/mlp.hpp"
#include "otlpp/model.hpp"
#include "otlpp/otlpp.hpp"

namespace otlpp::harness {

namespace fs = std::filesystem;

inline fs::path policy_path(const fs::path& dir, const std::string& name) { return dir / (name + ".qnet"); }
inline fs::path model_path(const fs::path& dir, const std::string& name) { return dir / (name + ".nnm"); }

inline bool has_entry(const fs::path& dir, const std::string& name) {
  return fs::is_regular_file(policy_path(dir, name)) && fs::is_regular_file(model_path(dir, name));
}

inline std::ofstream open_for_write(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FileError("cannot write '" + p.string() + "'");
  return out;
}

inline std::ifstream open_for_read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FileError("cannot open '" + p.string() + "'");
  return in;
}

inline void write_text(const fs::path& p, const std::string& text) {
  auto out = open_for_write(p);
  out << text;
  if (!out) throw FileError("failed writing '" + p.string() + "'");
}

inline void save_entry(const fs::path& dir, const LibraryEntry& e) {
  {
    auto out = open_for_write(policy_path(dir, e.name));
    write_qnet(out, e.source_net());
  }
  auto out = open_for_write(model_path(dir, e.name));
  write_nnm(out, *e.model);
}

inline LibraryEntry load_entry(const fs::path& dir, const std::string& name) {
  if (!has_entry(dir, name))
    throw FileError("missing library snapshot for '" + name + "' in '" + dir.string() + "'");
  auto with_path = [](const fs::path& p, auto&& read) {
    auto in = open_for_read(p);
    try {
      return read(in);
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what(), e.line());
    }
  };
  MLP net = with_path(policy_path(dir, name), [](std::istream& in) { return read_qnet(in); });
  auto model = std::make_shared<const TeammateModel>(
      with_path(model_path(dir, name), [](std::istream& in) { return read_nnm(in); }));
  return LibraryEntry{name, Policy(std::move(net)), std::move(model)};
}

inline nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["teammate"] = r.teammate;
  j["seed"] = r.seed;
  j["library"] = r.library;
  if (r.identified) {
    j["identified"] = r.identified_name;
    j["identified_index"] = *r.identified;
  } else {
    j["identified"] = nullptr;
  }
  j["identified_by_criterion"] = r.identified_by_criterion;
  j["identification_games"] = r.identification_games;
  j["identification_steps"] = r.identification_steps;
  if (!r.beliefs.empty()) j["final_beliefs"] = r.beliefs.back().probs;
  j["post_transfer_steps"] = r.post_transfer_steps;
  j["post_transfer_updates"] = r.post_transfer_updates;
  std::vector<std::string> outcomes;
  for (Status s : r.outcomes) outcomes.emplace_back(status_name(s));
  j["outcomes"] = outcomes;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : r.curve) curve.push_back({{"episode", p.episode}, {"goal_fraction", p.goal_fraction}});
  j["curve"] = curve;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["teammate"] = r.teammate;
  j["policy_id"] = r.policy_id;
  j["games"] = r.games;
  j["goals"] = r.goals;
  j["goal_fraction"] = r.goal_fraction;
  j["seed"] = r.seed;
  std::vector<std::string> statuses;
  for (Status s : r.statuses) statuses.emplace_back(status_name(s));
  j["statuses"] = statuses;
  return j;
}

}  // namespace otlpp::harness

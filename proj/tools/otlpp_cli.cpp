// otlpp command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "otlpp/harness/config.hpp"
#include "otlpp/harness/csv.hpp"
#include "otlpp/harness/experiment.hpp"
#include "otlpp/harness/io.hpp"
#include "otlpp/harness/plot.hpp"

namespace fs = std::filesystem;
using namespace otlpp;
using namespace otlpp::harness;

namespace {

struct Common {
  std::string profile = "desk";
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--profile", c.profile, "Base settings before the config file: desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  cmd->add_option("--config", c.config_path, "INI config file");
  cmd->add_option("--set", c.overrides, "Override a key: section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--workers", c.workers, "Worker threads (0: all cores)");
  cmd->add_flag("--quiet", c.quiet, "No progress messages");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.profile == "full" ? full_scale() : desk_scale();
  if (!c.config_path.empty()) cfg = load_config(c.config_path, cfg);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (c.seed) cfg.otlpp.seed = *c.seed;
  if (c.out) cfg.out_dir = *c.out;
  if (c.workers) cfg.workers = *c.workers;
  cfg.validate();
  return cfg;
}

Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& m) { std::cerr << m << '\n'; };
}

void write_report(const fs::path& dir, const RunReport& r) {
  {
    auto out = open_for_write(dir / "curves.csv");
    write_curves(out, curve_rows(r));
  }
  write_text(dir / "report.json", to_json(r).dump(2) + "\n");
  if (!r.beliefs.empty()) {
    auto out = open_for_write(dir / "beliefs.csv");
    write_beliefs(out, r.library, r.beliefs);
  }
}

std::vector<std::string> others(const ExperimentConfig& cfg, const std::string& teammate) {
  std::vector<std::string> out;
  for (const auto& p : cfg.presets)
    if (p != teammate) out.push_back(p);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OTLPP: ad hoc teamwork with teammate identification and transfer, on a 2v2 half court"};
  app.require_subcommand(1);

  Common common;
  std::string teammate;
  std::vector<std::string> library_presets;
  bool no_train = false;
  std::optional<std::size_t> seeds;
  std::string policy_file;
  std::optional<std::size_t> games;
  std::vector<std::string> csv_inputs;

  auto* train_cmd = app.add_subcommand("train-library", "Train and save library entries for every configured preset");
  add_common(train_cmd, common);
  train_cmd->add_option("--seeds", seeds, "Number of runs");

  auto* identify_cmd = app.add_subcommand("identify", "Identify a teammate against a library and log beliefs");
  add_common(identify_cmd, common);
  identify_cmd->add_option("--teammate", teammate, "Teammate preset")->required();
  identify_cmd->add_option("--library", library_presets, "Library presets (default: all configured)")
      ->delimiter(',');
  identify_cmd->add_flag("--no-train", no_train, "Fail instead of training missing library entries");

  auto* run_cmd = app.add_subcommand("run", "Identification, transfer and post-transfer learning");
  add_common(run_cmd, common);
  run_cmd->add_option("--teammate", teammate, "Teammate preset")->required();
  run_cmd->add_option("--library", library_presets, "Library presets (default: all others)")->delimiter(',');
  run_cmd->add_flag("--no-train", no_train, "Fail instead of training missing library entries");

  auto* baseline_cmd = app.add_subcommand("baseline", "DQN from scratch with one teammate");
  add_common(baseline_cmd, common);
  baseline_cmd->add_option("--teammate", teammate, "Teammate preset")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Greedy goal fraction of a saved policy");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--policy", policy_file, "QNETv1 policy file")->required();
  eval_cmd->add_option("--teammate", teammate, "Teammate preset")->required();
  eval_cmd->add_option("--games", games, "Number of games (default: otlpp.eval_games)");

  auto* loo_cmd = app.add_subcommand("leave-one-out", "OTLPP vs scratch for every preset");
  add_common(loo_cmd, common);
  loo_cmd->add_option("--seeds", seeds, "Number of runs");
  loo_cmd->add_flag("--no-train", no_train, "Fail instead of training missing library entries");

  auto* plot_cmd = app.add_subcommand("plot", "Render learning-curve CSVs to <out>/curves.svg");
  add_common(plot_cmd, common);
  plot_cmd->add_option("csv", csv_inputs, "Learning-curve CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig cfg = resolve(common);
    if (seeds) {
      cfg.seeds = *seeds;
      cfg.validate();
    }
    const fs::path out = cfg.out_dir;
    const std::uint64_t run0 = run_seed(cfg.master_seed(), 0);

    if (*train_cmd) {
      for (std::size_t k = 0; k < cfg.seeds; ++k) {
        std::uint64_t run = run_seed(cfg.master_seed(), k);
        obtain_library(cfg, run, cfg.presets, false, cfg.workers, logger(common));
        std::cout << run_library_dir(cfg, run).string() << '\n';
      }
    } else if (*identify_cmd) {
      preset(teammate);
      auto names = library_presets.empty() ? cfg.presets : library_presets;
      auto library = obtain_library(cfg, run0, names, no_train, cfg.workers, logger(common));
      auto id = identify_teammate(library, preset(teammate), cfg.otlpp, trial_seed(run0, teammate));
      {
        auto f = open_for_write(out / "beliefs.csv");
        write_beliefs(f, names, id.log);
      }
      nlohmann::ordered_json j;
      j["teammate"] = teammate;
      j["library"] = names;
      j["identified"] = names[id.beliefs.argmax()];
      j["by_criterion"] = id.by_criterion;
      j["games"] = id.games;
      j["steps"] = id.steps;
      j["beliefs"] = id.beliefs.probs();
      write_text(out / "identify.json", j.dump(2) + "\n");
      std::cout << names[id.beliefs.argmax()] << '\n';
    } else if (*run_cmd) {
      preset(teammate);
      auto names = library_presets.empty() ? others(cfg, teammate) : library_presets;
      auto library = obtain_library(cfg, run0, names, no_train, cfg.workers, logger(common));
      auto rep = run_otlpp(library, teammate, preset(teammate), cfg.otlpp, trial_seed(run0, teammate),
                           eval_seed(run0, teammate));
      rep.seed = run0;
      write_report(out, rep);
      std::cout << "identified " << rep.identified_name << ", final goal fraction "
                << format_double(rep.curve.empty() ? 0.0 : rep.curve.back().goal_fraction) << '\n';
    } else if (*baseline_cmd) {
      auto rep = run_scratch(teammate, preset(teammate), cfg.otlpp, trial_seed(run0, teammate),
                             eval_seed(run0, teammate));
      rep.seed = run0;
      write_report(out, rep);
      std::cout << "final goal fraction " << format_double(rep.curve.empty() ? 0.0 : rep.curve.back().goal_fraction)
                << '\n';
    } else if (*eval_cmd) {
      auto in = open_for_read(policy_file);
      MLP net = read_qnet(in);
      auto r = eval_goal_fraction(Policy(std::move(net)), teammate, preset(teammate),
                                  games.value_or(cfg.otlpp.eval_games), eval_seed(run0, teammate), cfg.otlpp.env,
                                  fs::path(policy_file).filename().string());
      write_text(out / "eval.json", to_json(r).dump(2) + "\n");
      std::cout << r.goals << '/' << r.games << " = " << format_double(r.goal_fraction) << '\n';
    } else if (*loo_cmd) {
      auto res = run_leave_one_out(cfg, no_train, logger(common));
      write_leave_one_out(res, cfg, out);
      std::cout << "preset,scratch,otlpp\n";
      for (const auto& row : res.summary())
        std::cout << row.preset << ',' << format_double(row.scratch) << ',' << format_double(row.otlpp) << '\n';
    } else if (*plot_cmd) {
      fs::create_directories(out);
      plot_curves(csv_inputs, (out / "curves.svg").string());
      std::cout << (out / "curves.svg").string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "otlpp/eval.hpp"
#include "otlpp/harness/config.hpp"
#include "otlpp/harness/csv.hpp"
#include "otlpp/harness/experiment.hpp"
#include "otlpp/harness/io.hpp"
#include "otlpp/harness/plot.hpp"

using namespace otlpp;
using namespace otlpp::harness;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory named after the running test.
fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / "otlpp-tests" / (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_experiment(const fs::path& out) {
  ExperimentConfig c = desk_scale();
  c.presets = {"A", "B", "C"};
  c.seeds = 2;
  c.out_dir = out.string();
  c.otlpp.dqn.hidden = {8};
  c.otlpp.dqn.warmup = 16;
  c.otlpp.dqn.batch_size = 8;
  c.otlpp.library_episodes = 3;
  c.otlpp.post_transfer_episodes = 4;
  c.otlpp.eval_interval = 2;
  c.otlpp.eval_games = 3;
  c.otlpp.criterion = IdentificationCriterion::fixed_games(2);
  c.workers = 1;
  return c;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(OTLPP_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Eval, DeterministicAndBounded) {
  Policy p(init_mlp({12, 16, 11}, 3));
  EnvConfig env;
  auto a = eval_goal_fraction(p, "B", preset("B"), 50, 9, env);
  auto b = eval_goal_fraction(p, "B", preset("B"), 50, 9, env);
  EXPECT_EQ(a.statuses, b.statuses);
  EXPECT_EQ(a.goal_fraction, b.goal_fraction);
  EXPECT_GE(a.goal_fraction, 0.0);
  EXPECT_LE(a.goal_fraction, 1.0);
  std::size_t goals = std::count(a.statuses.begin(), a.statuses.end(), Status::Goal);
  EXPECT_EQ(a.goals, goals);
  EXPECT_DOUBLE_EQ(a.goal_fraction, goals / 50.0);
  EXPECT_THROW(eval_goal_fraction(p, "B", preset("B"), 0, 9, env), ConfigError);
}

TEST(Eval, PolicyThatAlwaysShootsFromStartRarelyScores) {
  // Greedy Shoot from the offense's own half is out of range every time.
  MLP net = init_mlp({12, 11}, 1);
  std::fill(net.layers[0].w.begin(), net.layers[0].w.end(), 0.0);
  net.layers[0].b[index_of(Action::Shoot)] = 1.0;
  auto r = eval_goal_fraction(Policy(net), "A", preset("A"), 40, 2, EnvConfig{});
  for (Status s : r.statuses) EXPECT_NE(s, Status::InGame);
  EXPECT_LE(r.goal_fraction, 0.1);
}

TEST(Config, IniRoundTrip) {
  ExperimentConfig c = desk_scale();
  c.otlpp.eta = 0.25;
  c.otlpp.dqn.hidden = {32, 16, 8};
  c.otlpp.criterion = IdentificationCriterion::probability(0.75);
  c.otlpp.transfer = TransferSpec::shallow_only(2, true);
  c.otlpp.env.shot_noise = 1.0 / 3.0;
  c.presets = {"E", "A"};
  c.out_dir = "runs/x";
  std::string text = to_ini(c);
  std::istringstream in(text);
  ExperimentConfig back = parse_ini(in, full_scale());
  EXPECT_EQ(to_ini(back), text);
  EXPECT_EQ(back.otlpp.dqn.hidden, (std::vector<std::size_t>{32, 16, 8}));
  EXPECT_EQ(back.otlpp.env.shot_noise, 1.0 / 3.0);
  EXPECT_EQ(back.otlpp.criterion.kind, IdentificationCriterion::Kind::Threshold);
  EXPECT_EQ(back.otlpp.transfer.mode, TransferSpec::Mode::ShallowOnly);
  EXPECT_TRUE(back.otlpp.transfer.freeze_shallow);
  EXPECT_EQ(back.presets, (std::vector<std::string>{"E", "A"}));
}

TEST(Config, OverridesAndErrors) {
  ExperimentConfig c = desk_scale();
  apply_override(c, "otlpp.eta = 0.3");
  EXPECT_EQ(c.otlpp.eta, 0.3);
  apply_override(c, "dqn.hidden=16,16");
  EXPECT_EQ(c.otlpp.dqn.hidden, (std::vector<std::size_t>{16, 16}));
  EXPECT_THROW(apply_override(c, "otlpp.etta=0.3"), ConfigError);
  EXPECT_THROW(apply_override(c, "otlpp.eta=fast"), ConfigError);
  EXPECT_THROW(apply_override(c, "dqn.batch_size=-4"), ConfigError);
  EXPECT_THROW(apply_override(c, "no-equals-sign"), ConfigError);
  EXPECT_THROW(apply_override(c, "otlpp.criterion=sometimes"), ConfigError);

  std::istringstream unknown("[dqn]\ngamma = 0.9\nbogus = 1\n");
  EXPECT_THROW(parse_ini(unknown), ConfigError);
  std::istringstream broken("[dqn\ngamma = 0.9\n");
  EXPECT_THROW(parse_ini(broken), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/otlpp.ini"), FileError);

  ExperimentConfig bad = desk_scale();
  bad.presets = {"A", "A"};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.presets = {"Q"};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, ShippedProfilesMatchBuiltIns) {
  fs::path dir(OTLPP_CONFIG_DIR);
  EXPECT_EQ(to_ini(load_config((dir / "desk.ini").string(), full_scale())), to_ini(desk_scale()));
  EXPECT_EQ(to_ini(load_config((dir / "full.ini").string(), desk_scale())), to_ini(full_scale()));
  load_config((dir / "full.ini").string()).validate();
}

TEST(Csv, CurvesRoundTrip) {
  std::vector<CurveRow> rows = {{"otlpp", "A", 123, 0, 0.1}, {"otlpp", "A", 123, 250, 1.0 / 3.0},
                                {"scratch", "A", 18446744073709551615ull, 250, 0.0}};
  std::stringstream ss;
  write_curves(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kCurveHeader);
  EXPECT_EQ(read_curves(ss), rows);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_curves(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  std::string h = std::string(kCurveHeader) + "\n";
  EXPECT_EQ(line_of("method,preset\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of(h + "otlpp,A,1,0,0.5\notlpp,A,1,0\n"), 3u);
  EXPECT_EQ(line_of(h + "otlpp,A,x,0,0.5\n"), 2u);
  EXPECT_EQ(line_of(h + "otlpp,A,1,0,0.5\notlpp,A,1,5,1.5\n"), 3u);
  EXPECT_EQ(line_of(h + "otlpp,A,1,0,abc\n"), 2u);
  EXPECT_EQ(line_of(h + ",A,1,0,0.5\n"), 2u);
  EXPECT_EQ(line_of(h + "otlpp,A,1,0,0.5\n"), 0u);
}

TEST(Csv, SummaryRoundTrip) {
  std::vector<SummaryRow> rows = {{"A", 0.5, 0.625, 0.1, 0.05, 0.0, 0.4}, {"B", 0.2, 0.3, 0.0, 0.0, 0.01, 0.2}};
  std::stringstream ss;
  write_summary(ss, rows);
  auto back = read_summary(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].preset, "A");
  EXPECT_EQ(back[0].otlpp, 0.625);
  EXPECT_EQ(back[1].scratch_first, 0.01);
}

TEST(Plot, EmptyInputWritesNothing) {
  fs::path dir = scratch_dir();
  EXPECT_THROW(render_svg({}), UsageError);
  {
    std::ofstream(dir / "empty.csv") << kCurveHeader << "\n";
  }
  EXPECT_THROW(plot_curves({(dir / "empty.csv").string()}, (dir / "out.svg").string()), UsageError);
  EXPECT_FALSE(fs::exists(dir / "out.svg"));
  {
    std::ofstream(dir / "bad.csv") << kCurveHeader << "\notlpp,A,1,0,2\n";
  }
  std::ofstream(dir / "good.csv") << kCurveHeader << "\notlpp,A,1,0,0.5\n";
  EXPECT_THROW(plot_curves({(dir / "good.csv").string(), (dir / "bad.csv").string()}, (dir / "out.svg").string()),
               ParseError);
  EXPECT_FALSE(fs::exists(dir / "out.svg"));
}

TEST(Plot, SinglePointPerMethodDrawsMarkersOnly) {
  std::vector<CurveRow> rows = {{"otlpp", "A", 1, 0, 0.4}, {"scratch", "A", 1, 0, 0.1}};
  std::string svg = render_svg(rows);
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("<circle"), 2u);
  EXPECT_EQ(count("<polyline"), 0u);
}

TEST(Plot, AggregatesSeedsIntoMeanAndSpread) {
  std::vector<CurveRow> rows = {{"otlpp", "B", 1, 0, 0.2}, {"otlpp", "B", 2, 0, 0.4},
                                {"otlpp", "B", 1, 10, 0.5}, {"otlpp", "B", 2, 10, 0.5}};
  auto panels = aggregate(rows);
  ASSERT_EQ(panels.size(), 1u);
  const auto& pts = panels[0].methods.at(0).points;
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[0].mean, 0.3, 1e-15);
  EXPECT_NEAR(pts[0].std, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(pts[1].std, 0.0);
  EXPECT_EQ(pts[0].n, 2u);
}

TEST(Plot, MatchesGoldenSvg) {
  fs::path golden = fs::path(OTLPP_GOLDEN_DIR);
  auto rows = read_curves_file((golden / "curves_input.csv").string());
  std::string svg = render_svg(rows);
  if (std::getenv("OTLPP_REGEN_GOLDEN")) {
    std::ofstream(golden / "curves.svg", std::ios::binary) << svg;
    GTEST_SKIP() << "golden regenerated";
  }
  EXPECT_EQ(svg, slurp(golden / "curves.svg"));
}

TEST(Library, SaveLoadRoundTrip) {
  fs::path dir = scratch_dir();
  OtlppConfig c = tiny_experiment(dir).otlpp;
  LibraryEntry e = learn_about_prior_teammate("B", preset("B"), c, 3);
  EXPECT_FALSE(has_entry(dir / "lib", "B"));
  save_entry(dir / "lib", e);
  EXPECT_TRUE(has_entry(dir / "lib", "B"));
  LibraryEntry back = load_entry(dir / "lib", "B");
  EXPECT_EQ(back.name, "B");
  EXPECT_EQ(back.source_net(), e.source_net());
  ASSERT_EQ(back.model->size(), e.model->size());
  EXPECT_EQ(back.model->sigma(), e.model->sigma());
  EXPECT_THROW(load_entry(dir / "lib", "C"), FileError);
}

TEST(LeaveOneOut, DeterministicAcrossWorkerCounts) {
  fs::path dir = scratch_dir();
  ExperimentConfig one = tiny_experiment(dir / "w1");
  ExperimentConfig two = tiny_experiment(dir / "w2");
  two.workers = 2;
  auto a = run_leave_one_out(one);
  auto b = run_leave_one_out(two);
  EXPECT_EQ(a.curves(), b.curves());
  write_leave_one_out(a, one, dir / "w1");
  write_leave_one_out(b, two, dir / "w2");
  EXPECT_EQ(slurp(dir / "w1" / "curves.csv"), slurp(dir / "w2" / "curves.csv"));
  EXPECT_EQ(slurp(dir / "w1" / "summary.csv"), slurp(dir / "w2" / "summary.csv"));
  EXPECT_EQ(slurp(dir / "w1" / "beliefs" / "B-1.csv"), slurp(dir / "w2" / "beliefs" / "B-1.csv"));

  // Cached library snapshots reproduce the same results.
  auto c = run_leave_one_out(one, true);
  EXPECT_EQ(a.curves(), c.curves());
}

TEST(LeaveOneOut, OutputShape) {
  fs::path dir = scratch_dir();
  ExperimentConfig cfg = tiny_experiment(dir);
  auto res = run_leave_one_out(cfg);
  auto summary = res.summary();
  ASSERT_EQ(summary.size(), 3u);
  for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(summary[p].preset, cfg.presets[p]);
  for (std::size_t k = 0; k < cfg.seeds; ++k)
    for (std::size_t p = 0; p < 3; ++p) {
      const auto& r = res.otlpp_run(k, p);
      EXPECT_EQ(r.teammate, cfg.presets[p]);
      EXPECT_EQ(r.library.size(), 2u);
      EXPECT_EQ(std::count(r.library.begin(), r.library.end(), cfg.presets[p]), 0);
      EXPECT_EQ(r.seed, run_seed(cfg.master_seed(), k));
      EXPECT_EQ(res.scratch_run(k, p).seed, r.seed);
    }
  // 3 evaluations (episodes 0, 2, 4) x 2 methods x 2 seeds x 3 presets.
  EXPECT_EQ(res.curves().size(), 36u);
  write_leave_one_out(res, cfg, dir / "report");
  for (auto f : {"curves.csv", "summary.csv", "runs.json", "config.ini", "curves.svg", "beliefs/A-0.csv"})
    EXPECT_TRUE(fs::exists(dir / "report" / f)) << f;
  EXPECT_EQ(read_curves_file((dir / "report" / "curves.csv").string()), res.curves());
}

TEST(LeaveOneOut, NoTrainWithoutCacheIsFileError) {
  fs::path dir = scratch_dir();
  ExperimentConfig cfg = tiny_experiment(dir);
  EXPECT_THROW(run_leave_one_out(cfg, true), FileError);
  cfg.presets = {"A"};
  EXPECT_THROW(run_leave_one_out(cfg), ConfigError);
}

TEST(Jobs, CollectsEveryIndexAndRethrowsLowestFailure) {
  for (std::size_t workers : {1u, 3u}) {
    std::vector<int> got(20, -1);
    run_jobs(20, workers, [](std::size_t i) { return static_cast<int>(i * i); },
             [&](std::size_t i, int v) { got[i] = v; });
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(got[i], static_cast<int>(i * i));
    try {
      run_jobs(10, workers,
               [](std::size_t i) -> int {
                 if (i == 3 || i == 7) throw std::runtime_error("job " + std::to_string(i));
                 return 0;
               },
               [](std::size_t, int) {});
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "job 3");
    }
  }
}

TEST(Cli, ExitCodes) {
  fs::path dir = scratch_dir();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("leave-one-out --help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("leave-one-out --set otlpp.bogus=1 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("leave-one-out --set otlpp.eta=2 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("plot " + (dir / "missing.csv").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("eval --policy " + (dir / "missing.qnet").string() + " --teammate A --out " + dir.string()), 2);

  std::ofstream(dir / "c.csv") << kCurveHeader << "\notlpp,A,1,0,0.5\notlpp,A,1,10,0.7\n";
  EXPECT_EQ(run_cli("plot " + (dir / "c.csv").string() + " --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "curves.svg"));
}

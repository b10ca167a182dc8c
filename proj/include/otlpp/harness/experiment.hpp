#pragma once

// Leave-one-out experiment runner.
//
// Seeds: run k (0-based) uses run_seed = split_seed(master, k). Within a run,
// the library entry for preset P is trained with split_seed(run_seed, 100 + i)
// where i is P's position in the preset table, and the OTLPP and scratch runs
// for P share seed split_seed(run_seed, 200 + i) and evaluation seed
// split_seed(run_seed, 300 + i), so both face the same training and
// evaluation episodes. Each library entry is trained once per run and shared
// by every leave-one-out library that contains it.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "otlpp/agents.hpp"
#include "otlpp/common.hpp"
#include "otlpp/harness/config.hpp"
#include "otlpp/harness/csv.hpp"
#include "otlpp/harness/io.hpp"
#include "otlpp/harness/plot.hpp"
#include "otlpp/otlpp.hpp"

namespace otlpp::harness {

inline std::size_t preset_index(const std::string& name) {
  for (std::size_t i = 0; i < kPresets.size(); ++i)
    if (kPresets[i].name == name) return i;
  throw ConfigError("unknown teammate preset '" + name + "'");
}

inline std::uint64_t run_seed(std::uint64_t master, std::size_t k) { return split_seed(master, k); }
inline std::uint64_t library_seed(std::uint64_t run, const std::string& p) {
  return split_seed(run, 100 + preset_index(p));
}
inline std::uint64_t trial_seed(std::uint64_t run, const std::string& p) {
  return split_seed(run, 200 + preset_index(p));
}
inline std::uint64_t eval_seed(std::uint64_t run, const std::string& p) {
  return split_seed(run, 300 + preset_index(p));
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Cached library snapshots for one run live in <library_dir>/<hex run seed>.
inline fs::path run_library_dir(const ExperimentConfig& cfg, std::uint64_t run) {
  return fs::path(cfg.resolved_library_dir()) / hex64(run);
}

// Unbounded multi-producer, single-consumer queue.
template <class T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(value));
    }
    ready_.notify_one();
  }

  T receive() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return !queue_.empty(); });
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> queue_;
};

// Runs job(i) for i in [0, n) on up to `workers` threads (0: all cores).
// Workers send (i, result) messages; the calling thread is the only consumer
// and hands each result to collect(i, result). After all jobs finish, the
// exception of the lowest failing index is rethrown.
template <class Job, class Collect>
void run_jobs(std::size_t n, std::size_t workers, Job&& job, Collect&& collect) {
  using R = std::invoke_result_t<Job&, std::size_t>;
  struct Message {
    std::size_t index;
    std::optional<R> value;
    std::exception_ptr error;
  };
  if (n == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);

  Channel<Message> channel;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        channel.send({i, std::optional<R>(job(i)), nullptr});
      } catch (...) {
        channel.send({i, std::nullopt, std::current_exception()});
      }
    }
  };
  std::vector<std::exception_ptr> errors(n);
  auto drain = [&](std::size_t count) {
    for (std::size_t received = 0; received < count; ++received) {
      Message m = channel.receive();
      if (m.error)
        errors[m.index] = m.error;
      else
        collect(m.index, std::move(*m.value));
    }
  };
  if (workers <= 1) {
    worker();
    drain(n);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    drain(n);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

using Logger = std::function<void(const std::string&)>;

// Trains or loads the library entries for every configured preset of run
// `run`. With `no_train`, missing snapshots are a FileError.
inline std::vector<LibraryEntry> obtain_library(const ExperimentConfig& cfg, std::uint64_t run,
                                                const std::vector<std::string>& names, bool no_train,
                                                std::size_t workers, const Logger& log = {}) {
  fs::path dir = run_library_dir(cfg, run);
  for (const auto& n : names)
    if (no_train && !has_entry(dir, n))
      throw FileError("--no-train: no cached library snapshot for '" + n + "' in '" + dir.string() + "'");
  std::vector<LibraryEntry> out(names.size());
  std::mutex log_mutex;
  run_jobs(
      names.size(), workers,
      [&](std::size_t i) {
        const std::string& n = names[i];
        if (has_entry(dir, n)) return load_entry(dir, n);
        if (log) {
          std::lock_guard lock(log_mutex);
          log("training library entry " + n + " (run seed " + hex64(run) + ")");
        }
        return learn_about_prior_teammate(n, preset(n), cfg.otlpp, library_seed(run, n));
      },
      [&](std::size_t i, LibraryEntry e) {
        if (!has_entry(dir, e.name)) save_entry(dir, e);
        out[i] = std::move(e);
      });
  return out;
}

struct LeaveOneOutResult {
  std::vector<std::string> presets;
  std::size_t seeds = 0;
  // Indexed [seed * presets.size() + preset].
  std::vector<RunReport> otlpp;
  std::vector<RunReport> scratch;

  const RunReport& otlpp_run(std::size_t seed, std::size_t p) const { return otlpp[seed * presets.size() + p]; }
  const RunReport& scratch_run(std::size_t seed, std::size_t p) const {
    return scratch[seed * presets.size() + p];
  }

  // Rows ordered by preset, method (otlpp, scratch), seed, episode.
  std::vector<CurveRow> curves() const {
    std::vector<CurveRow> rows;
    for (std::size_t p = 0; p < presets.size(); ++p)
      for (int m = 0; m < 2; ++m)
        for (std::size_t s = 0; s < seeds; ++s) {
          auto r = curve_rows(m == 0 ? otlpp_run(s, p) : scratch_run(s, p));
          rows.insert(rows.end(), r.begin(), r.end());
        }
    return rows;
  }

  std::vector<SummaryRow> summary() const {
    std::vector<SummaryRow> rows;
    for (std::size_t p = 0; p < presets.size(); ++p) {
      std::vector<double> sf, of, s0, o0;
      for (std::size_t s = 0; s < seeds; ++s) {
        const auto& sc = scratch_run(s, p).curve;
        const auto& ot = otlpp_run(s, p).curve;
        if (!sc.empty()) {
          sf.push_back(sc.back().goal_fraction);
          s0.push_back(sc.front().goal_fraction);
        }
        if (!ot.empty()) {
          of.push_back(ot.back().goal_fraction);
          o0.push_back(ot.front().goal_fraction);
        }
      }
      rows.push_back({presets[p], mean_of(sf), mean_of(of), sample_std(sf), sample_std(of), mean_of(s0),
                      mean_of(o0)});
    }
    return rows;
  }
};

// For each preset P and each seed: OTLPP with a library of the other presets,
// and a scratch DQN with P. Every individual run is single-threaded; runs are
// spread over `cfg.workers` threads and the calling thread collects them into
// fixed slots and owns the snapshot files, so the result does not depend on
// the number of workers.
inline LeaveOneOutResult run_leave_one_out(const ExperimentConfig& cfg, bool no_train = false,
                                           const Logger& log = {}) {
  cfg.validate();
  if (cfg.presets.size() < 2) throw ConfigError("leave-one-out needs at least 2 presets");
  const std::size_t np = cfg.presets.size();
  LeaveOneOutResult res;
  res.presets = cfg.presets;
  res.seeds = cfg.seeds;
  res.otlpp.resize(cfg.seeds * np);
  res.scratch.resize(cfg.seeds * np);

  std::vector<std::uint64_t> runs(cfg.seeds);
  for (std::size_t k = 0; k < cfg.seeds; ++k) runs[k] = run_seed(cfg.master_seed(), k);

  if (no_train)
    for (auto run : runs)
      for (const auto& n : cfg.presets)
        if (!has_entry(run_library_dir(cfg, run), n))
          throw FileError("--no-train: no cached library snapshot for '" + n + "' in '" +
                          run_library_dir(cfg, run).string() + "'");

  std::mutex log_mutex;
  auto say = [&](const std::string& msg) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    log(msg);
  };

  // Phase 1: library entries and scratch baselines; neither depends on the other.
  // Even jobs build library entries, odd jobs run the scratch baselines.
  using Phase1 = std::variant<LibraryEntry, RunReport>;
  std::vector<LibraryEntry> entries(cfg.seeds * np);
  run_jobs(
      2 * cfg.seeds * np, cfg.workers,
      [&](std::size_t job) -> Phase1 {
        std::size_t slot = job / 2;
        std::size_t k = slot / np, p = slot % np;
        const std::string& name = cfg.presets[p];
        std::uint64_t run = runs[k];
        if (job % 2 == 0) {
          fs::path dir = run_library_dir(cfg, run);
          if (has_entry(dir, name)) return load_entry(dir, name);
          say("library " + name + " seed#" + std::to_string(k));
          return learn_about_prior_teammate(name, preset(name), cfg.otlpp, library_seed(run, name));
        }
        say("scratch " + name + " seed#" + std::to_string(k));
        RunReport r = run_scratch(name, preset(name), cfg.otlpp, trial_seed(run, name), eval_seed(run, name));
        r.seed = run;
        return r;
      },
      [&](std::size_t job, Phase1 result) {
        std::size_t slot = job / 2;
        if (auto* e = std::get_if<LibraryEntry>(&result)) {
          fs::path dir = run_library_dir(cfg, runs[slot / np]);
          if (!has_entry(dir, e->name)) save_entry(dir, *e);
          entries[slot] = std::move(*e);
        } else {
          res.scratch[slot] = std::move(std::get<RunReport>(result));
        }
      });

  // Phase 2: OTLPP with each leave-one-out library.
  run_jobs(
      cfg.seeds * np, cfg.workers,
      [&](std::size_t slot) {
        std::size_t k = slot / np, p = slot % np;
        const std::string& name = cfg.presets[p];
        std::uint64_t run = runs[k];
        std::vector<LibraryEntry> library;
        for (std::size_t q = 0; q < np; ++q)
          if (q != p) library.push_back(entries[k * np + q]);
        say("otlpp " + name + " seed#" + std::to_string(k));
        RunReport r = run_otlpp(library, name, preset(name), cfg.otlpp, trial_seed(run, name), eval_seed(run, name));
        r.seed = run;
        return r;
      },
      [&](std::size_t slot, RunReport r) { res.otlpp[slot] = std::move(r); });
  return res;
}

// Writes curves.csv, summary.csv, runs.json, beliefs/<P>-<k>.csv,
// curves.svg and the resolved config.ini under `dir`.
inline void write_leave_one_out(const LeaveOneOutResult& res, const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  auto curves = res.curves();
  {
    auto out = open_for_write(dir / "curves.csv");
    write_curves(out, curves);
  }
  {
    auto out = open_for_write(dir / "summary.csv");
    write_summary(out, res.summary());
  }
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < res.seeds; ++k)
    for (std::size_t p = 0; p < res.presets.size(); ++p) {
      runs.push_back(to_json(res.otlpp_run(k, p)));
      runs.push_back(to_json(res.scratch_run(k, p)));
      auto out = open_for_write(dir / "beliefs" / (res.presets[p] + "-" + std::to_string(k) + ".csv"));
      write_beliefs(out, res.otlpp_run(k, p).library, res.otlpp_run(k, p).beliefs);
    }
  write_text(dir / "runs.json", runs.dump(2) + "\n");
  write_text(dir / "config.ini", to_ini(cfg));
  if (!curves.empty()) write_text(dir / "curves.svg", render_svg(curves));
}

}  // namespace otlpp::harness

#pragma once

// Learning-curve CSV: header `method,preset,seed,episode,eval_goal_fraction`,
// one row per evaluation snapshot. `episode` is the training-episode index at
// which the snapshot was taken.

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "otlpp/common.hpp"
#include "otlpp/harness/format.hpp"
#include "otlpp/otlpp.hpp"

namespace otlpp::harness {

inline constexpr const char* kCurveHeader = "method,preset,seed,episode,eval_goal_fraction";

struct CurveRow {
  std::string method;
  std::string preset;
  std::uint64_t seed = 0;
  std::size_t episode = 0;
  double eval_goal_fraction = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

inline std::vector<CurveRow> curve_rows(const RunReport& r) {
  std::vector<CurveRow> out;
  for (const auto& p : r.curve) out.push_back({r.method, r.teammate, r.seed, p.episode, p.goal_fraction});
  return out;
}

inline void write_curves(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << kCurveHeader << '\n';
  for (const auto& r : rows)
    os << r.method << ',' << r.preset << ',' << r.seed << ',' << r.episode << ','
       << format_double(r.eval_goal_fraction) << '\n';
}

namespace detail {

inline bool plain_field(const std::string& s) {
  return !s.empty() && s.find_first_of(",\"\n\r") == std::string::npos;
}

}  // namespace detail

// Throws ParseError with the 1-based line number of the first bad line.
inline std::vector<CurveRow> read_curves(std::istream& is) {
  std::vector<CurveRow> rows;
  std::string line;
  std::size_t line_no = 0;
  auto strip = [&]() {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  ++line_no;
  if (!std::getline(is, line)) throw ParseError("empty file, expected header", line_no);
  strip();
  if (line != kCurveHeader) throw ParseError(std::string("expected header '") + kCurveHeader + "'", line_no);
  while (std::getline(is, line)) {
    ++line_no;
    strip();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), line_no);
    if (!detail::plain_field(f[0]) || !detail::plain_field(f[1]))
      throw ParseError("method and preset must be non-empty", line_no);
    CurveRow r;
    r.method = f[0];
    r.preset = f[1];
    auto parse_u = [&](const std::string& s, const char* what) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw ParseError(std::string("malformed ") + what + " '" + s + "'", line_no);
      return v;
    };
    r.seed = parse_u(f[2], "seed");
    r.episode = parse_u(f[3], "episode");
    const std::string& g = f[4];
    auto [p, ec] = std::from_chars(g.data(), g.data() + g.size(), r.eval_goal_fraction);
    if (ec != std::errc{} || p != g.data() + g.size() || g.empty())
      throw ParseError("malformed eval_goal_fraction '" + g + "'", line_no);
    if (!(r.eval_goal_fraction >= 0.0 && r.eval_goal_fraction <= 1.0))
      throw ParseError("eval_goal_fraction outside [0, 1]", line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<CurveRow> read_curves_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'");
  try {
    return read_curves(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

// Belief trajectory: `game,step,<entry names...>`.
inline void write_beliefs(std::ostream& os, const std::vector<std::string>& names,
                          const std::vector<BeliefRow>& rows) {
  os << "game,step";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (const auto& r : rows) {
    os << r.game << ',' << r.step;
    for (double p : r.probs) os << ',' << format_double(p);
    os << '\n';
  }
}

// Final-performance table: mean and sample std of the last evaluation per
// method, plus the mean of the first evaluation.
struct SummaryRow {
  std::string preset;
  double scratch = 0.0;
  double otlpp = 0.0;
  double scratch_std = 0.0;
  double otlpp_std = 0.0;
  double scratch_first = 0.0;
  double otlpp_first = 0.0;
};

inline constexpr const char* kSummaryHeader = "preset,scratch,otlpp,scratch_std,otlpp_std,scratch_first,otlpp_first";

inline void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows)
    os << r.preset << ',' << format_double(r.scratch) << ',' << format_double(r.otlpp) << ','
       << format_double(r.scratch_std) << ',' << format_double(r.otlpp_std) << ','
       << format_double(r.scratch_first) << ',' << format_double(r.otlpp_first) << '\n';
}

inline std::vector<SummaryRow> read_summary(std::istream& is) {
  std::vector<SummaryRow> rows;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line)) throw ParseError("empty file, expected header", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryHeader) throw ParseError(std::string("expected header '") + kSummaryHeader + "'", line_no);
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 7) throw ParseError("expected 7 fields, got " + std::to_string(f.size()), line_no);
    SummaryRow r;
    r.preset = f[0];
    double* targets[] = {&r.scratch, &r.otlpp, &r.scratch_std, &r.otlpp_std, &r.scratch_first, &r.otlpp_first};
    for (std::size_t i = 0; i < 6; ++i) {
      const std::string& s = f[i + 1];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *targets[i]);
      if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw ParseError("malformed number '" + s + "'", line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace otlpp::harness

#pragma once

// SVG rendering of learning curves: one panel per preset, one mean line per
// method, +-1 sample std whiskers across seeds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "otlpp/common.hpp"
#include "otlpp/harness/csv.hpp"

namespace otlpp::harness {

struct CurvePoint {
  std::size_t episode = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std; 0 for a single seed
  std::size_t n = 0;
};

struct MethodCurve {
  std::string method;
  std::vector<CurvePoint> points;  // ascending episode
};

struct PresetPanel {
  std::string preset;
  std::vector<MethodCurve> methods;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Presets and methods keep their order of first appearance.
inline std::vector<PresetPanel> aggregate(const std::vector<CurveRow>& rows) {
  std::vector<PresetPanel> panels;
  std::vector<std::vector<std::map<std::size_t, std::vector<double>>>> values;
  for (const auto& r : rows) {
    auto pit = std::find_if(panels.begin(), panels.end(), [&](const auto& p) { return p.preset == r.preset; });
    if (pit == panels.end()) {
      panels.push_back({r.preset, {}});
      values.emplace_back();
      pit = panels.end() - 1;
    }
    std::size_t pi = static_cast<std::size_t>(pit - panels.begin());
    auto& methods = pit->methods;
    auto mit = std::find_if(methods.begin(), methods.end(), [&](const auto& m) { return m.method == r.method; });
    if (mit == methods.end()) {
      methods.push_back({r.method, {}});
      values[pi].emplace_back();
      mit = methods.end() - 1;
    }
    std::size_t mi = static_cast<std::size_t>(mit - methods.begin());
    values[pi][mi][r.episode].push_back(r.eval_goal_fraction);
  }
  for (std::size_t pi = 0; pi < panels.size(); ++pi)
    for (std::size_t mi = 0; mi < panels[pi].methods.size(); ++mi)
      for (const auto& [ep, v] : values[pi][mi])
        panels[pi].methods[mi].points.push_back({ep, mean_of(v), sample_std(v), v.size()});
  return panels;
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

// Pure function of the rows. Throws UsageError when there is nothing to draw.
inline std::string render_svg(const std::vector<CurveRow>& rows) {
  if (rows.empty()) throw UsageError("plot: no curve rows to draw");
  auto panels = aggregate(rows);

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double kPanelW = 320, kPanelH = 240, kLeft = 50, kTop = 40, kPlotW = 250, kPlotH = 160;
  const std::size_t cols = std::min<std::size_t>(panels.size(), 3);
  const std::size_t rows_n = (panels.size() + cols - 1) / cols;
  const double width = kPanelW * static_cast<double>(cols);
  const double height = kPanelH * static_cast<double>(rows_n) + 30;

  std::size_t max_ep = 0;
  std::vector<std::string> methods;
  for (const auto& p : panels)
    for (const auto& m : p.methods) {
      for (const auto& pt : m.points) max_ep = std::max(max_ep, pt.episode);
      if (std::find(methods.begin(), methods.end(), m.method) == methods.end()) methods.push_back(m.method);
    }
  const double x_span = max_ep > 0 ? static_cast<double>(max_ep) : 1.0;
  auto color_of = [&](const std::string& method) {
    auto i = static_cast<std::size_t>(std::find(methods.begin(), methods.end(), method) - methods.begin());
    return kColors[i % std::size(kColors)];
  };
  using detail::fixed;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
       fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Legend.
  for (std::size_t i = 0; i < methods.size(); ++i) {
    double lx = 10 + 110 * static_cast<double>(i);
    s += "<line x1=\"" + fixed(lx) + "\" y1=\"15.00\" x2=\"" + fixed(lx + 20) + "\" y2=\"15.00\" stroke=\"" +
         color_of(methods[i]) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(lx + 25) + "\" y=\"19.00\">" + detail::xml_escape(methods[i]) + "</text>\n";
  }

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& panel = panels[pi];
    double ox = kPanelW * static_cast<double>(pi % cols) + kLeft;
    double oy = kPanelH * static_cast<double>(pi / cols) + 30 + kTop;
    auto px = [&](double ep) { return ox + kPlotW * ep / x_span; };
    auto py = [&](double g) { return oy + kPlotH * (1.0 - std::clamp(g, 0.0, 1.0)); };

    s += "<g>\n";
    s += "<text x=\"" + fixed(ox + kPlotW / 2) + "\" y=\"" + fixed(oy - 10) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(panel.preset) + "</text>\n";
    s += "<rect x=\"" + fixed(ox) + "\" y=\"" + fixed(oy) + "\" width=\"" + fixed(kPlotW) + "\" height=\"" +
         fixed(kPlotH) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double g : {0.0, 0.5, 1.0})
      s += "<text x=\"" + fixed(ox - 5) + "\" y=\"" + fixed(py(g) + 4) + "\" text-anchor=\"end\">" + fixed(g, 1) +
           "</text>\n";
    s += "<text x=\"" + fixed(ox) + "\" y=\"" + fixed(oy + kPlotH + 15) + "\" text-anchor=\"middle\">0</text>\n";
    s += "<text x=\"" + fixed(ox + kPlotW) + "\" y=\"" + fixed(oy + kPlotH + 15) + "\" text-anchor=\"middle\">" +
         std::to_string(max_ep) + "</text>\n";

    for (const auto& m : panel.methods) {
      const char* color = color_of(m.method);
      if (m.points.size() >= 2) {
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < m.points.size(); ++i)
          s += (i ? " " : "") + fixed(px(static_cast<double>(m.points[i].episode))) + "," + fixed(py(m.points[i].mean));
        s += "\"/>\n";
      }
      for (const auto& pt : m.points) {
        double x = px(static_cast<double>(pt.episode));
        if (pt.std > 0.0)
          s += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(py(pt.mean - pt.std)) + "\" x2=\"" + fixed(x) +
               "\" y2=\"" + fixed(py(pt.mean + pt.std)) + "\" stroke=\"" + color + "\"/>\n";
        s += "<circle cx=\"" + fixed(x) + "\" cy=\"" + fixed(py(pt.mean)) + "\" r=\"2.5\" fill=\"" + color +
             "\"/>\n";
      }
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

// Reads every CSV first; nothing is written if any input is malformed.
inline void plot_curves(const std::vector<std::string>& csv_paths, const std::string& output_path) {
  if (csv_paths.empty()) throw UsageError("plot: no input CSV files");
  std::vector<CurveRow> rows;
  for (const auto& p : csv_paths) {
    auto r = read_curves_file(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::string svg = render_svg(rows);
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw FileError("cannot write '" + output_path + "'");
  out << svg;
  if (!out) throw FileError("failed writing '" + output_path + "'");
}

}  // namespace otlpp::harness

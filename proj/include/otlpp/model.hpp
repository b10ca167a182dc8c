#pragma once

// Nearest-neighbor teammate model: predicts where the teammate goes next from
// recorded (s, s') pairs and scores observed moves under Gaussian noise.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "otlpp/common.hpp"
#include "otlpp/dqn.hpp"
#include "otlpp/kdtree.hpp"
#include "otlpp/mlp.hpp"
#include "otlpp/world.hpp"

namespace otlpp {

// 1 - 2 |F(delta) - 1/2| for F the N(0, sigma^2) CDF, i.e. the two-sided tail
// mass beyond |delta|. Evaluated as erfc(|delta| / (sigma sqrt 2)).
inline double prob_from_noise(double delta, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("prob_from_noise: sigma must be positive");
  return std::erfc(std::abs(delta) / (sigma * std::numbers::sqrt2));
}

struct StatePair {
  FeatureVector s{};
  FeatureVector s_next{};
};

inline Point2 teammate_key(const FeatureVector& s) { return {s[kTeammateX], s[kTeammateY]}; }

class TeammateModel {
 public:
  static constexpr std::size_t kDefaultCap = 100000;

  // Stores the (s, s') pairs; beyond `cap` pairs a uniform reservoir sample
  // (seeded) is kept, in original order.
  static TeammateModel build(std::span<const Transition> data, double sigma,
                             std::size_t cap = kDefaultCap, std::uint64_t seed = 0) {
    if (data.empty()) throw UsageError("model: cannot build from empty data");
    std::vector<StatePair> pairs;
    if (data.size() <= cap) {
      pairs.reserve(data.size());
      for (const auto& t : data) pairs.push_back({t.s, t.s_next});
    } else {
      if (cap == 0) throw ConfigError("model: cap must be positive");
      Rng rng(seed);
      std::vector<std::size_t> keep(cap);
      std::iota(keep.begin(), keep.end(), std::size_t{0});
      for (std::size_t i = cap; i < data.size(); ++i) {
        std::size_t j = std::uniform_int_distribution<std::size_t>(0, i)(rng);
        if (j < cap) keep[j] = i;
      }
      std::sort(keep.begin(), keep.end());
      pairs.reserve(cap);
      for (std::size_t i : keep) pairs.push_back({data[i].s, data[i].s_next});
    }
    return TeammateModel(std::move(pairs), sigma);
  }

  TeammateModel(std::vector<StatePair> pairs, double sigma) : pairs_(std::move(pairs)), sigma_(sigma) {
    if (!(sigma_ > 0.0)) throw ConfigError("model: sigma must be positive");
    if (pairs_.empty()) throw UsageError("model: cannot build from empty data");
    std::vector<Point2> keys;
    keys.reserve(pairs_.size());
    for (const auto& p : pairs_) keys.push_back(teammate_key(p.s));
    index_ = KdTree2(std::move(keys));
  }

  std::size_t nearest_index(const FeatureVector& s) const { return index_.nearest(teammate_key(s)); }

  const FeatureVector& predict_next(const FeatureVector& s) const {
    return pairs_[nearest_index(s)].s_next;
  }

  // P(s' | m, s) over the teammate's coordinates only.
  double likelihood(const FeatureVector& s, const FeatureVector& s_next_observed) const {
    const FeatureVector& predicted = predict_next(s);
    return prob_from_noise(s_next_observed[kTeammateX] - predicted[kTeammateX], sigma_) *
           prob_from_noise(s_next_observed[kTeammateY] - predicted[kTeammateY], sigma_);
  }

  double sigma() const { return sigma_; }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<StatePair>& pairs() const { return pairs_; }

 private:
  std::vector<StatePair> pairs_;
  double sigma_;
  KdTree2 index_;
};

// NNMv1: magic, sigma, pair count, then one line of 24 values per pair
// (12 for s followed by 12 for s'), 17 significant digits.
inline void write_nnm(std::ostream& os, const TeammateModel& m) {
  os << "NNMv1\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", m.sigma());
  os << buf << '\n' << m.size() << '\n';
  std::vector<double> row(2 * kNumFeatures);
  for (const auto& p : m.pairs()) {
    std::copy(p.s.begin(), p.s.end(), row.begin());
    std::copy(p.s_next.begin(), p.s_next.end(), row.begin() + kNumFeatures);
    detail::write_values(os, row);
  }
}

inline TeammateModel read_nnm(std::istream& is) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() {
    ++line_no;
    if (!std::getline(is, line)) throw ParseError("NNMv1: unexpected end of file", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "NNMv1") throw ParseError("expected NNMv1 header", line_no);
  double sigma;
  std::size_t count;
  try {
    sigma = std::stod(next_line());
    count = std::stoull(next_line());
  } catch (const std::exception&) {
    throw ParseError("NNMv1: malformed sigma or count", line_no);
  }
  if (!(sigma > 0.0)) throw ParseError("NNMv1: sigma must be positive", line_no);
  if (count == 0) throw ParseError("NNMv1: empty model", line_no);
  std::vector<StatePair> pairs(count);
  for (auto& p : pairs) {
    auto row = detail::read_values(is, 2 * kNumFeatures, line_no, "pair");
    std::copy(row.begin(), row.begin() + kNumFeatures, p.s.begin());
    std::copy(row.begin() + kNumFeatures, row.end(), p.s_next.begin());
  }
  return TeammateModel(std::move(pairs), sigma);
}

}  // namespace otlpp

#pragma once

// Belief distribution over library teammates and the policy it selects.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otlpp/common.hpp"
#include "otlpp/dqn.hpp"
#include "otlpp/model.hpp"

namespace otlpp {

struct LibraryEntry {
  std::string name;
  Policy policy;
  std::shared_ptr<const TeammateModel> model;

  // The network the policy was derived from; the policy is its snapshot.
  const MLP& source_net() const { return policy.net(); }
};

class BeliefState {
 public:
  BeliefState(std::vector<LibraryEntry> entries, double eta) : entries_(std::move(entries)), eta_(eta) {
    if (entries_.empty()) throw ConfigError("beliefs: library is empty");
    if (!(eta_ > 0.0 && eta_ < 1.0)) throw ConfigError("beliefs: eta must lie in (0, 1)");
    probs_.assign(entries_.size(), 1.0 / static_cast<double>(entries_.size()));
  }

  BeliefState(std::vector<LibraryEntry> entries, std::vector<double> prior, double eta)
      : BeliefState(std::move(entries), eta) {
    if (prior.size() != entries_.size()) throw ConfigError("beliefs: prior size mismatch");
    double sum = 0.0;
    for (double p : prior) {
      if (!(p >= 0.0)) throw ConfigError("beliefs: prior must be non-negative");
      sum += p;
    }
    if (!(sum > 0.0)) throw ConfigError("beliefs: prior has no mass");
    for (double& p : prior) p /= sum;
    probs_ = std::move(prior);
  }

  // Multiplies each entry by (1 - eta * (1 - likelihood)) and renormalizes.
  // Returns false when the total underflowed and beliefs were reset to uniform.
  bool update_with_likelihoods(std::span<const double> likelihoods) {
    if (likelihoods.size() != probs_.size()) throw UsageError("beliefs: likelihood count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      double loss = 1.0 - likelihoods[i];
      probs_[i] *= 1.0 - eta_ * loss;
      sum += probs_[i];
    }
    if (!(sum >= 1e-300)) {
      probs_.assign(probs_.size(), 1.0 / static_cast<double>(probs_.size()));
      return false;
    }
    for (double& p : probs_) p /= sum;
    return true;
  }

  bool update(const FeatureVector& s, const FeatureVector& s_next) {
    std::vector<double> lik(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) lik[i] = entries_[i].model->likelihood(s, s_next);
    return update_with_likelihoods(lik);
  }

  // Highest-probability entry; the earliest wins ties.
  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs_.size(); ++i)
      if (probs_[i] > probs_[best]) best = i;
    return best;
  }

  Action select_action(const FeatureVector& s) const { return entries_[argmax()].policy.act(s); }

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  const std::vector<double>& probs() const { return probs_; }
  double eta() const { return eta_; }

 private:
  std::vector<LibraryEntry> entries_;
  std::vector<double> probs_;
  double eta_;
};

inline BeliefState update_beliefs(BeliefState b, const FeatureVector& s, const FeatureVector& s_next) {
  b.update(s, s_next);
  return b;
}

inline Action select_action(const BeliefState& b, const FeatureVector& s) { return b.select_action(s); }

struct IdentificationCriterion {
  enum class Kind { FixedGames, Threshold };
  Kind kind = Kind::FixedGames;
  std::size_t games = 25;
  double threshold = 0.9;

  static IdentificationCriterion fixed_games(std::size_t n) { return {Kind::FixedGames, n, 0.9}; }
  static IdentificationCriterion probability(double p) { return {Kind::Threshold, 25, p}; }

  void validate() const {
    if (kind == Kind::FixedGames && games == 0) throw ConfigError("identification: games must be >= 1");
    if (kind == Kind::Threshold && !(threshold > 0.0 && threshold <= 1.0))
      throw ConfigError("identification: threshold must lie in (0, 1]");
  }
};

inline std::optional<std::size_t> identified(const BeliefState& b, std::size_t games_played,
                                             const IdentificationCriterion& c) {
  c.validate();
  std::size_t best = b.argmax();
  if (c.kind == IdentificationCriterion::Kind::FixedGames)
    return games_played >= c.games ? std::optional(best) : std::nullopt;
  return b.probs()[best] >= c.threshold ? std::optional(best) : std::nullopt;
}

}  // namespace otlpp

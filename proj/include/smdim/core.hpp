#pragma once

#include "smdim/rational.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smdim {

/// Finite instance, label and prediction spaces with a tabulated loss ℓ(y, z).
struct Problem {
  std::vector<std::string> instances;
  std::vector<std::string> labels;
  std::vector<std::string> predictions;
  std::vector<std::vector<Rational>> loss;  // |Y| rows, |Z| columns
  Rational bound_c;
  // Bound as written in the input; bound_c is tightened to the largest entry.
  Rational declared_bound;

  std::size_t num_instances() const { return instances.size(); }
  std::size_t num_labels() const { return labels.size(); }
  std::size_t num_predictions() const { return predictions.size(); }
};

/// h(x) table, one row per hypothesis holding prediction indices.
struct HypothesisClass {
  std::vector<std::vector<std::size_t>> table;

  std::size_t size() const { return table.size(); }
};

/// A subset of hypothesis indices stored as a fixed-universe bitset, so equal
/// subsets have equal representations and can key the memo tables.
class VersionSpace {
 public:
  VersionSpace() = default;
  explicit VersionSpace(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

  static VersionSpace full(std::size_t universe) {
    VersionSpace v(universe);
    for (std::size_t i = 0; i < universe; ++i) v.insert(i);
    return v;
  }

  static VersionSpace of(std::size_t universe, std::initializer_list<std::size_t> members) {
    VersionSpace v(universe);
    for (auto m : members) v.insert(m);
    return v;
  }

  std::size_t universe() const { return universe_; }

  bool contains(std::size_t h) const { return (words_[h / 64] >> (h % 64)) & 1U; }
  void insert(std::size_t h) {
    if (h >= universe_) throw Error("hypothesis index out of range");
    words_[h / 64] |= std::uint64_t{1} << (h % 64);
  }
  void erase(std::size_t h) { words_[h / 64] &= ~(std::uint64_t{1} << (h % 64)); }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }

  bool is_subset_of(const VersionSpace& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
  }

  /// Sorted member list.
  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(bits));
        out.push_back(w * 64 + bit);
        bits &= bits - 1;
      }
    }
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto bits = words_[w];
      while (bits) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  std::size_t hash() const {
    std::size_t seed = universe_;
    for (auto w : words_) seed ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    return seed;
  }

  friend bool operator==(const VersionSpace&, const VersionSpace&) = default;
  friend auto operator<=>(const VersionSpace& a, const VersionSpace& b) {
    return a.members() <=> b.members();
  }

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

struct VersionSpaceHash {
  std::size_t operator()(const VersionSpace& v) const { return v.hash(); }
};

/// Probability vector over the prediction space, exact.
class Mixture {
 public:
  Mixture() = default;

  static Mixture from_weights(std::vector<Rational> weights) {
    if (weights.empty()) throw Error("mixture over an empty prediction space");
    Rational total = 0;
    for (const auto& w : weights) {
      if (w < 0) throw Error("negative mixture weight");
      total += w;
    }
    if (total != 1) throw Error("mixture weights sum to " + to_string(total) + ", not 1");
    Mixture m;
    m.weights_ = std::move(weights);
    return m;
  }

  static Mixture dirac(std::size_t size, std::size_t z) {
    std::vector<Rational> w(size, Rational(0));
    w.at(z) = 1;
    return from_weights(std::move(w));
  }

  static Mixture uniform(std::size_t size) {
    return from_weights(std::vector<Rational>(size, make_rational(1, static_cast<std::int64_t>(size))));
  }

  std::size_t size() const { return weights_.size(); }
  const Rational& operator[](std::size_t z) const { return weights_[z]; }
  const std::vector<Rational>& weights() const { return weights_; }

  friend bool operator==(const Mixture&, const Mixture&) = default;

 private:
  std::vector<Rational> weights_;
};

/// A (label, threshold) pair.
struct Candidate {
  std::size_t label = 0;
  Rational threshold;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct ThresholdedExample {
  std::size_t instance = 0;
  std::size_t label = 0;
  std::optional<Rational> eps;

  friend bool operator==(const ThresholdedExample&, const ThresholdedExample&) = default;
};

using Stream = std::vector<ThresholdedExample>;

/// True when every element carries a threshold (realizable-mode stream).
/// Throws when thresholds are present on some elements only.
inline bool stream_has_thresholds(const Stream& stream) {
  const auto with = std::count_if(stream.begin(), stream.end(), [](const auto& e) { return e.eps.has_value(); });
  if (with != 0 && static_cast<std::size_t>(with) != stream.size()) {
    throw Error("stream mixes thresholded and unthresholded examples");
  }
  return !stream.empty() && with != 0;
}

/// A validated, immutable (problem, hypothesis class) pair.
class Setting {
 public:
  const Problem& problem() const { return problem_; }
  const HypothesisClass& hypotheses() const { return class_; }

  std::size_t num_instances() const { return problem_.num_instances(); }
  std::size_t num_labels() const { return problem_.num_labels(); }
  std::size_t num_predictions() const { return problem_.num_predictions(); }
  std::size_t num_hypotheses() const { return class_.size(); }
  const Rational& bound_c() const { return problem_.bound_c; }

  const Rational& loss(std::size_t y, std::size_t z) const { return problem_.loss[y][z]; }
  std::size_t predict(std::size_t h, std::size_t x) const { return class_.table[h][x]; }
  /// ℓ(y, h(x)).
  const Rational& hypothesis_loss(std::size_t y, std::size_t h, std::size_t x) const {
    return problem_.loss[y][class_.table[h][x]];
  }

  VersionSpace full_space() const { return VersionSpace::full(class_.size()); }

  void check_stream(const Stream& stream) const {
    for (std::size_t t = 0; t < stream.size(); ++t) {
      const auto& e = stream[t];
      if (e.instance >= num_instances()) throw Error("stream element " + std::to_string(t) + ": instance index out of range");
      if (e.label >= num_labels()) throw Error("stream element " + std::to_string(t) + ": label index out of range");
      if (e.eps && (*e.eps < 0 || *e.eps > bound_c())) {
        throw Error("stream element " + std::to_string(t) + ": threshold outside [0, c]");
      }
    }
    stream_has_thresholds(stream);
  }

  friend Setting validate_problem(Problem problem, HypothesisClass hypotheses);

 private:
  Problem problem_;
  HypothesisClass class_;
};

/// Checks every structural invariant and tightens c to the largest loss entry.
inline Setting validate_problem(Problem problem, HypothesisClass hypotheses) {
  if (problem.instances.empty()) throw Error("instance space is empty");
  if (problem.labels.empty()) throw Error("label space is empty");
  if (problem.predictions.empty()) throw Error("prediction space is empty");
  if (problem.loss.size() != problem.labels.size()) {
    throw Error("dimension mismatch: loss has " + std::to_string(problem.loss.size()) + " rows for " +
                std::to_string(problem.labels.size()) + " labels");
  }
  Rational max_loss = 0;
  for (std::size_t y = 0; y < problem.loss.size(); ++y) {
    const auto& row = problem.loss[y];
    if (row.size() != problem.predictions.size()) {
      throw Error("dimension mismatch: loss row " + std::to_string(y) + " has " + std::to_string(row.size()) +
                  " entries for " + std::to_string(problem.predictions.size()) + " predictions");
    }
    for (const auto& v : row) {
      if (v < 0) throw Error("negative loss " + to_string(v) + " in row " + std::to_string(y));
      max_loss = std::max(max_loss, v);
    }
  }
  if (max_loss > problem.bound_c) {
    throw Error("loss " + to_string(max_loss) + " exceeds declared bound " + to_string(problem.bound_c));
  }
  problem.declared_bound = problem.bound_c;
  problem.bound_c = max_loss;

  std::set<std::vector<std::size_t>> seen;
  for (std::size_t h = 0; h < hypotheses.table.size(); ++h) {
    const auto& row = hypotheses.table[h];
    if (row.size() != problem.instances.size()) {
      throw Error("dimension mismatch: hypothesis " + std::to_string(h) + " has " + std::to_string(row.size()) +
                  " entries for " + std::to_string(problem.instances.size()) + " instances");
    }
    for (auto z : row) {
      if (z >= problem.predictions.size()) {
        throw Error("hypothesis " + std::to_string(h) + " predicts out-of-range index " + std::to_string(z));
      }
    }
    if (!seen.insert(row).second) throw Error("duplicate hypothesis " + std::to_string(h));
  }

  Setting s;
  s.problem_ = std::move(problem);
  s.class_ = std::move(hypotheses);
  return s;
}

/// E_{z~μ}[ℓ(y, z)].
inline Rational expected_loss(const Setting& setting, const Mixture& mixture, std::size_t label) {
  if (mixture.size() != setting.num_predictions()) throw Error("mixture size does not match prediction space");
  Rational total = 0;
  const auto& row = setting.problem().loss.at(label);
  for (std::size_t z = 0; z < row.size(); ++z) {
    if (mixture[z] != 0) total += mixture[z] * row[z];
  }
  return total;
}

/// {h ∈ space : ℓ(y, h(x)) ≤ ε}.
inline VersionSpace restrict(const Setting& setting, const VersionSpace& space, std::size_t x, const Candidate& cand) {
  VersionSpace out(space.universe());
  space.for_each([&](std::size_t h) {
    if (setting.hypothesis_loss(cand.label, h, x) <= cand.threshold) out.insert(h);
  });
  return out;
}

}  // namespace smdim

#pragma once

#include "smdim/core.hpp"
#include "smdim/game_solver.hpp"

#include <json.hpp>

#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace smdim {

/// Scale γ of the shattering condition. γ = 0 always means the strict
/// variant (expected loss must strictly exceed the hypothesis' loss).
struct GammaValue {
  Rational gamma;
  bool strict = false;

  static GammaValue of(const Rational& g) {
    if (g < 0) throw Error("gamma must be nonnegative, got " + to_string(g));
    return GammaValue{g, g == 0};
  }

  /// Whether a game value certifies shattering at this scale.
  bool certifies(const Rational& value) const { return strict ? value > 0 : value >= gamma; }

  std::string str() const { return strict ? "0(strict)" : to_string(gamma); }
};

inline std::size_t default_memo_cap() {
  if (const char* env = std::getenv("SMDIM_MEMO_CAP")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{1} << 20;
}

/// A (label, threshold) candidate at some instance together with the
/// version space it leaves behind.
struct CandidateEdge {
  Candidate candidate;
  VersionSpace child;
  int child_dimension = -1;
};

/// Witness for "space is shattered to depth `depth`": at `instance`, every
/// mixture is beaten by one of `candidates` by at least γ, and every candidate's
/// child is shattered to depth - 1.
struct ShatteringNode {
  VersionSpace space;
  int depth = 0;
  std::size_t instance = 0;
  std::vector<CandidateEdge> candidates;
  Rational value;

  std::vector<AffineRow> rows(const Setting& setting) const {
    std::vector<AffineRow> out;
    out.reserve(candidates.size());
    for (const auto& e : candidates) {
      out.push_back(AffineRow{setting.problem().loss[e.candidate.label], -e.candidate.threshold});
    }
    return out;
  }
};

/// Replayable encoding of a shattered tree rooted at `root`: one node per
/// (version space, remaining depth) reachable through candidate children.
class ShatteringCertificate {
 public:
  GammaValue gamma;
  VersionSpace root;
  int dimension = 0;

  const ShatteringNode& node(const VersionSpace& space, int depth) const {
    auto it = nodes_.find({space.members(), depth});
    if (it == nodes_.end()) throw Error("certificate has no node for the requested space and depth");
    return it->second;
  }
  bool has_node(const VersionSpace& space, int depth) const { return nodes_.count({space.members(), depth}) != 0; }
  std::size_t size() const { return nodes_.size(); }

  void add(const ShatteringNode& n) { nodes_.emplace(Key{n.space.members(), n.depth}, n); }

  template <typename F>
  void for_each_node(F&& f) const {
    for (const auto& [key, n] : nodes_) f(n);
  }

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["gamma"] = to_string(gamma.gamma);
    doc["strict"] = gamma.strict;
    doc["dimension"] = dimension;
    doc["root"] = root.members();
    auto& arr = doc["nodes"] = nlohmann::json::array();
    // Map iteration order is (members, depth) lexicographic, hence deterministic.
    for (const auto& [key, n] : nodes_) {
      nlohmann::json node;
      node["space"] = n.space.members();
      node["depth"] = n.depth;
      node["instance"] = n.instance;
      node["value"] = to_string(n.value);
      auto& cands = node["candidates"] = nlohmann::json::array();
      for (const auto& e : n.candidates) {
        cands.push_back({{"y", e.candidate.label},
                         {"eps", to_string(e.candidate.threshold)},
                         {"child", e.child.members()},
                         {"child_dimension", e.child_dimension}});
      }
      arr.push_back(std::move(node));
    }
    return doc;
  }

 private:
  using Key = std::pair<std::vector<std::size_t>, int>;
  std::map<Key, ShatteringNode> nodes_;
};

/// Sequential Minimax dimension of version spaces at a fixed scale, memoized
/// per canonical version space.
///
/// shatter(V, 0) holds iff V is nonempty; shatter(V, d + 1) holds iff some
/// instance x admits a game value ≥ γ (> 0 when strict) for the rows
/// (ℓ(y, ·), -ε) over candidates (y, ε) whose child restrict(V, x, (y, ε)) is
/// shattered to depth d. Thresholds only need the distinct values ℓ(y, h(x)),
/// h ∈ V, since restrict is a step function of ε and the smallest ε of a
/// step gives the largest offset.
class SmdimEngine {
 public:
  SmdimEngine(const Setting& setting, GammaValue gamma, std::size_t memo_cap = default_memo_cap())
      : setting_(setting), gamma_(std::move(gamma)), memo_cap_(memo_cap) {}

  const Setting& setting() const { return setting_; }
  const GammaValue& gamma() const { return gamma_; }
  std::size_t memo_size() const { return memo_.size(); }

  /// Distinct-threshold candidates at x in label-major, ascending-threshold order.
  std::vector<CandidateEdge> enumerate_candidates(const VersionSpace& space, std::size_t x) const {
    std::vector<CandidateEdge> out;
    const auto members = space.members();
    for (std::size_t y = 0; y < setting_.num_labels(); ++y) {
      std::vector<Rational> values;
      for (auto h : members) values.push_back(setting_.hypothesis_loss(y, h, x));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (auto& v : values) {
        Candidate cand{y, v};
        out.push_back(CandidateEdge{cand, restrict(setting_, space, x, cand), -1});
      }
    }
    return out;
  }

  /// SMdim_γ(V); -1 for the empty space.
  int dimension(const VersionSpace& space) { return entry(space).dimension; }

  /// Witness that `space` is shattered to `depth` (1 ≤ depth ≤ dimension).
  const ShatteringNode& witness(const VersionSpace& space, int depth) {
    const auto& e = entry(space);
    if (depth < 1 || depth > e.dimension) throw Error("no shattering witness at the requested depth");
    return e.levels[static_cast<std::size_t>(depth - 1)];
  }

  ShatteringCertificate certificate(const VersionSpace& space) {
    if (space.empty()) throw Error("smdim: empty version space");
    ShatteringCertificate cert;
    cert.gamma = gamma_;
    cert.root = space;
    cert.dimension = dimension(space);
    std::vector<std::pair<VersionSpace, int>> pending{{space, cert.dimension}};
    while (!pending.empty()) {
      auto [v, d] = std::move(pending.back());
      pending.pop_back();
      if (d < 1 || cert.has_node(v, d)) continue;
      const auto& n = witness(v, d);
      cert.add(n);
      for (const auto& e : n.candidates) pending.emplace_back(e.child, d - 1);
    }
    return cert;
  }

 private:
  struct Entry {
    int dimension = -1;
    std::vector<ShatteringNode> levels;  // levels[d - 1] witnesses depth d
  };

  const Entry& entry(const VersionSpace& space) {
    if (auto it = memo_.find(space); it != memo_.end()) return it->second;
    Entry e = compute(space);
    if (memo_.size() >= memo_cap_) {
      throw Error("smdim memo cap of " + std::to_string(memo_cap_) +
                  " version spaces exceeded (raise SMDIM_MEMO_CAP)");
    }
    return memo_.emplace(space, std::move(e)).first->second;
  }

  Entry compute(const VersionSpace& space) {
    Entry e;
    if (space.empty()) return e;
    e.dimension = 0;

    std::vector<std::vector<CandidateEdge>> per_instance;
    per_instance.reserve(setting_.num_instances());
    for (std::size_t x = 0; x < setting_.num_instances(); ++x) per_instance.push_back(enumerate_candidates(space, x));

    // Any strict or γ > 0 shattering strictly shrinks the space along the
    // Dirac mixture of a surviving hypothesis, so depth ≤ |V| - 1.
    const int cap = static_cast<int>(space.count()) - 1;
    for (int d = 0; d < cap; ++d) {
      bool found = false;
      for (std::size_t x = 0; x < per_instance.size() && !found; ++x) {
        ShatteringNode node;
        node.space = space;
        node.depth = d + 1;
        node.instance = x;
        for (auto& edge : per_instance[x]) {
          if (edge.child == space) {
            // Self-reference: depth ≥ d is already established for this space.
            edge.child_dimension = d;
            node.candidates.push_back(edge);
          } else {
            edge.child_dimension = dimension(edge.child);
            if (edge.child_dimension >= d) node.candidates.push_back(edge);
          }
        }
        if (node.candidates.empty()) continue;
        const auto rows = node.rows(setting_);
        auto sol = solve_min_max(rows);
        if (gamma_.certifies(sol.value)) {
          node.value = std::move(sol.value);
          e.levels.push_back(std::move(node));
          found = true;
        }
      }
      if (!found) break;
      e.dimension = d + 1;
    }
    // Self-referential children report the final dimension of this space.
    for (auto& level : e.levels) {
      for (auto& edge : level.candidates) {
        if (edge.child == space) edge.child_dimension = e.dimension;
      }
    }
    return e;
  }

  const Setting& setting_;
  GammaValue gamma_;
  std::size_t memo_cap_;
  std::unordered_map<VersionSpace, Entry, VersionSpaceHash> memo_;
};

/// Dimension and certificate for `space` in one call.
inline std::pair<int, ShatteringCertificate> smdim(const Setting& setting, const VersionSpace& space,
                                                   const GammaValue& gamma) {
  if (space.empty()) throw Error("smdim: empty version space");
  SmdimEngine engine(setting, gamma);
  auto cert = engine.certificate(space);
  return {cert.dimension, std::move(cert)};
}

namespace detail {

inline void require_binary_loss(const Setting& setting) {
  for (const auto& row : setting.problem().loss) {
    for (const auto& v : row) {
      if (v != 0 && v != 1) throw Error("non-{0,1} loss matrix");
    }
  }
}

}  // namespace detail

/// (k+1)-Littlestone dimension (k = 1 is the Littlestone dimension) of a
/// classification or list-classification problem with {0,1} loss. A label y
/// is realized by h at x when ℓ(y, h(x)) = 0.
inline int ldim_k(const Setting& setting, const VersionSpace& space, int k) {
  if (k < 1) throw Error("ldim_k: k must be a positive integer");
  if (space.empty()) throw Error("ldim_k: empty version space");
  detail::require_binary_loss(setting);
  for (std::size_t z = 0; z < setting.num_predictions(); ++z) {
    int zero_labels = 0;
    for (std::size_t y = 0; y < setting.num_labels(); ++y) zero_labels += setting.loss(y, z) == 0 ? 1 : 0;
    if (zero_labels > k) {
      throw Error("ldim_k: prediction '" + setting.problem().predictions[z] + "' realizes more than k labels");
    }
  }

  std::unordered_map<VersionSpace, int, VersionSpaceHash> memo;
  auto rec = [&](auto&& self, const VersionSpace& v) -> int {
    if (v.empty()) return -1;
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    int best = 0;
    for (std::size_t x = 0; x < setting.num_instances(); ++x) {
      std::vector<VersionSpace> realized;
      for (std::size_t y = 0; y < setting.num_labels(); ++y) {
        VersionSpace sub = restrict(setting, v, x, Candidate{y, Rational(0)});
        if (!sub.empty()) realized.push_back(std::move(sub));
      }
      if (realized.size() < static_cast<std::size_t>(k + 1)) continue;
      // Each prediction realizes ≤ k labels, so at most k children equal v and
      // the (k+1)-th largest child dimension comes from a strict subset.
      std::vector<int> dims;
      int self_refs = 0;
      for (const auto& sub : realized) {
        if (sub == v) {
          ++self_refs;
        } else {
          dims.push_back(self(self, sub));
        }
      }
      std::sort(dims.rbegin(), dims.rend());
      const auto needed = static_cast<std::size_t>(k + 1 - self_refs);
      best = std::max(best, dims[needed - 1] + 1);
    }
    memo.emplace(v, best);
    return best;
  };
  return rec(rec, space);
}

namespace detail {

inline std::vector<Rational> numeric_values(const std::vector<std::string>& names, const char* what) {
  std::vector<Rational> out;
  for (const auto& n : names) {
    auto r = try_parse_rational(n);
    if (!r) throw Error(std::string("non-numeric ") + what + " element '" + n + "'");
    if (*r < -1 || *r > 1) throw Error(std::string(what) + " element '" + n + "' outside [-1, 1]");
    out.push_back(*r);
  }
  return out;
}

}  // namespace detail

/// Sequential fat-shattering dimension at scale γ > 0 on a regression grid
/// whose label and prediction identifiers are rationals in [-1, 1]. Witnesses
/// range over the label grid.
inline int seqfat(const Setting& setting, const VersionSpace& space, const Rational& gamma) {
  if (gamma <= 0) throw Error("seqfat: gamma must be positive");
  if (space.empty()) throw Error("seqfat: empty version space");
  const auto witnesses = detail::numeric_values(setting.problem().labels, "Y");
  const auto values = detail::numeric_values(setting.problem().predictions, "Z");

  std::unordered_map<VersionSpace, int, VersionSpaceHash> memo;
  auto rec = [&](auto&& self, const VersionSpace& v) -> int {
    if (v.empty()) return -1;
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    int best = 0;
    for (std::size_t x = 0; x < setting.num_instances(); ++x) {
      for (const auto& s : witnesses) {
        VersionSpace above(v.universe());
        VersionSpace below(v.universe());
        v.for_each([&](std::size_t h) {
          const auto& hx = values[setting.predict(h, x)];
          if (hx >= s + gamma) above.insert(h);
          if (hx <= s - gamma) below.insert(h);
        });
        if (above.empty() || below.empty()) continue;
        best = std::max(best, std::min(self(self, above), self(self, below)) + 1);
      }
    }
    memo.emplace(v, best);
    return best;
  };
  return rec(rec, space);
}

/// Set-valued feedback problem: each label is a subset of the prediction
/// space and ℓ(y, z) = 1{z ∉ y}.
struct SetValuedProblem {
  std::vector<std::string> instances;
  std::vector<std::string> predictions;
  std::vector<std::vector<std::size_t>> label_sets;

  Problem tabulate() const {
    Problem p;
    p.instances = instances;
    p.predictions = predictions;
    for (const auto& set : label_sets) {
      std::vector<Rational> row(predictions.size(), Rational(1));
      std::string name = "{";
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set[i] >= predictions.size()) throw Error("label set is not a subset of the prediction space");
        row[set[i]] = 0;
        name += (i ? "," : "") + predictions[set[i]];
      }
      p.labels.push_back(name + "}");
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 1;
    return p;
  }
};

/// Measure shattering dimension, computed as SMdim of the tabulated indicator loss.
inline int msdim(const SetValuedProblem& problem, const HypothesisClass& hypotheses, const VersionSpace& space,
                 const GammaValue& gamma) {
  const Setting setting = validate_problem(problem.tabulate(), hypotheses);
  SmdimEngine engine(setting, gamma);
  if (space.empty()) throw Error("msdim: empty version space");
  return engine.dimension(space);
}

}  // namespace smdim

#pragma once

#include "smdim/core.hpp"
#include "smdim/dimensions.hpp"
#include "smdim/game_solver.hpp"
#include "smdim/instances.hpp"

#include <bit>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace smdim {

/// Size caps for randomly generated instances: |X| ≤ 4, |Y| ≤ 3, |H| ≤ 8.
struct RandomCaps {
  std::size_t instances = 4;
  std::size_t labels = 3;
  std::size_t hypotheses = 8;
};

namespace detail {

inline std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Up to `count` distinct random functions X → {0..values-1}.
inline HypothesisClass random_functions(std::mt19937_64& rng, std::size_t instances, std::size_t values,
                                        std::size_t count) {
  HypothesisClass h;
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::size_t> row(instances);
    for (auto& v : row) v = uniform_size(rng, 0, values - 1);
    if (seen.insert(row).second) h.table.push_back(std::move(row));
  }
  return h;
}

}  // namespace detail

/// Multiclass 0-1 instance with Y = Z.
inline InstanceSpec random_multiclass(std::mt19937_64& rng, const RandomCaps& caps = {}) {
  const auto x = detail::uniform_size(rng, 1, caps.instances);
  const auto y = detail::uniform_size(rng, 2, caps.labels);
  const auto h = detail::uniform_size(rng, 1, caps.hypotheses);
  auto spec = make_builtin("multiclass", {{"labels", std::to_string(y)}, {"instances", std::to_string(x)}});
  spec.name = "random-multiclass";
  spec.hypotheses = detail::random_functions(rng, x, y, h);
  return spec;
}

/// List instance: Z = nonempty label subsets of size ≤ k, hypotheses map
/// into Z.
inline InstanceSpec random_list(std::mt19937_64& rng, int k, const RandomCaps& caps = {}) {
  const auto y = detail::uniform_size(rng, static_cast<std::size_t>(k) + 1, std::max<std::size_t>(caps.labels, k + 1));
  const auto x = detail::uniform_size(rng, 1, caps.instances);
  const auto h = detail::uniform_size(rng, 1, caps.hypotheses);
  auto spec = make_builtin("list", {{"labels", std::to_string(y)}, {"k", std::to_string(k)}});
  spec.name = "random-list";
  spec.problem.instances = detail::instance_names(x);
  spec.hypotheses = detail::random_functions(rng, x, spec.problem.num_predictions(), h);
  return spec;
}

/// Set-valued instance over |Z| ≤ 3 with up to four distinct label sets.
inline std::pair<SetValuedProblem, HypothesisClass> random_setvalued(std::mt19937_64& rng, const RandomCaps& caps = {}) {
  SetValuedProblem p;
  const auto z = detail::uniform_size(rng, 2, caps.labels);
  const auto x = detail::uniform_size(rng, 1, caps.instances);
  const auto h = detail::uniform_size(rng, 1, caps.hypotheses);
  p.instances = detail::instance_names(x);
  for (std::size_t i = 0; i < z; ++i) p.predictions.push_back(std::string(1, static_cast<char>('a' + i)));
  const std::uint32_t full = (1U << z) - 1;
  const auto sets = detail::uniform_size(rng, 1, std::min<std::size_t>(full, 4));
  std::set<std::uint32_t> masks;
  while (masks.size() < sets) masks.insert(static_cast<std::uint32_t>(detail::uniform_size(rng, 1, full)));
  for (auto m : masks) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < z; ++i) {
      if ((m >> i) & 1U) members.push_back(i);
    }
    p.label_sets.push_back(std::move(members));
  }
  return {std::move(p), detail::random_functions(rng, x, z, h)};
}

/// Absolute-loss regression on a grid of 3 or 5 points in [-1, 1].
inline InstanceSpec random_grid_regression(std::mt19937_64& rng, const RandomCaps& caps = {}) {
  const std::size_t grid = detail::uniform_size(rng, 0, 1) == 0 ? 3 : 5;
  const auto x = detail::uniform_size(rng, 1, std::min<std::size_t>(caps.instances, 3));
  const auto h = detail::uniform_size(rng, 1, caps.hypotheses);
  auto spec = make_builtin("regression", {{"grid", std::to_string(grid)}});
  spec.name = "random-regression";
  spec.problem.instances = detail::instance_names(x);
  spec.hypotheses = detail::random_functions(rng, x, grid, h);
  return spec;
}

/// MSdim straight from its tree definition: V is shattered to depth d + 1 at
/// x when every mixture μ leaves some label set y with μ(y) ≤ 1 - γ whose
/// hypotheses {h ∈ V : h(x) ∈ y} are shattered to depth d. The inner
/// condition is min_μ max_y (1 - μ(y)) ≥ γ.
inline int msdim_by_definition(const SetValuedProblem& problem, const HypothesisClass& hypotheses,
                               const Rational& gamma) {
  if (gamma <= 0) throw Error("msdim_by_definition: gamma must be positive");
  const std::size_t n = hypotheses.size();
  const std::size_t nz = problem.predictions.size();
  std::vector<std::vector<bool>> member(problem.label_sets.size(), std::vector<bool>(nz, false));
  for (std::size_t y = 0; y < problem.label_sets.size(); ++y) {
    for (auto z : problem.label_sets[y]) member[y][z] = true;
  }

  std::unordered_map<VersionSpace, int, VersionSpaceHash> memo;
  auto rec = [&](auto&& self, const VersionSpace& v) -> int {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    int depth = 0;
    // A Dirac on some h(x) defeats every set containing it, so each level
    // loses a hypothesis along that path: depth ≤ |V| - 1.
    for (int d = 0; d + 1 < static_cast<int>(v.count()); ++d) {
      bool shattered = false;
      for (std::size_t x = 0; x < problem.instances.size() && !shattered; ++x) {
        std::vector<AffineRow> rows;
        for (std::size_t y = 0; y < member.size(); ++y) {
          VersionSpace child(n);
          v.for_each([&](std::size_t h) {
            if (member[y][hypotheses.table[h][x]]) child.insert(h);
          });
          if (child.empty()) continue;
          if (child != v && self(self, child) < d) continue;
          AffineRow row;
          for (std::size_t z = 0; z < nz; ++z) row.coefficients.push_back(member[y][z] ? Rational(0) : Rational(1));
          row.offset = 0;
          rows.push_back(std::move(row));
        }
        if (!rows.empty() && solve_min_max(rows).value >= gamma) shattered = true;
      }
      if (!shattered) break;
      depth = d + 1;
    }
    memo.emplace(v, depth);
    return depth;
  };
  return rec(rec, VersionSpace::full(n));
}

/// One comparison inside a verification case.
struct VerifyCheck {
  std::size_t case_index = 0;
  std::string gamma;
  int lhs = 0;       // SMdim side
  int rhs = 0;       // the classical dimension
  bool holds = true;
  std::string relation;  // "=" or "<="
  std::string note;      // informational
};

struct VerifyReport {
  std::string proposition;
  std::uint64_t seed = 0;
  std::size_t cases = 0;
  std::vector<VerifyCheck> checks;

  std::size_t counterexamples() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.holds ? 0 : 1;
    return n;
  }
};

/// Runs the equivalence checks for proposition "6.1", "6.2", "6.3" or "6.4"
/// on `cases` random instances drawn from `seed`.
inline VerifyReport verify_proposition(const std::string& prop, std::uint64_t seed, std::size_t cases,
                                       const RandomCaps& caps = {}) {
  VerifyReport report{prop, seed, cases, {}};
  std::mt19937_64 rng(seed);
  auto add = [&](std::size_t i, const GammaValue& g, int lhs, int rhs, bool equal) {
    report.checks.push_back(VerifyCheck{i, g.str(), lhs, rhs, equal ? lhs == rhs : rhs <= lhs, equal ? "=" : "<=", ""});
  };
  for (std::size_t i = 0; i < cases; ++i) {
    if (prop == "6.1") {
      const auto spec = random_multiclass(rng, caps);
      const auto s = spec.setting();
      const int ldim = ldim_k(s, s.full_space(), 1);
      for (const auto& g : {Rational(0), make_rational(1, 8), make_rational(1, 4), make_rational(1, 2)}) {
        SmdimEngine engine(s, GammaValue::of(g));
        add(i, GammaValue::of(g), engine.dimension(s.full_space()), ldim, true);
      }
    } else if (prop == "6.3") {
      const int k = static_cast<int>(i % 2) + 1;
      const auto spec = random_list(rng, k, caps);
      const auto s = spec.setting();
      const int ldim = ldim_k(s, s.full_space(), k);
      for (long m = 1; m <= 3; ++m) {
        const auto g = GammaValue::of(make_rational(1, m * (k + 1)));
        SmdimEngine engine(s, g);
        add(i, g, engine.dimension(s.full_space()), ldim, true);
      }
    } else if (prop == "6.4") {
      const auto [problem, hyps] = random_setvalued(rng, caps);
      for (const auto& g : {make_rational(1, 4), make_rational(1, 2), make_rational(3, 4), Rational(1)}) {
        const int via_smdim = msdim(problem, hyps, VersionSpace::full(hyps.size()), GammaValue::of(g));
        add(i, GammaValue::of(g), via_smdim, msdim_by_definition(problem, hyps, g), true);
      }
    } else if (prop == "6.2") {
      const auto spec = random_grid_regression(rng, caps);
      const auto s = spec.setting();
      const Rational spacing = make_rational(2, static_cast<long>(s.num_labels() - 1));
      for (const auto& g : {make_rational(1, 4), make_rational(1, 2), Rational(1)}) {
        SmdimEngine engine(s, GammaValue::of(g));
        const int sm = engine.dimension(s.full_space());
        add(i, GammaValue::of(g), sm, seqfat(s, s.full_space(), g), false);
        // The upper direction needs off-grid witnesses; report it with one
        // grid step of slack without asserting it.
        if (g > spacing) {
          const int upper = seqfat(s, s.full_space(), g - spacing);
          report.checks.back().note = "smdim <= seqfat(gamma - " + to_string(spacing) + ") " +
                                      (sm <= upper ? "holds" : "fails") + " (" + std::to_string(sm) +
                                      " vs " + std::to_string(upper) + ")";
        }
      }
    } else {
      throw Error("unknown proposition '" + prop + "' (expected 6.1, 6.2, 6.3 or 6.4)");
    }
  }
  return report;
}

}  // namespace smdim

#pragma once

#include "smdim/core.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace smdim {

/// One affine function of the mixture: μ ↦ ⟨coefficients, μ⟩ + offset.
struct AffineRow {
  std::vector<Rational> coefficients;
  Rational offset;

  Rational evaluate(const Mixture& mu) const {
    Rational v = offset;
    for (std::size_t z = 0; z < coefficients.size(); ++z) {
      if (mu[z] != 0) v += coefficients[z] * mu[z];
    }
    return v;
  }

  friend bool operator==(const AffineRow&, const AffineRow&) = default;
};

struct GameSolution {
  Rational value;
  Mixture mixture;
  std::vector<std::size_t> tight_rows;

  friend bool operator==(const GameSolution&, const GameSolution&) = default;
};

namespace detail {

/// Dense simplex tableau for: maximize Σ_j u_j  s.t.  A u ≤ 1, u ≥ 0, A > 0.
/// Slack basis is feasible from the start, so no phase one is needed. Bland's
/// rule (lowest-index entering and leaving variables) guarantees termination.
class PositiveGameTableau {
 public:
  explicit PositiveGameTableau(const std::vector<std::vector<Rational>>& a)
      : rows_(a.size()), cols_(a.front().size()), width_(cols_ + rows_ + 1) {
    cells_.assign(rows_ * width_, Rational(0));
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) at(i, j) = a[i][j];
      at(i, cols_ + i) = 1;
      at(i, width_ - 1) = 1;
    }
    objective_.assign(width_, Rational(0));
    for (std::size_t j = 0; j < cols_; ++j) objective_[j] = 1;  // reduced costs, maximize
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) basis_[i] = cols_ + i;
  }

  void solve() {
    for (;;) {
      std::size_t entering = width_;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (objective_[j] > 0) {
          entering = j;
          break;
        }
      }
      if (entering == width_) return;

      std::size_t leaving = rows_;
      Rational best_ratio;
      for (std::size_t i = 0; i < rows_; ++i) {
        const auto& coef = at(i, entering);
        if (coef <= 0) continue;
        Rational ratio = at(i, width_ - 1) / coef;
        if (leaving == rows_ || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leaving])) {
          leaving = i;
          best_ratio = std::move(ratio);
        }
      }
      // A > 0 keeps the feasible region bounded.
      if (leaving == rows_) throw Error("internal: unbounded game LP");
      pivot(leaving, entering);
    }
  }

  /// Values of the structural variables u.
  std::vector<Rational> primal() const {
    std::vector<Rational> u(cols_, Rational(0));
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) u[basis_[i]] = at(i, width_ - 1);
    }
    return u;
  }

 private:
  Rational& at(std::size_t i, std::size_t j) { return cells_[i * width_ + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return cells_[i * width_ + j]; }

  void pivot(std::size_t r, std::size_t c) {
    const Rational inv = 1 / at(r, c);
    for (std::size_t j = 0; j < width_; ++j) {
      if (at(r, j) != 0) at(r, j) *= inv;
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const Rational factor = at(i, c);
      if (factor == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (at(r, j) != 0) at(i, j) -= factor * at(r, j);
      }
    }
    const Rational factor = objective_[c];
    if (factor != 0) {
      for (std::size_t j = 0; j < width_; ++j) {
        if (at(r, j) != 0) objective_[j] -= factor * at(r, j);
      }
    }
    basis_[r] = c;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_;
  std::vector<Rational> cells_;
  std::vector<Rational> objective_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Exact min over the simplex of max_i (⟨row_i, μ⟩ + offset_i).
///
/// Because μ sums to one, the offsets fold into a payoff matrix
/// P_ij = a_ij + b_i and the problem is the value of a zero-sum matrix game
/// with the learner as column minimizer. P is shifted to be strictly positive
/// and solved through the classic normalisation u = μ / v.
inline GameSolution solve_min_max(std::span<const AffineRow> rows) {
  if (rows.empty()) throw Error("solve_min_max: empty row list");
  const std::size_t n = rows.front().coefficients.size();
  if (n == 0) throw Error("solve_min_max: empty prediction space");
  for (const auto& r : rows) {
    if (r.coefficients.size() != n) throw Error("solve_min_max: rows reference different prediction spaces");
  }

  std::vector<std::vector<Rational>> payoff(rows.size(), std::vector<Rational>(n));
  Rational lowest;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      payoff[i][j] = rows[i].coefficients[j] + rows[i].offset;
      if ((i == 0 && j == 0) || payoff[i][j] < lowest) lowest = payoff[i][j];
    }
  }
  const Rational shift = 1 - lowest;
  for (auto& row : payoff) {
    for (auto& v : row) v += shift;
  }

  detail::PositiveGameTableau tableau(payoff);
  tableau.solve();
  auto u = tableau.primal();
  Rational total = 0;
  for (const auto& v : u) total += v;
  for (auto& v : u) v /= total;

  GameSolution sol;
  sol.mixture = Mixture::from_weights(std::move(u));
  sol.value = 1 / total - shift;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Rational v = rows[i].evaluate(sol.mixture);
    if (v > sol.value) throw Error("internal: game LP certificate violated");
    if (v == sol.value) sol.tight_rows.push_back(i);
  }
  if (sol.tight_rows.empty()) throw Error("internal: game LP has no tight row");
  return sol;
}

/// argmax_i ⟨row_i, μ⟩ + offset_i with lowest-index tie-breaking.
inline std::pair<std::size_t, Rational> best_response(const Mixture& mixture, std::span<const AffineRow> rows) {
  if (rows.empty()) throw Error("best_response: empty row list");
  std::size_t best = 0;
  Rational best_value = rows[0].evaluate(mixture);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    Rational v = rows[i].evaluate(mixture);
    if (v > best_value) {
      best = i;
      best_value = std::move(v);
    }
  }
  return {best, best_value};
}

}  // namespace smdim

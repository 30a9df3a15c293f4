#pragma once

#include "smdim/core.hpp"
#include "smdim/dimensions.hpp"
#include "smdim/game_solver.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace smdim {

/// Position of the shattering adversary inside its certificate.
struct ShatteringState {
  VersionSpace space;
  int remaining = 0;
};

struct AdversaryMove {
  std::size_t label = 0;
  Rational threshold;  // the chosen candidate's ε; every h in the child has ℓ(y, h(x)) ≤ ε
  Rational margin;     // E_μ[ℓ(y, ·)] - ε, at least γ (> 0 when strict)
};

inline ShatteringState shattering_initial_state(const ShatteringCertificate& cert) {
  return ShatteringState{cert.root, cert.dimension};
}

/// Instance the adversary presents in the current state.
inline std::size_t shattering_adversary_instance(const ShatteringCertificate& cert, const ShatteringState& state) {
  if (state.remaining < 1) throw Error("shattering adversary: depth exhausted");
  return cert.node(state.space, state.remaining).instance;
}

/// Labels the learner's mixture by best response over the node's candidates
/// and descends into the chosen child.
inline std::pair<AdversaryMove, ShatteringState> shattering_adversary_step(const Setting& setting,
                                                                          const ShatteringCertificate& cert,
                                                                          const ShatteringState& state,
                                                                          const Mixture& mu) {
  if (state.remaining < 1) throw Error("shattering adversary: depth exhausted");
  const auto& node = cert.node(state.space, state.remaining);
  const auto rows = node.rows(setting);
  auto [index, achieved] = best_response(mu, rows);
  const auto& edge = node.candidates[index];
  AdversaryMove move{edge.candidate.label, edge.candidate.threshold, achieved};
  return {std::move(move), ShatteringState{edge.child, state.remaining - 1}};
}

/// Stateful wrapper for game loops.
class ShatteringAdversary {
 public:
  ShatteringAdversary(const Setting& setting, ShatteringCertificate cert)
      : setting_(setting), cert_(std::move(cert)), state_(shattering_initial_state(cert_)) {}

  int remaining() const { return state_.remaining; }
  std::size_t instance() const { return shattering_adversary_instance(cert_, state_); }
  const VersionSpace& space() const { return state_.space; }
  const ShatteringCertificate& certificate() const { return cert_; }

  AdversaryMove respond(const Mixture& mu) {
    auto [move, next] = shattering_adversary_step(setting_, cert_, state_, mu);
    state_ = std::move(next);
    return move;
  }

 private:
  const Setting& setting_;
  ShatteringCertificate cert_;
  ShatteringState state_;
};

/// Two hypotheses, an instance and two labels meeting the two-point
/// conditions for a sqrt(T) regret lower bound.
struct SqrtTWitness {
  std::size_t instance = 0;
  std::size_t h_minus = 0;
  std::size_t h_plus = 0;
  std::size_t y_minus = 0;
  std::size_t y_plus = 0;
  Rational eta;

  friend bool operator==(const SqrtTWitness&, const SqrtTWitness&) = default;
};

/// η = min over σ of ℓ(y_{-σ}, h_σ(x)) - ℓ(y_σ, h_σ(x)).
inline Rational sqrt_witness_gap(const Setting& s, std::size_t x, std::size_t hm, std::size_t hp, std::size_t ym,
                                 std::size_t yp) {
  const Rational plus = s.hypothesis_loss(ym, hp, x) - s.hypothesis_loss(yp, hp, x);
  const Rational minus = s.hypothesis_loss(yp, hm, x) - s.hypothesis_loss(ym, hm, x);
  return std::min(plus, minus);
}

/// min_z ℓ(y₋, z) + ℓ(y₊, z) ≥ ½ Σ_{σ₁,σ₂} ℓ(y_σ₁, h_σ₂(x)).
inline bool sqrt_witness_balanced(const Setting& s, std::size_t x, std::size_t hm, std::size_t hp, std::size_t ym,
                                  std::size_t yp) {
  Rational cross = 0;
  for (auto y : {ym, yp}) {
    for (auto h : {hm, hp}) cross += s.hypothesis_loss(y, h, x);
  }
  for (std::size_t z = 0; z < s.num_predictions(); ++z) {
    if ((s.loss(ym, z) + s.loss(yp, z)) * 2 < cross) return false;
  }
  return true;
}

/// Exhaustive search in lexicographic (x, h₋, h₊, y₋, y₊) order; returns the
/// first witness attaining the largest η.
inline std::optional<SqrtTWitness> find_sqrt_witness(const Setting& s) {
  std::optional<SqrtTWitness> best;
  for (std::size_t x = 0; x < s.num_instances(); ++x) {
    for (std::size_t hm = 0; hm < s.num_hypotheses(); ++hm) {
      for (std::size_t hp = 0; hp < s.num_hypotheses(); ++hp) {
        if (hm == hp) continue;
        for (std::size_t ym = 0; ym < s.num_labels(); ++ym) {
          for (std::size_t yp = 0; yp < s.num_labels(); ++yp) {
            Rational eta = sqrt_witness_gap(s, x, hm, hp, ym, yp);
            if (eta <= 0) continue;
            if (best && eta <= best->eta) continue;
            if (!sqrt_witness_balanced(s, x, hm, hp, ym, yp)) continue;
            best = SqrtTWitness{x, hm, hp, ym, yp, std::move(eta)};
          }
        }
      }
    }
  }
  return best;
}

/// Stream (x, y_{σ_1}), ..., (x, y_{σ_T}) for signs σ_t ∈ {-1, +1}.
inline Stream rademacher_stream(const SqrtTWitness& w, std::span<const int> signs) {
  Stream out;
  out.reserve(signs.size());
  for (int s : signs) {
    if (s != 1 && s != -1) throw Error("rademacher_stream: signs must be +1 or -1");
    out.push_back(ThresholdedExample{w.instance, s > 0 ? w.y_plus : w.y_minus, std::nullopt});
  }
  return out;
}

}  // namespace smdim

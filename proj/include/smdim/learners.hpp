#pragma once

#include "smdim/core.hpp"
#include "smdim/dimensions.hpp"
#include "smdim/game_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace smdim {

/// A learner in the online protocol: sees x, commits to a mixture over
/// predictions, then receives the label (and threshold, in realizable mode).
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual Mixture predict(std::size_t x) = 0;
  virtual void update(std::size_t x, std::size_t y, const std::optional<Rational>& eps) = 0;
  virtual std::string name() const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<OnlineLearner>()>;

// ---------------------------------------------------------------------------
// MRSOA
// ---------------------------------------------------------------------------

enum class RealizabilityMode {
  kRealizable,  // an empty restriction is a protocol violation
  kLenient,     // an empty restriction retires the learner to the uniform mixture
};

struct MrsoaState {
  VersionSpace version_space;
  GammaValue gamma;
  std::optional<int> cached_dimension;
  std::optional<Mixture> last_mixture;
};

inline MrsoaState mrsoa_initial_state(const SmdimEngine& engine) {
  if (engine.gamma().strict || engine.gamma().gamma <= 0) throw Error("MRSOA needs a target accuracy gamma > 0");
  return MrsoaState{engine.setting().full_space(), engine.gamma(), std::nullopt, std::nullopt};
}

namespace detail {

/// The MRSOA mixture for version space V at instance x.
inline Mixture mrsoa_mixture(SmdimEngine& engine, const VersionSpace& space, std::size_t x) {
  const Setting& setting = engine.setting();
  const Rational& gamma = engine.gamma().gamma;
  const int dim = engine.dimension(space);

  if (dim == 0) {
    // One row per label at its smallest achievable threshold; larger
    // thresholds of the same label are implied.
    std::vector<AffineRow> rows;
    for (std::size_t y = 0; y < setting.num_labels(); ++y) {
      std::optional<Rational> eps;
      space.for_each([&](std::size_t h) {
        const auto& v = setting.hypothesis_loss(y, h, x);
        if (!eps || v < *eps) eps = v;
      });
      rows.push_back(AffineRow{setting.problem().loss[y], -*eps});
    }
    auto sol = solve_min_max(rows);
    if (!(sol.value < gamma)) {
      throw Error("MRSOA: no mixture is gamma-good for every candidate although SMdim(V) = 0");
    }
    return sol.mixture;
  }

  // Minimize, over mixtures, the largest child dimension among candidates the
  // mixture fails to beat by γ. The objective is piecewise constant, so sweep
  // levels m upward and stop at the first m whose candidates with child
  // dimension > m can all be held below γ simultaneously.
  auto cands = engine.enumerate_candidates(space, x);
  for (auto& c : cands) c.child_dimension = c.child == space ? dim : engine.dimension(c.child);

  std::optional<Mixture> previous;
  for (int m = -1; m < dim; ++m) {
    std::vector<AffineRow> rows;
    for (const auto& c : cands) {
      if (c.child_dimension > m) rows.push_back(AffineRow{setting.problem().loss[c.candidate.label], -c.candidate.threshold});
    }
    if (rows.empty()) {
      if (!previous) throw Error("internal: MRSOA level sweep found no candidates");
      return *previous;
    }
    auto sol = solve_min_max(rows);
    if (sol.value < gamma) return sol.mixture;
    previous = std::move(sol.mixture);
  }
  throw Error("internal: MRSOA cannot keep dimension-" + std::to_string(dim) + " candidates below gamma");
}

struct SpaceInstanceKey {
  VersionSpace space;
  std::size_t instance;
  friend bool operator==(const SpaceInstanceKey&, const SpaceInstanceKey&) = default;
};

struct SpaceInstanceHash {
  std::size_t operator()(const SpaceInstanceKey& k) const { return k.space.hash() * 31 + k.instance; }
};

}  // namespace detail

/// MRSOA's mixture is a deterministic function of (V, x); this caches it so
/// that many MRSOA copies (e.g. an expert pool) share the work.
class MrsoaPolicy {
 public:
  explicit MrsoaPolicy(std::shared_ptr<SmdimEngine> engine) : engine_(std::move(engine)) {
    mrsoa_initial_state(*engine_);  // validates γ
  }

  SmdimEngine& engine() { return *engine_; }
  const Setting& setting() const { return engine_->setting(); }

  const Mixture& mixture(const VersionSpace& space, std::size_t x) {
    if (space.empty()) throw Error("MRSOA: empty version space (stream not ε_t-realizable)");
    detail::SpaceInstanceKey key{space, x};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto mu = detail::mrsoa_mixture(*engine_, space, x);
    return cache_.emplace(std::move(key), std::move(mu)).first->second;
  }

 private:
  std::shared_ptr<SmdimEngine> engine_;
  std::unordered_map<detail::SpaceInstanceKey, Mixture, detail::SpaceInstanceHash> cache_;
};

inline std::pair<Mixture, MrsoaState> mrsoa_predict(MrsoaPolicy& policy, MrsoaState state, std::size_t x) {
  if (state.version_space.empty()) throw Error("MRSOA: empty version space (stream not ε_t-realizable)");
  if (!state.cached_dimension) state.cached_dimension = policy.engine().dimension(state.version_space);
  Mixture mu = policy.mixture(state.version_space, x);
  state.last_mixture = mu;
  return {std::move(mu), std::move(state)};
}

inline MrsoaState mrsoa_update(const Setting& setting, MrsoaState state, std::size_t x, std::size_t y,
                               const Rational& eps, RealizabilityMode mode = RealizabilityMode::kRealizable) {
  VersionSpace next = restrict(setting, state.version_space, x, Candidate{y, eps});
  if (next.empty() && mode == RealizabilityMode::kRealizable) {
    throw Error("stream not ε_t-realizable: no hypothesis has loss <= " + to_string(eps) + " on label '" +
                setting.problem().labels[y] + "' at instance '" + setting.problem().instances[x] + "'");
  }
  if (next != state.version_space) {
    state.version_space = std::move(next);
    state.cached_dimension.reset();
  }
  return state;
}

class MrsoaLearner final : public OnlineLearner {
 public:
  explicit MrsoaLearner(std::shared_ptr<MrsoaPolicy> policy)
      : policy_(std::move(policy)), state_(mrsoa_initial_state(policy_->engine())) {}

  Mixture predict(std::size_t x) override {
    auto [mu, next] = mrsoa_predict(*policy_, std::move(state_), x);
    state_ = std::move(next);
    return mu;
  }

  /// A missing threshold is treated as ε = 0 (the plain realizable setting).
  void update(std::size_t x, std::size_t y, const std::optional<Rational>& eps) override {
    state_ = mrsoa_update(policy_->setting(), std::move(state_), x, y, eps.value_or(Rational(0)));
  }

  std::string name() const override { return "mrsoa"; }
  const MrsoaState& state() const { return state_; }
  int dimension() {
    if (!state_.cached_dimension) state_.cached_dimension = policy_->engine().dimension(state_.version_space);
    return *state_.cached_dimension;
  }

 private:
  std::shared_ptr<MrsoaPolicy> policy_;
  MrsoaState state_;
};

// ---------------------------------------------------------------------------
// Expert pool and multiplicative weights
// ---------------------------------------------------------------------------

/// An MRSOA copy that updates only at rounds `timepoints` (0-based), using
/// the grid thresholds in `thresholds` instead of the unknown ε_t.
struct ExpertId {
  std::vector<std::size_t> timepoints;
  std::vector<Rational> thresholds;

  friend bool operator==(const ExpertId&, const ExpertId&) = default;
};

inline std::size_t default_pool_budget() { return 200000; }

/// Loss grid {0, α, 2α, ..., ⌈c/α⌉α}.
inline std::vector<Rational> loss_grid(const Rational& alpha, const Rational& c) {
  if (alpha <= 0) throw Error("alpha must be positive");
  const BigInt steps = ceil_to_int(c / alpha);
  std::vector<Rational> grid;
  for (BigInt i = 0; i <= steps; ++i) grid.push_back(alpha * Rational(i));
  return grid;
}

/// Σ_{i=0}^{d} g^i C(T, i) with g = ⌈c/α⌉ + 1.
inline BigInt expert_pool_size(std::size_t rounds, int dimension, const Rational& alpha, const Rational& c) {
  const BigInt g = ceil_to_int(c / alpha) + 1;
  BigInt total = 0;
  BigInt binom = 1;  // C(T, i)
  BigInt gpow = 1;   // g^i
  for (int i = 0; i <= dimension && static_cast<std::size_t>(i) <= rounds; ++i) {
    total += gpow * binom;
    binom = binom * (static_cast<long>(rounds) - i) / (i + 1);
    gpow *= g;
  }
  return total;
}

inline std::vector<ExpertId> build_expert_pool(std::size_t rounds, int dimension, const Rational& alpha,
                                               const Rational& c, std::size_t budget = default_pool_budget()) {
  if (rounds < 1) throw Error("expert pool needs T >= 1");
  if (dimension < 0) throw Error("expert pool needs d >= 0");
  if (alpha <= 0 || (c > 0 && alpha > c)) throw Error("expert pool needs 0 < alpha <= c");
  const BigInt size = expert_pool_size(rounds, dimension, alpha, c);
  if (size > BigInt(budget)) {
    throw Error("expert pool of " + size.str() + " experts exceeds the budget of " + std::to_string(budget));
  }
  const auto grid = loss_grid(alpha, c);

  std::vector<ExpertId> pool;
  pool.reserve(static_cast<std::size_t>(size));
  ExpertId current;
  // Subsets in lexicographic order of their sorted timepoints, each with every
  // grid assignment in lexicographic order of grid index.
  auto rec = [&](auto&& self, std::size_t next_round) -> void {
    pool.push_back(current);
    if (current.timepoints.size() == static_cast<std::size_t>(dimension)) return;
    for (std::size_t t = next_round; t < rounds; ++t) {
      current.timepoints.push_back(t);
      for (const auto& v : grid) {
        current.thresholds.push_back(v);
        self(self, t + 1);
        current.thresholds.pop_back();
      }
      current.timepoints.pop_back();
    }
  };
  rec(rec, 0);
  return pool;
}

/// Exponential weights, kept normalized so the largest weight is 1.
struct MwState {
  std::vector<double> weights;
  double eta = 0.0;
};

inline MwState mw_initial_state(std::size_t experts, std::size_t rounds) {
  if (experts == 0) throw Error("multiplicative weights needs at least one expert");
  const double eta = rounds == 0 ? 0.0 : std::sqrt(2.0 * std::log(static_cast<double>(experts)) / static_cast<double>(rounds));
  return MwState{std::vector<double>(experts, 1.0), eta};
}

/// Weighted average of the expert mixtures, exact given the double weights.
inline Mixture mw_aggregate(const MwState& state, std::span<const Mixture> expert_mixtures) {
  if (expert_mixtures.size() != state.weights.size()) throw Error("one mixture per expert required");
  const std::size_t n = expert_mixtures.front().size();
  std::vector<Rational> acc(n, Rational(0));
  Rational total = 0;
  for (std::size_t i = 0; i < expert_mixtures.size(); ++i) {
    const Rational w = from_double_exact(state.weights[i]);
    if (w <= 0) continue;
    total += w;
    for (std::size_t z = 0; z < n; ++z) {
      if (expert_mixtures[i][z] != 0) acc[z] += w * expert_mixtures[i][z];
    }
  }
  if (total <= 0) throw Error("internal: multiplicative weights collapsed to zero");
  for (auto& v : acc) v /= total;
  return Mixture::from_weights(std::move(acc));
}

/// Multiplies each weight by exp(-η·E_expert[ℓ(y, ·)]/c).
inline MwState mw_update(MwState state, const Setting& setting, std::span<const Mixture> expert_mixtures,
                         std::size_t y) {
  const double c = to_double(setting.bound_c());
  if (c <= 0) return state;
  double top = 0.0;
  for (std::size_t i = 0; i < state.weights.size(); ++i) {
    const double loss = to_double(expected_loss(setting, expert_mixtures[i], y)) / c;
    state.weights[i] *= std::exp(-state.eta * loss);
    top = std::max(top, state.weights[i]);
  }
  if (top > 0) {
    for (auto& w : state.weights) w /= top;
  }
  return state;
}

inline std::pair<Mixture, MwState> mw_step(MwState state, const Setting& setting,
                                           std::span<const Mixture> expert_mixtures, std::size_t y) {
  Mixture played = mw_aggregate(state, expert_mixtures);
  return {std::move(played), mw_update(std::move(state), setting, expert_mixtures, y)};
}

/// Expert pool of MRSOA copies aggregated by multiplicative weights; guarantees
/// regret c·d + γT + 1 + 2c·sqrt(d·T·ln(2cT)) with α = 1/T.
class AgnosticLearner final : public OnlineLearner {
 public:
  AgnosticLearner(std::shared_ptr<MrsoaPolicy> policy, std::size_t rounds, std::optional<Rational> alpha = std::nullopt,
                  std::size_t budget = default_pool_budget())
      : policy_(std::move(policy)), rounds_(rounds) {
    const Setting& setting = policy_->setting();
    dimension_ = policy_->engine().dimension(setting.full_space());
    const Rational a = alpha.value_or(make_rational(1, static_cast<std::int64_t>(std::max<std::size_t>(rounds, 1))));
    // With c = 0 every loss vanishes and a single grid point suffices.
    const Rational grid_c = setting.bound_c() > 0 ? setting.bound_c() : a;
    pool_ = build_expert_pool(std::max<std::size_t>(rounds, 1), dimension_, a, grid_c, budget);
    experts_.resize(pool_.size());
    mw_ = mw_initial_state(pool_.size(), rounds);
  }

  Mixture predict(std::size_t x) override {
    if (round_ >= rounds_) throw Error("agnostic learner: horizon of " + std::to_string(rounds_) + " rounds exceeded");
    current_.clear();
    current_.reserve(pool_.size());
    for (auto& e : experts_) current_.push_back(expert_mixture(e, x));
    predicted_ = true;
    return mw_aggregate(mw_, current_);
  }

  void update(std::size_t x, std::size_t y, const std::optional<Rational>&) override {
    if (!predicted_) predict(x);
    mw_ = mw_update(std::move(mw_), policy_->setting(), current_, y);
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      const auto& id = pool_[i];
      auto& e = experts_[i];
      if (e.next < id.timepoints.size() && id.timepoints[e.next] == round_) {
        e.state = mrsoa_update(policy_->setting(), std::move(*e.state), x, y, id.thresholds[e.next],
                               RealizabilityMode::kLenient);
        ++e.next;
      }
    }
    ++round_;
    predicted_ = false;
  }

  std::string name() const override { return "agnostic"; }
  std::size_t pool_size() const { return pool_.size(); }
  int dimension() const { return dimension_; }
  const MwState& weights() const { return mw_; }
  const std::vector<ExpertId>& pool() const { return pool_; }
  /// Mixtures of every expert for the current round (valid after predict).
  const std::vector<Mixture>& expert_mixtures() const { return current_; }

 private:
  struct Expert {
    std::optional<MrsoaState> state;  // built on first prediction
    std::size_t next = 0;             // position in timepoints
  };

  Mixture expert_mixture(Expert& e, std::size_t x) {
    if (!e.state) e.state = mrsoa_initial_state(policy_->engine());
    if (e.state->version_space.empty()) return Mixture::uniform(policy_->setting().num_predictions());
    return policy_->mixture(e.state->version_space, x);
  }

  std::shared_ptr<MrsoaPolicy> policy_;
  std::size_t rounds_;
  int dimension_ = 0;
  std::vector<ExpertId> pool_;
  std::vector<Expert> experts_;
  MwState mw_;
  std::vector<Mixture> current_;
  std::size_t round_ = 0;
  bool predicted_ = false;
};

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

inline void require_constant_class(const Setting& setting) {
  for (std::size_t h = 0; h < setting.num_hypotheses(); ++h) {
    for (std::size_t x = 1; x < setting.num_instances(); ++x) {
      if (setting.predict(h, x) != setting.predict(h, 0)) {
        throw Error("follow-the-leader needs a class of constant functions");
      }
    }
  }
}

/// Dirac on the constant of the hypothesis with least cumulative past loss.
inline Mixture ftl_step(const Setting& setting, const Stream& history, std::size_t /*x*/) {
  if (setting.num_hypotheses() == 0) throw Error("follow-the-leader needs a nonempty class");
  std::size_t best = 0;
  Rational best_loss;
  for (std::size_t h = 0; h < setting.num_hypotheses(); ++h) {
    Rational total = 0;
    for (const auto& e : history) total += setting.hypothesis_loss(e.label, h, e.instance);
    if (h == 0 || total < best_loss) {
      best = h;
      best_loss = std::move(total);
    }
  }
  return Mixture::dirac(setting.num_predictions(), setting.predict(best, 0));
}

class FtlLearner final : public OnlineLearner {
 public:
  explicit FtlLearner(const Setting& setting) : setting_(setting), totals_(setting.num_hypotheses(), Rational(0)) {
    require_constant_class(setting);
  }

  Mixture predict(std::size_t) override {
    std::size_t best = 0;
    for (std::size_t h = 1; h < totals_.size(); ++h) {
      if (totals_[h] < totals_[best]) best = h;
    }
    return Mixture::dirac(setting_.num_predictions(), setting_.predict(best, 0));
  }

  void update(std::size_t x, std::size_t y, const std::optional<Rational>&) override {
    for (std::size_t h = 0; h < totals_.size(); ++h) totals_[h] += setting_.hypothesis_loss(y, h, x);
  }

  std::string name() const override { return "ftl"; }

 private:
  const Setting& setting_;
  std::vector<Rational> totals_;
};

class UniformLearner final : public OnlineLearner {
 public:
  explicit UniformLearner(std::size_t predictions) : predictions_(predictions) {}
  Mixture predict(std::size_t) override { return Mixture::uniform(predictions_); }
  void update(std::size_t, std::size_t, const std::optional<Rational>&) override {}
  std::string name() const override { return "uniform"; }

 private:
  std::size_t predictions_;
};

/// Plays a fresh random rational mixture each round (denominator ≤ 64·|Z|).
class RandomMixtureLearner final : public OnlineLearner {
 public:
  RandomMixtureLearner(std::size_t predictions, std::uint64_t seed) : predictions_(predictions), rng_(seed) {}

  Mixture predict(std::size_t) override {
    std::uniform_int_distribution<int> dist(0, 64);
    std::vector<long> counts(predictions_);
    long total = 0;
    for (auto& c : counts) total += (c = dist(rng_));
    if (total == 0) {
      counts[0] = 1;
      total = 1;
    }
    std::vector<Rational> w;
    for (auto c : counts) w.push_back(make_rational(c, total));
    return Mixture::from_weights(std::move(w));
  }
  void update(std::size_t, std::size_t, const std::optional<Rational>&) override {}
  std::string name() const override { return "random"; }

 private:
  std::size_t predictions_;
  std::mt19937_64 rng_;
};

}  // namespace smdim

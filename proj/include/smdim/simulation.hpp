#pragma once

#include "smdim/adversaries.hpp"
#include "smdim/core.hpp"
#include "smdim/learners.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace smdim {

enum class GameMode { kExact, kMonteCarlo };

struct GameOptions {
  GameMode mode = GameMode::kExact;
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
};

struct RoundRecord {
  std::size_t instance = 0;
  std::size_t label = 0;
  std::optional<Rational> eps;
  Mixture mixture;
  Rational expected_loss;
};

struct MonteCarloSummary {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  double mean_regret = 0.0;
  double standard_error = 0.0;
};

/// Outcome of one game. Exact quantities are always filled in; the Monte
/// Carlo summary is present only when sampling was requested.
struct RegretReport {
  std::vector<RoundRecord> rounds;
  Rational cumulative_loss;
  std::size_t hindsight_hypothesis = 0;
  Rational hindsight_loss;
  Rational regret;
  GameMode mode = GameMode::kExact;
  std::optional<MonteCarloSummary> monte_carlo;

  std::vector<Rational> per_round_losses() const {
    std::vector<Rational> out;
    for (const auto& r : rounds) out.push_back(r.expected_loss);
    return out;
  }
  Stream stream() const {
    Stream out;
    for (const auto& r : rounds) out.push_back(ThresholdedExample{r.instance, r.label, r.eps});
    return out;
  }
};

/// argmin_h Σ ℓ(y_t, h(x_t)), lowest index on ties; (0, 0) for an empty stream.
inline std::pair<std::size_t, Rational> best_in_hindsight(const Setting& setting, const Stream& stream) {
  std::size_t best = 0;
  Rational best_loss = 0;
  if (stream.empty()) return {best, best_loss};
  for (std::size_t h = 0; h < setting.num_hypotheses(); ++h) {
    Rational total = 0;
    for (const auto& e : stream) total += setting.hypothesis_loss(e.label, h, e.instance);
    if (h == 0 || total < best_loss) {
      best = h;
      best_loss = std::move(total);
    }
  }
  return {best, best_loss};
}

namespace detail {

inline void finish_report(const Setting& setting, RegretReport& report, const GameOptions& options) {
  report.cumulative_loss = 0;
  for (const auto& r : report.rounds) report.cumulative_loss += r.expected_loss;
  auto [h, loss] = best_in_hindsight(setting, report.stream());
  report.hindsight_hypothesis = h;
  report.hindsight_loss = loss;
  report.regret = report.cumulative_loss - report.hindsight_loss;
  report.mode = options.mode;
  if (options.mode != GameMode::kMonteCarlo) return;

  // Learners here condition only on past labels, never on sampled
  // predictions, so resampling z_t from the recorded mixtures is faithful.
  std::mt19937_64 rng(options.seed);
  std::vector<std::discrete_distribution<std::size_t>> samplers;
  for (const auto& r : report.rounds) {
    std::vector<double> w;
    for (const auto& p : r.mixture.weights()) w.push_back(to_double(p));
    samplers.emplace_back(w.begin(), w.end());
  }
  const double hindsight = to_double(report.hindsight_loss);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    double loss = 0.0;
    for (std::size_t t = 0; t < report.rounds.size(); ++t) {
      const auto z = samplers[t](rng);
      loss += to_double(setting.loss(report.rounds[t].label, z));
    }
    const double regret = loss - hindsight;
    sum += regret;
    sum_sq += regret * regret;
  }
  MonteCarloSummary mc;
  mc.seed = options.seed;
  mc.trials = options.trials;
  if (options.trials > 0) {
    const double n = static_cast<double>(options.trials);
    mc.mean_regret = sum / n;
    const double var = options.trials > 1 ? std::max(0.0, (sum_sq - n * mc.mean_regret * mc.mean_regret) / (n - 1)) : 0.0;
    mc.standard_error = std::sqrt(var / n);
  }
  report.monte_carlo = mc;
}

[[noreturn]] inline void rethrow_with_round(std::size_t t, const Error& e) {
  throw Error("round " + std::to_string(t + 1) + ": " + e.what());
}

}  // namespace detail

/// Plays `learner` against an oblivious stream.
inline RegretReport run_game(const Setting& setting, OnlineLearner& learner, const Stream& stream,
                             const GameOptions& options = {}) {
  setting.check_stream(stream);
  RegretReport report;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& e = stream[t];
    try {
      Mixture mu = learner.predict(e.instance);
      Rational loss = expected_loss(setting, mu, e.label);
      learner.update(e.instance, e.label, e.eps);
      report.rounds.push_back(RoundRecord{e.instance, e.label, e.eps, std::move(mu), std::move(loss)});
    } catch (const Error& err) {
      detail::rethrow_with_round(t, err);
    }
  }
  detail::finish_report(setting, report, options);
  return report;
}

/// Plays `learner` against the adaptive shattering adversary for `rounds`
/// rounds (at most the certificate depth). The adversary sees each mixture
/// before labeling and reveals its candidate threshold as ε_t.
inline RegretReport run_game(const Setting& setting, OnlineLearner& learner, ShatteringAdversary& adversary,
                             std::size_t rounds, const GameOptions& options = {}) {
  RegretReport report;
  for (std::size_t t = 0; t < rounds; ++t) {
    try {
      const std::size_t x = adversary.instance();
      Mixture mu = learner.predict(x);
      const AdversaryMove move = adversary.respond(mu);
      Rational loss = expected_loss(setting, mu, move.label);
      learner.update(x, move.label, move.threshold);
      report.rounds.push_back(RoundRecord{x, move.label, move.threshold, std::move(mu), std::move(loss)});
    } catch (const Error& err) {
      detail::rethrow_with_round(t, err);
    }
  }
  detail::finish_report(setting, report, options);
  return report;
}

inline std::size_t default_sign_cap() { return 12; }

/// Average regret over all 2^T sign sequences of the two-point stream, with a
/// fresh learner per sequence.
inline Rational exact_expectation_over_signs(const Setting& setting, const SqrtTWitness& witness,
                                             const LearnerFactory& factory, std::size_t rounds,
                                             std::size_t cap = default_sign_cap()) {
  if (rounds > cap) {
    throw Error("sign enumeration for T = " + std::to_string(rounds) + " exceeds the cap of " + std::to_string(cap));
  }
  if (rounds == 0) return Rational(0);
  Rational total = 0;
  const std::uint64_t sequences = std::uint64_t{1} << rounds;
  std::vector<int> signs(rounds);
  for (std::uint64_t mask = 0; mask < sequences; ++mask) {
    for (std::size_t t = 0; t < rounds; ++t) signs[t] = (mask >> t) & 1U ? 1 : -1;
    auto learner = factory();
    total += run_game(setting, *learner, rademacher_stream(witness, signs)).regret;
  }
  return total / Rational(BigInt(sequences));
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Quotes a CSV field when RFC 4180 requires it.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string mixture_text(const Mixture& mu) {
  std::string out;
  for (std::size_t z = 0; z < mu.size(); ++z) out += (z ? ";" : "") + to_string(mu[z]);
  return out;
}

/// Transcript with CRLF line endings: round, instance, label, eps, mixture, expected_loss.
inline std::string transcript_csv(const Setting& setting, const RegretReport& report) {
  std::ostringstream out;
  out << "round,instance,label,eps,mixture,expected_loss\r\n";
  for (std::size_t t = 0; t < report.rounds.size(); ++t) {
    const auto& r = report.rounds[t];
    out << (t + 1) << ',' << csv_field(setting.problem().instances[r.instance]) << ','
        << csv_field(setting.problem().labels[r.label]) << ',' << (r.eps ? to_string(*r.eps) : "") << ','
        << csv_field(mixture_text(r.mixture)) << ',' << to_string(r.expected_loss) << "\r\n";
  }
  return out.str();
}

inline nlohmann::json report_to_json(const Setting& setting, const RegretReport& report) {
  nlohmann::json doc;
  auto& rounds = doc["rounds"] = nlohmann::json::array();
  for (std::size_t t = 0; t < report.rounds.size(); ++t) {
    const auto& r = report.rounds[t];
    nlohmann::json row{{"round", t + 1},
                       {"x", r.instance},
                       {"y", r.label},
                       {"instance", setting.problem().instances[r.instance]},
                       {"label", setting.problem().labels[r.label]},
                       {"expected_loss", to_string(r.expected_loss)}};
    auto& mix = row["mixture"] = nlohmann::json::array();
    for (const auto& w : r.mixture.weights()) mix.push_back(to_string(w));
    if (r.eps) row["eps"] = to_string(*r.eps);
    rounds.push_back(std::move(row));
  }
  doc["cumulative_loss"] = to_string(report.cumulative_loss);
  doc["hindsight_hypothesis"] = report.hindsight_hypothesis;
  doc["hindsight_loss"] = to_string(report.hindsight_loss);
  doc["regret"] = to_string(report.regret);
  doc["mode"] = report.mode == GameMode::kExact ? "exact" : "monte-carlo";
  if (report.monte_carlo) {
    doc["monte_carlo"] = {{"seed", report.monte_carlo->seed},
                          {"trials", report.monte_carlo->trials},
                          {"mean_regret", report.monte_carlo->mean_regret},
                          {"standard_error", report.monte_carlo->standard_error}};
  }
  return doc;
}

}  // namespace smdim

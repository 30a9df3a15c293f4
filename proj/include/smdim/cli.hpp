#pragma once

#include "smdim/adversaries.hpp"
#include "smdim/bounds.hpp"
#include "smdim/dimensions.hpp"
#include "smdim/instances.hpp"
#include "smdim/learners.hpp"
#include "smdim/simulation.hpp"
#include "smdim/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace smdim {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitVerificationFailed = 3 };

struct CliConfig {
  std::string subcommand;
  std::string instance_path;
  std::string builtin;
  std::string format = "plain";
  std::string out_path;

  std::string dimension = "smdim";
  std::string gammas;
  int k = 1;
  bool certificate = false;

  std::string learner;
  std::string stream_path;
  std::string alpha;
  std::string mode = "exact";
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
  std::optional<std::size_t> rounds;

  std::string prop;
  std::size_t cases = 100;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline InstanceSpec load_instance(const CliConfig& cfg) {
  if (!cfg.instance_path.empty() && !cfg.builtin.empty()) throw Error("give either --instance or --builtin, not both");
  if (!cfg.instance_path.empty()) {
    try {
      auto spec = parse_instance_file(read_file(cfg.instance_path));
      spec.name = cfg.instance_path;
      return spec;
    } catch (const Error& e) {
      throw Error(cfg.instance_path + ": " + e.what());
    }
  }
  if (!cfg.builtin.empty()) return make_builtin(cfg.builtin);
  throw Error("an instance is required (--instance FILE or --builtin NAME)");
}

inline std::vector<Rational> parse_gamma_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto g = try_parse_rational(item);
    if (!g) throw Error("gamma must be a rational literal, got '" + item + "'");
    if (*g < 0) throw Error("gamma must be nonnegative, got '" + item + "'");
    out.push_back(*g);
  }
  if (out.empty()) throw Error("--gamma is required");
  return out;
}

inline Rational parse_single_gamma(const std::string& text) {
  auto gs = parse_gamma_list(text);
  if (gs.size() != 1) throw Error("exactly one gamma expected");
  return gs.front();
}

/// Reads a {0,1} loss matrix as set-valued feedback: y ↦ {z : ℓ(y, z) = 0}.
inline SetValuedProblem as_set_valued(const Setting& s) {
  SetValuedProblem p;
  p.instances = s.problem().instances;
  p.predictions = s.problem().predictions;
  for (std::size_t y = 0; y < s.num_labels(); ++y) {
    std::vector<std::size_t> members;
    for (std::size_t z = 0; z < s.num_predictions(); ++z) {
      const auto& v = s.loss(y, z);
      if (v != 0 && v != 1) throw Error("msdim needs a {0,1} indicator loss");
      if (v == 0) members.push_back(z);
    }
    p.label_sets.push_back(std::move(members));
  }
  return p;
}

struct Learners {
  std::shared_ptr<MrsoaPolicy> policy;
  std::unique_ptr<OnlineLearner> learner;
};

inline Learners make_learner(const CliConfig& cfg, const Setting& s, std::optional<Rational> gamma,
                             std::size_t rounds) {
  Learners out;
  auto need_policy = [&] {
    if (!gamma) throw Error("--gamma is required for learner " + cfg.learner);
    auto engine = std::make_shared<SmdimEngine>(s, GammaValue::of(*gamma));
    out.policy = std::make_shared<MrsoaPolicy>(engine);
  };
  if (cfg.learner == "mrsoa") {
    need_policy();
    out.learner = std::make_unique<MrsoaLearner>(out.policy);
  } else if (cfg.learner == "agnostic") {
    need_policy();
    std::optional<Rational> alpha;
    if (!cfg.alpha.empty()) alpha = parse_rational(cfg.alpha);
    out.learner = std::make_unique<AgnosticLearner>(out.policy, rounds, alpha);
  } else if (cfg.learner == "ftl") {
    out.learner = std::make_unique<FtlLearner>(s);
  } else if (cfg.learner == "uniform") {
    out.learner = std::make_unique<UniformLearner>(s.num_predictions());
  } else if (cfg.learner == "random") {
    out.learner = std::make_unique<RandomMixtureLearner>(s.num_predictions(), cfg.seed);
  } else {
    throw Error("unknown learner '" + cfg.learner + "' (mrsoa, agnostic, ftl, uniform, random)");
  }
  return out;
}

inline GameOptions game_options(const CliConfig& cfg) {
  GameOptions o;
  if (cfg.mode == "exact") {
    o.mode = GameMode::kExact;
  } else if (cfg.mode == "monte-carlo") {
    o.mode = GameMode::kMonteCarlo;
  } else {
    throw Error("--mode must be exact or monte-carlo");
  }
  o.seed = cfg.seed;
  o.trials = cfg.trials;
  return o;
}

/// Exact value, followed by a decimal approximation when it is not an integer.
inline std::string plain_value(const Rational& v) {
  if (boost::multiprecision::denominator(v) == 1) return to_string(v);
  std::ostringstream out;
  out << to_string(v) << " (~" << to_double(v) << ")";
  return out.str();
}

inline std::string report_plain(const RegretReport& r) {
  std::ostringstream out;
  out << "rounds " << r.rounds.size() << "\n"
      << "cumulative_loss " << plain_value(r.cumulative_loss) << "\n"
      << "hindsight_hypothesis " << r.hindsight_hypothesis << "\n"
      << "hindsight_loss " << plain_value(r.hindsight_loss) << "\n"
      << "regret " << plain_value(r.regret) << "\n";
  if (r.monte_carlo) {
    out << "mc_mean_regret " << r.monte_carlo->mean_regret << "\n"
        << "mc_standard_error " << r.monte_carlo->standard_error << "\n";
  }
  return out.str();
}

inline std::string render_report(const CliConfig& cfg, const Setting& s, const RegretReport& r,
                                 nlohmann::json extra, const std::string& extra_plain) {
  if (cfg.format == "csv") return transcript_csv(s, r);
  if (cfg.format == "json") {
    auto doc = report_to_json(s, r);
    for (auto& [k, v] : extra.items()) doc[k] = v;
    return doc.dump(2) + "\n";
  }
  return extra_plain + report_plain(r);
}

inline std::string run_dim(const CliConfig& cfg) {
  const auto spec = load_instance(cfg);
  const Setting s = spec.setting();
  const auto full = s.full_space();
  struct Row {
    std::string gamma;
    int value;
    std::optional<nlohmann::json> certificate;
  };
  std::vector<Row> rows;
  if (cfg.dimension == "ldim" || cfg.dimension == "ldimk") {
    const int k = cfg.dimension == "ldim" ? 1 : cfg.k;
    rows.push_back(Row{"", ldim_k(s, full, k), std::nullopt});
  } else {
    for (const auto& g : parse_gamma_list(cfg.gammas)) {
      if (cfg.dimension == "smdim") {
        SmdimEngine engine(s, GammaValue::of(g));
        Row row{GammaValue::of(g).str(), engine.dimension(full), std::nullopt};
        if (cfg.certificate) row.certificate = engine.certificate(full).to_json();
        rows.push_back(std::move(row));
      } else if (cfg.dimension == "seqfat") {
        rows.push_back(Row{to_string(g), seqfat(s, full, g), std::nullopt});
      } else if (cfg.dimension == "msdim") {
        rows.push_back(Row{GammaValue::of(g).str(), msdim(as_set_valued(s), s.hypotheses(), full, GammaValue::of(g)),
                           std::nullopt});
      } else {
        throw Error("unknown dimension '" + cfg.dimension + "' (smdim, ldim, ldimk, seqfat, msdim)");
      }
    }
  }
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "dimension,gamma,value\r\n";
    for (const auto& r : rows) out << cfg.dimension << ',' << csv_field(r.gamma) << ',' << r.value << "\r\n";
  } else if (cfg.format == "json") {
    nlohmann::json doc{{"dimension", cfg.dimension}, {"instance", spec.name}};
    if (cfg.dimension == "ldimk") doc["k"] = cfg.k;
    auto& results = doc["results"] = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json item{{"value", r.value}};
      if (!r.gamma.empty()) item["gamma"] = r.gamma;
      if (r.certificate) item["certificate"] = *r.certificate;
      results.push_back(std::move(item));
    }
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& r : rows) out << r.value << "\n";
  }
  return out.str();
}

inline std::string run_learn(const CliConfig& cfg) {
  const auto spec = load_instance(cfg);
  const Setting s = spec.setting();
  if (cfg.stream_path.empty()) throw Error("--stream is required");
  Stream stream;
  try {
    stream = parse_stream_file(read_file(cfg.stream_path));
  } catch (const Error& e) {
    throw Error(cfg.stream_path + ": " + e.what());
  }
  std::optional<Rational> gamma;
  if (!cfg.gammas.empty()) gamma = parse_single_gamma(cfg.gammas);
  auto made = make_learner(cfg, s, gamma, stream.size());
  const auto report = run_game(s, *made.learner, stream, game_options(cfg));
  return render_report(cfg, s, report, {{"learner", cfg.learner}}, "");
}

inline std::string run_adversary(const CliConfig& cfg) {
  const auto spec = load_instance(cfg);
  const Setting s = spec.setting();
  const Rational gamma = parse_single_gamma(cfg.gammas);
  SmdimEngine engine(s, GammaValue::of(gamma));
  auto cert = engine.certificate(s.full_space());
  const std::size_t rounds = cfg.rounds.value_or(static_cast<std::size_t>(cert.dimension));
  if (rounds > static_cast<std::size_t>(cert.dimension)) {
    throw Error("the certificate has depth " + std::to_string(cert.dimension) + "; -T " + std::to_string(rounds) +
                " is too long");
  }
  auto made = make_learner(cfg, s, gamma, rounds);
  ShatteringAdversary adversary(s, std::move(cert));
  const auto report = run_game(s, *made.learner, adversary, rounds, game_options(cfg));
  const Rational bound = gamma * static_cast<long>(rounds);
  nlohmann::json extra{{"learner", cfg.learner},
                       {"smdim", adversary.certificate().dimension},
                       {"lower_bound", to_string(bound)},
                       {"bound_holds", report.regret >= bound}};
  const std::string plain = "smdim " + std::to_string(adversary.certificate().dimension) + "\nlower_bound " +
                            to_string(bound) + "\n";
  return render_report(cfg, s, report, extra, plain);
}

inline std::string run_sqrt_lower(const CliConfig& cfg) {
  const auto spec = load_instance(cfg);
  const Setting s = spec.setting();
  if (!cfg.rounds) throw Error("-T is required");
  const std::size_t rounds = *cfg.rounds;
  const auto witness = find_sqrt_witness(s);
  if (!witness) throw Error("no two-point witness exists for this instance");
  const std::optional<Rational> gamma =
      cfg.gammas.empty() ? std::optional<Rational>(make_rational(1, 4)) : std::optional<Rational>(parse_single_gamma(cfg.gammas));
  CliConfig learner_cfg = cfg;
  if (learner_cfg.learner.empty()) learner_cfg.learner = "agnostic";
  LearnerFactory factory = [&]() { return make_learner(learner_cfg, s, gamma, rounds).learner; };
  // The factory's policies are rebuilt per sequence; share one instead.
  std::shared_ptr<MrsoaPolicy> shared;
  if (learner_cfg.learner == "mrsoa" || learner_cfg.learner == "agnostic") {
    shared = make_learner(learner_cfg, s, gamma, rounds).policy;
    factory = [&]() -> std::unique_ptr<OnlineLearner> {
      if (learner_cfg.learner == "mrsoa") return std::make_unique<MrsoaLearner>(shared);
      std::optional<Rational> alpha;
      if (!learner_cfg.alpha.empty()) alpha = parse_rational(learner_cfg.alpha);
      return std::make_unique<AgnosticLearner>(shared, rounds, alpha);
    };
  }
  const Rational value = exact_expectation_over_signs(s, *witness, factory, rounds);
  const bool holds = bounds::meets_sqrt_lower(value, witness->eta, rounds);
  const double bound = bounds::sqrt_lower(to_double(witness->eta), rounds);
  std::ostringstream out;
  if (cfg.format == "json") {
    nlohmann::json doc{{"learner", learner_cfg.learner},
                       {"T", rounds},
                       {"witness",
                        {{"instance", witness->instance},
                         {"h_minus", witness->h_minus},
                         {"h_plus", witness->h_plus},
                         {"y_minus", witness->y_minus},
                         {"y_plus", witness->y_plus},
                         {"eta", to_string(witness->eta)}}},
                       {"expected_regret", to_string(value)},
                       {"bound", bound},
                       {"holds", holds}};
    out << doc.dump(2) << "\n";
  } else if (cfg.format == "csv") {
    out << "learner,T,eta,expected_regret,bound,holds\r\n"
        << learner_cfg.learner << ',' << rounds << ',' << to_string(witness->eta) << ',' << to_string(value) << ','
        << bound << ',' << (holds ? "true" : "false") << "\r\n";
  } else {
    out << "eta " << plain_value(witness->eta) << "\nexpected_regret " << plain_value(value) << "\nbound " << bound
        << "\nholds " << (holds ? "true" : "false") << "\n";
  }
  return out.str();
}

inline std::string run_verify(const CliConfig& cfg, bool& failed) {
  const auto report = verify_proposition(cfg.prop, cfg.seed, cfg.cases);
  failed = report.counterexamples() != 0;
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "case,gamma,smdim,other,relation,holds,note\r\n";
    for (const auto& c : report.checks) {
      out << c.case_index << ',' << csv_field(c.gamma) << ',' << c.lhs << ',' << c.rhs << ',' << csv_field(c.relation)
          << ',' << (c.holds ? "true" : "false") << ',' << csv_field(c.note) << "\r\n";
    }
  } else if (cfg.format == "json") {
    nlohmann::json doc{{"proposition", report.proposition},
                       {"seed", report.seed},
                       {"cases", report.cases},
                       {"counterexamples", report.counterexamples()}};
    auto& checks = doc["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks) {
      nlohmann::json item{{"case", c.case_index}, {"gamma", c.gamma},     {"smdim", c.lhs},
                          {"other", c.rhs},       {"relation", c.relation}, {"holds", c.holds}};
      if (!c.note.empty()) item["note"] = c.note;
      checks.push_back(std::move(item));
    }
    out << doc.dump(2) << "\n";
  } else {
    out << "proposition " << report.proposition << ": " << report.cases << " cases, " << report.checks.size()
        << " checks, " << report.counterexamples() << " counterexamples\n";
    for (const auto& c : report.checks) {
      if (!c.holds) {
        out << "counterexample: case " << c.case_index << " gamma " << c.gamma << ": smdim " << c.lhs << " vs "
            << c.rhs << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace detail

/// Runs the command line; results go to `out` (or --out), messages to `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliConfig cfg;
  CLI::App app{"Sequential Minimax dimension toolkit", "smdim"};
  app.require_subcommand(1);
  app.add_option("--instance", cfg.instance_path, "Instance JSON file");
  app.add_option("--builtin", cfg.builtin, "Built-in family, e.g. multiclass:binary-constants");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"plain", "csv", "json"}));
  app.add_option("--out", cfg.out_path, "Write results to this file instead of stdout");

  auto* dim = app.add_subcommand("dim", "Compute a combinatorial dimension")->fallthrough();
  dim->add_option("--dimension", cfg.dimension)->check(CLI::IsMember({"smdim", "ldim", "ldimk", "seqfat", "msdim"}));
  dim->add_option("--gamma", cfg.gammas, "Comma-separated rational scales");
  dim->add_option("--k", cfg.k, "List size for ldimk")->check(CLI::PositiveNumber);
  dim->add_flag("--certificate", cfg.certificate, "Include the shattering certificate (json)");

  auto* learn = app.add_subcommand("learn", "Run a learner on a stream file")->fallthrough();
  learn->add_option("--learner", cfg.learner)->required();
  learn->add_option("--stream", cfg.stream_path)->required();
  learn->add_option("--gamma", cfg.gammas);
  learn->add_option("--alpha", cfg.alpha);

  auto* adv = app.add_subcommand("adversary", "Play a learner against the shattering adversary")->fallthrough();
  adv->add_option("--learner", cfg.learner)->required();
  adv->add_option("--gamma", cfg.gammas)->required();
  adv->add_option("--alpha", cfg.alpha);

  auto* verify = app.add_subcommand("verify", "Check a dimension equivalence on random instances")->fallthrough();
  verify->add_option("--prop", cfg.prop)->required()->check(CLI::IsMember({"6.1", "6.2", "6.3", "6.4"}));
  verify->add_option("--cases", cfg.cases);

  auto* sqrt_lower = app.add_subcommand("sqrt-lower", "Enumerate sign sequences for the two-point lower bound")
                         ->fallthrough();
  sqrt_lower->add_option("--learner", cfg.learner);
  sqrt_lower->add_option("--gamma", cfg.gammas);
  sqrt_lower->add_option("--alpha", cfg.alpha);

  for (auto* sub : {learn, adv}) {
    sub->add_option("--mode", cfg.mode)->check(CLI::IsMember({"exact", "monte-carlo"}));
    sub->add_option("--trials", cfg.trials);
  }
  for (auto* sub : {learn, adv, verify, sqrt_lower}) sub->add_option("--seed", cfg.seed);
  for (auto* sub : {adv, sqrt_lower}) {
    sub->add_option_function<std::size_t>("-T", [&](const std::size_t& t) { cfg.rounds = t; }, "Number of rounds");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    std::string result;
    bool failed = false;
    if (dim->parsed()) {
      result = detail::run_dim(cfg);
    } else if (learn->parsed()) {
      result = detail::run_learn(cfg);
    } else if (adv->parsed()) {
      result = detail::run_adversary(cfg);
    } else if (verify->parsed()) {
      result = detail::run_verify(cfg, failed);
    } else {
      result = detail::run_sqrt_lower(cfg);
    }
    if (cfg.out_path.empty()) {
      out << result;
    } else {
      std::ofstream file(cfg.out_path, std::ios::binary);
      if (!file) throw Error("cannot write '" + cfg.out_path + "'");
      file << result;
    }
    if (failed) {
      err << "verification failed: counterexample found\n";
      return kExitVerificationFailed;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace smdim

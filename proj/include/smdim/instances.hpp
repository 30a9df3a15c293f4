#pragma once

#include "smdim/core.hpp"
#include "smdim/rational.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smdim {

/// A named problem together with its hypothesis class.
struct InstanceSpec {
  std::string name;
  Problem problem;
  HypothesisClass hypotheses;

  Setting setting() const { return validate_problem(problem, hypotheses); }
};

struct BuiltinBudget {
  std::size_t max_dimension = 4;      // K for multilabel
  std::size_t max_grid = 9;           // points on a regression grid, labels for multiclass
  std::size_t max_hypotheses = 12;
};

using BuiltinParams = std::map<std::string, std::string>;

namespace detail {

inline std::size_t param_size(const BuiltinParams& params, const std::string& key, std::size_t fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const auto& v = it->second;
  if (v.empty() || v.size() > 6 || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error("parameter " + key + " must be a non-negative integer, got '" + v + "'");
  }
  return std::stoul(v);
}

inline std::string param_text(const BuiltinParams& params, const std::string& key, std::string fallback) {
  auto it = params.find(key);
  return it == params.end() ? std::move(fallback) : it->second;
}

inline void check_known(const std::string& family, const BuiltinParams& params,
                        std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (auto name : known) ok = ok || k == name;
    if (!ok) throw Error("unknown parameter '" + k + "' for family " + family);
  }
}

inline void check_range(const std::string& what, std::size_t value, std::size_t lo, std::size_t hi) {
  if (value < lo || value > hi) {
    throw Error(what + " = " + std::to_string(value) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                "]");
  }
}

inline void check_hypotheses(const HypothesisClass& h, const BuiltinBudget& budget) {
  if (h.size() > budget.max_hypotheses) {
    throw Error("hypothesis class of size " + std::to_string(h.size()) + " exceeds the budget of " +
                std::to_string(budget.max_hypotheses));
  }
}

/// Constant hypotheses h ≡ z for each z in `values`.
inline HypothesisClass constants(const std::vector<std::size_t>& values, std::size_t instances) {
  HypothesisClass h;
  for (auto z : values) h.table.emplace_back(instances, z);
  return h;
}

inline std::vector<std::string> instance_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

/// Squared Euclidean or ℓ1 distance between rational points.
inline Rational point_distance(const std::vector<Rational>& a, const std::vector<Rational>& b, int p) {
  Rational total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Rational d = a[i] - b[i];
    total += p == 1 ? abs(d) : d * d;
  }
  return total;
}

/// Exact square root of a nonnegative rational, or nullopt if irrational.
inline std::optional<Rational> exact_sqrt(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  const BigInt sn = boost::multiprecision::sqrt(num);
  const BigInt sd = boost::multiprecision::sqrt(den);
  if (sn * sn != num || sd * sd != den) return std::nullopt;
  return Rational(sn, sd);
}

inline std::string point_name(const std::vector<Rational>& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + to_string(p[i]);
  return out + ")";
}

/// Metric problem on a finite point set with Y = Z.
inline Problem point_problem(const std::vector<std::vector<Rational>>& points, const std::vector<std::string>& names,
                             int p, bool root, std::size_t instances) {
  Problem prob;
  prob.instances = instance_names(instances);
  prob.labels = names;
  prob.predictions = names;
  Rational c = 0;
  for (const auto& y : points) {
    std::vector<Rational> row;
    for (const auto& z : points) {
      Rational d = point_distance(y, z, p);
      if (root) {
        auto s = exact_sqrt(d);
        if (!s) {
          throw Error("Euclidean distance between " + point_name(y) + " and " + point_name(z) +
                      " is irrational; use the squared norm or p=1");
        }
        d = *s;
      }
      c = std::max(c, d);
      row.push_back(std::move(d));
    }
    prob.loss.push_back(std::move(row));
  }
  prob.bound_c = c;
  return prob;
}

}  // namespace detail

/// Splits "family:token,token" where each token is key=value or a preset name.
inline std::pair<std::string, BuiltinParams> parse_builtin_name(std::string_view text) {
  const auto colon = text.find(':');
  std::string family(text.substr(0, colon));
  BuiltinParams params;
  if (colon == std::string_view::npos) return {family, params};
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto token = rest.substr(0, comma);
    if (const auto eq = token.find('='); eq != std::string_view::npos) {
      params[std::string(token.substr(0, eq))] = std::string(token.substr(eq + 1));
    } else if (!token.empty()) {
      params["preset"] = std::string(token);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return {family, params};
}

/// Built-in problem families. Parameters (all optional):
///   multiclass  labels=N (2..9), instances=N (1..4), hyp=constants|all; preset binary-constants
///   list        labels=N (2..9), k (1..labels-1); Z = nonempty subsets of size ≤ k, H = singleton constants
///   setvalued   predictions=N (2..4), sets=singletons|all; H = constants
///   regression  grid=N (3..9, odd), hyp=pm1|constants; Y = Z = grid on [-1, 1], ℓ = |y - z|
///   vector      p=1|2, root=0|1; Y = Z = {0, ±e1, ±e2}, H = constants at ±e1, ±e2
///   multilabel  K (1..4), hyp=antipodal|constants; ℓ = Hamming / K
///   hilbert     Y = Z = {e1, e2, 0}, squared norm, H = the three constants
inline InstanceSpec make_builtin(const std::string& family, const BuiltinParams& params,
                                 const BuiltinBudget& budget = {}) {
  using namespace detail;
  InstanceSpec spec;
  spec.name = family;
  if (family == "multiclass") {
    check_known(family, params, {"preset", "labels", "instances", "hyp"});
    std::size_t labels = 2, instances = 1;
    std::string hyp = "constants";
    if (auto it = params.find("preset"); it != params.end()) {
      if (it->second != "binary-constants") throw Error("unknown multiclass preset '" + it->second + "'");
      spec.name = "multiclass:binary-constants";
    }
    labels = param_size(params, "labels", labels);
    instances = param_size(params, "instances", instances);
    hyp = param_text(params, "hyp", hyp);
    check_range("labels", labels, 2, budget.max_grid);
    check_range("instances", instances, 1, 4);
    auto& p = spec.problem;
    p.instances = instance_names(instances);
    for (std::size_t y = 0; y < labels; ++y) p.labels.push_back(std::to_string(y));
    p.predictions = p.labels;
    for (std::size_t y = 0; y < labels; ++y) {
      std::vector<Rational> row(labels, Rational(1));
      row[y] = 0;
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 1;
    if (hyp == "constants") {
      std::vector<std::size_t> all(labels);
      for (std::size_t y = 0; y < labels; ++y) all[y] = y;
      spec.hypotheses = constants(all, instances);
    } else if (hyp == "all") {
      std::size_t total = 1;
      for (std::size_t i = 0; i < instances; ++i) {
        total *= labels;
        if (total > budget.max_hypotheses) break;
      }
      if (total > budget.max_hypotheses) {
        throw Error("all " + std::to_string(labels) + "^" + std::to_string(instances) +
                    " functions exceed the hypothesis budget of " + std::to_string(budget.max_hypotheses));
      }
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<std::size_t> row(instances);
        std::size_t rest = code;
        for (std::size_t i = 0; i < instances; ++i) {
          row[i] = rest % labels;
          rest /= labels;
        }
        spec.hypotheses.table.push_back(std::move(row));
      }
    } else {
      throw Error("hyp must be constants or all, got '" + hyp + "'");
    }
  } else if (family == "list") {
    check_known(family, params, {"labels", "k"});
    const std::size_t labels = param_size(params, "labels", 3);
    check_range("labels", labels, 2, budget.max_grid);
    const std::size_t k = param_size(params, "k", labels - 1);
    check_range("k", k, 1, labels - 1);
    auto& p = spec.problem;
    p.instances = instance_names(1);
    for (std::size_t y = 0; y < labels; ++y) p.labels.push_back(std::to_string(y));
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t mask = 1; mask < (1U << labels); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) <= k) subsets.push_back(mask);
    }
    // Order by size, then lexicographically by members, so singletons come first.
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](auto a, auto b) { return std::popcount(a) < std::popcount(b); });
    std::vector<std::size_t> singleton(labels);
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      std::string name = "{";
      bool first = true;
      for (std::size_t y = 0; y < labels; ++y) {
        if ((subsets[i] >> y) & 1U) {
          name += (first ? "" : ",") + std::to_string(y);
          first = false;
        }
      }
      p.predictions.push_back(name + "}");
      if (std::popcount(subsets[i]) == 1) singleton[std::countr_zero(subsets[i])] = i;
    }
    for (std::size_t y = 0; y < labels; ++y) {
      std::vector<Rational> row;
      for (auto mask : subsets) row.push_back(((mask >> y) & 1U) ? Rational(0) : Rational(1));
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 1;
    spec.hypotheses = constants(singleton, 1);
  } else if (family == "setvalued") {
    check_known(family, params, {"predictions", "sets"});
    const std::size_t n = param_size(params, "predictions", 2);
    check_range("predictions", n, 2, budget.max_dimension);
    const std::string sets = param_text(params, "sets", "singletons");
    auto& p = spec.problem;
    p.instances = instance_names(1);
    for (std::size_t z = 0; z < n; ++z) p.predictions.push_back(std::string(1, static_cast<char>('a' + z)));
    std::vector<std::uint32_t> masks;
    if (sets == "singletons") {
      for (std::size_t z = 0; z < n; ++z) masks.push_back(1U << z);
    } else if (sets == "all") {
      for (std::uint32_t m = 1; m < (1U << n); ++m) masks.push_back(m);
    } else {
      throw Error("sets must be singletons or all, got '" + sets + "'");
    }
    for (auto m : masks) {
      std::string name = "{";
      std::vector<Rational> row(n, Rational(1));
      bool first = true;
      for (std::size_t z = 0; z < n; ++z) {
        if ((m >> z) & 1U) {
          row[z] = 0;
          name += (first ? "" : ",") + p.predictions[z];
          first = false;
        }
      }
      p.labels.push_back(name + "}");
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 1;
    std::vector<std::size_t> all(n);
    for (std::size_t z = 0; z < n; ++z) all[z] = z;
    spec.hypotheses = constants(all, 1);
  } else if (family == "regression") {
    check_known(family, params, {"grid", "hyp"});
    const std::size_t n = param_size(params, "grid", 3);
    check_range("grid", n, 3, budget.max_grid);
    if (n % 2 == 0) throw Error("grid size must be odd so that 0 lies on the grid");
    const std::string hyp = param_text(params, "hyp", "pm1");
    auto& p = spec.problem;
    p.instances = instance_names(1);
    std::vector<Rational> values;
    for (std::size_t i = 0; i < n; ++i) {
      values.push_back(Rational(-1) + make_rational(2 * static_cast<long>(i), static_cast<long>(n - 1)));
      p.labels.push_back(to_string(values.back()));
    }
    p.predictions = p.labels;
    for (const auto& y : values) {
      std::vector<Rational> row;
      for (const auto& z : values) row.push_back(abs(y - z));
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 2;
    if (hyp == "pm1") {
      spec.hypotheses = constants({0, n - 1}, 1);
    } else if (hyp == "constants") {
      std::vector<std::size_t> all(n);
      for (std::size_t z = 0; z < n; ++z) all[z] = z;
      spec.hypotheses = constants(all, 1);
    } else {
      throw Error("hyp must be pm1 or constants, got '" + hyp + "'");
    }
  } else if (family == "vector") {
    check_known(family, params, {"p", "root"});
    const std::size_t p_norm = param_size(params, "p", 1);
    const bool root = param_size(params, "root", 0) != 0;
    if (p_norm != 1 && p_norm != 2) throw Error("p must be 1 or 2; other norms are not rational on the grid");
    if (p_norm == 1 && root) throw Error("root applies to p=2 only");
    const std::vector<std::vector<Rational>> points{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const std::vector<std::string> names{"0", "e1", "-e1", "e2", "-e2"};
    spec.problem = point_problem(points, names, static_cast<int>(p_norm), root, 1);
    spec.hypotheses = constants({1, 2, 3, 4}, 1);
    spec.name = "vector:p=" + std::to_string(p_norm);
  } else if (family == "multilabel") {
    check_known(family, params, {"K", "hyp"});
    const std::size_t k = param_size(params, "K", 2);
    check_range("K", k, 1, budget.max_dimension);
    const std::string hyp = param_text(params, "hyp", "antipodal");
    auto& p = spec.problem;
    p.instances = instance_names(1);
    const std::size_t n = std::size_t{1} << k;
    for (std::size_t v = 0; v < n; ++v) {
      std::string name;
      for (std::size_t b = 0; b < k; ++b) name += ((v >> b) & 1U) ? '1' : '0';
      p.labels.push_back(name);
    }
    p.predictions = p.labels;
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<Rational> row;
      for (std::size_t z = 0; z < n; ++z) {
        row.push_back(make_rational(std::popcount(static_cast<unsigned>(y ^ z)), static_cast<long>(k)));
      }
      p.loss.push_back(std::move(row));
    }
    p.bound_c = 1;
    if (hyp == "antipodal") {
      spec.hypotheses = constants({0, n - 1}, 1);
    } else if (hyp == "constants") {
      std::vector<std::size_t> all(n);
      for (std::size_t z = 0; z < n; ++z) all[z] = z;
      spec.hypotheses = constants(all, 1);
    } else {
      throw Error("hyp must be antipodal or constants, got '" + hyp + "'");
    }
  } else if (family == "hilbert") {
    check_known(family, params, {});
    const std::vector<std::vector<Rational>> points{{1, 0}, {0, 1}, {0, 0}};
    spec.problem = point_problem(points, {"e1", "e2", "0"}, 2, false, 1);
    spec.hypotheses = constants({0, 1, 2}, 1);
  } else {
    throw Error("unknown builtin family '" + family + "'");
  }
  check_hypotheses(spec.hypotheses, budget);
  validate_problem(spec.problem, spec.hypotheses);
  return spec;
}

inline InstanceSpec make_builtin(std::string_view name, const BuiltinBudget& budget = {}) {
  auto [family, params] = parse_builtin_name(name);
  auto spec = make_builtin(family, params, budget);
  if (name.find(':') != std::string_view::npos) spec.name = std::string(name);
  return spec;
}

/// Default-parameter instances of every family, plus a two-instance class
/// with all binary functions so that depth-2 certificates are exercised.
inline std::vector<std::string> builtin_catalog() {
  return {"multiclass:binary-constants", "multiclass:instances=2,hyp=all", "list", "setvalued", "regression",
          "vector:p=1",  "vector:p=2", "multilabel", "hilbert"};
}

// ---------------------------------------------------------------------------
// JSON files
// ---------------------------------------------------------------------------

namespace detail {

/// Builds a DOM like nlohmann's own parser, but keeps floating-point
/// literals as their source text so that decimals convert exactly.
class ExactSax {
 public:
  using json = nlohmann::json;

  bool null() { return put(nullptr); }
  bool boolean(bool v) { return put(v); }
  bool number_integer(json::number_integer_t v) { return put(v); }
  bool number_unsigned(json::number_unsigned_t v) { return put(v); }
  bool number_float(json::number_float_t, const json::string_t& text) { return put(json(text)); }
  bool string(json::string_t& v) { return put(v); }
  bool binary(json::binary_t&) { return false; }
  bool start_object(std::size_t) {
    stack_.push_back(put_container(json::object()));
    return true;
  }
  bool key(json::string_t& k) {
    key_ = k;
    return true;
  }
  bool end_object() {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    stack_.push_back(put_container(json::array()));
    return true;
  }
  bool end_array() {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& e) {
    error_ = "invalid JSON at byte " + std::to_string(position) + ": " + e.what();
    return false;
  }

  json& root() { return root_; }
  const std::string& error() const { return error_; }

 private:
  json* put_container(json value) {
    if (stack_.empty()) {
      root_ = std::move(value);
      return &root_;
    }
    json& parent = *stack_.back();
    if (parent.is_array()) {
      parent.push_back(std::move(value));
      return &parent.back();
    }
    return &(parent[key_] = std::move(value));
  }
  bool put(json value) {
    put_container(std::move(value));
    return true;
  }

  json root_;
  std::vector<json*> stack_;
  std::string key_;
  std::string error_;
};

inline nlohmann::json parse_exact_json(std::string_view bytes) {
  ExactSax sax;
  const bool ok = nlohmann::json::sax_parse(bytes.begin(), bytes.end(), &sax);
  if (!ok) throw Error(sax.error().empty() ? "invalid JSON" : sax.error());
  return std::move(sax.root());
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error((path.empty() ? "/" : path) + ": " + what);
}

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& path, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required field");
  return *it;
}

inline void require_keys(const nlohmann::json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k == a;
    if (!ok) schema_error(path + "/" + k, "unknown field");
  }
}

inline Rational read_rational(const nlohmann::json& v, const std::string& path, bool nonnegative = true) {
  std::optional<Rational> r;
  if (v.is_number_integer()) {
    r = parse_rational(v.dump());
  } else if (v.is_string()) {
    r = try_parse_rational(v.get<std::string>());
  }
  if (!r) schema_error(path, "expected a rational (\"p/q\" string or decimal literal)");
  if (nonnegative && *r < 0) schema_error(path, "must be nonnegative, got " + to_string(*r));
  return *r;
}

inline std::size_t read_index(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    schema_error(path, "expected a non-negative integer index");
  }
  return v.get<std::size_t>();
}

inline std::vector<std::string> read_names(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number_integer()) {
      out.push_back(e.dump());
    } else {
      schema_error(path + "/" + std::to_string(i), "expected a string or integer identifier");
    }
  }
  return out;
}

}  // namespace detail

/// Parses an instance document; errors name the offending JSON pointer.
inline InstanceSpec parse_instance_json(const nlohmann::json& doc) {
  using namespace detail;
  require_keys(doc, "", {"labels", "predictions", "instances", "loss", "bound_c", "hypotheses"});
  InstanceSpec spec;
  spec.name = "file";
  auto& p = spec.problem;
  p.labels = read_names(field(doc, "", "labels"), "/labels");
  p.predictions = read_names(field(doc, "", "predictions"), "/predictions");
  p.instances = read_names(field(doc, "", "instances"), "/instances");
  const auto& loss = field(doc, "", "loss");
  if (!loss.is_array()) schema_error("/loss", "expected an array of rows");
  for (std::size_t y = 0; y < loss.size(); ++y) {
    const std::string row_path = "/loss/" + std::to_string(y);
    if (!loss[y].is_array()) schema_error(row_path, "expected an array");
    std::vector<Rational> row;
    for (std::size_t z = 0; z < loss[y].size(); ++z) row.push_back(read_rational(loss[y][z], row_path + "/" + std::to_string(z)));
    p.loss.push_back(std::move(row));
  }
  p.bound_c = read_rational(field(doc, "", "bound_c"), "/bound_c");
  const auto& hyps = field(doc, "", "hypotheses");
  if (!hyps.is_array()) schema_error("/hypotheses", "expected an array of rows");
  for (std::size_t h = 0; h < hyps.size(); ++h) {
    const std::string row_path = "/hypotheses/" + std::to_string(h);
    if (!hyps[h].is_array()) schema_error(row_path, "expected an array");
    std::vector<std::size_t> row;
    for (std::size_t x = 0; x < hyps[h].size(); ++x) row.push_back(read_index(hyps[h][x], row_path + "/" + std::to_string(x)));
    spec.hypotheses.table.push_back(std::move(row));
  }
  validate_problem(p, spec.hypotheses);
  return spec;
}

inline InstanceSpec parse_instance_file(std::string_view bytes) {
  return parse_instance_json(detail::parse_exact_json(bytes));
}

inline Stream parse_stream_json(const nlohmann::json& doc) {
  using namespace detail;
  require_keys(doc, "", {"stream"});
  const auto& arr = field(doc, "", "stream");
  if (!arr.is_array()) schema_error("/stream", "expected an array");
  Stream out;
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const std::string path = "/stream/" + std::to_string(t);
    const auto& e = arr[t];
    require_keys(e, path, {"x", "y", "eps"});
    ThresholdedExample ex;
    ex.instance = read_index(field(e, path, "x"), path + "/x");
    ex.label = read_index(field(e, path, "y"), path + "/y");
    if (auto it = e.find("eps"); it != e.end()) ex.eps = read_rational(*it, path + "/eps");
    out.push_back(std::move(ex));
  }
  return out;
}

inline Stream parse_stream_file(std::string_view bytes) { return parse_stream_json(detail::parse_exact_json(bytes)); }

/// Canonical form: sorted keys, rationals as strings, two-space indent,
/// trailing newline.
inline std::string serialize_instance(const InstanceSpec& spec) {
  nlohmann::json doc;
  const auto& p = spec.problem;
  doc["labels"] = p.labels;
  doc["predictions"] = p.predictions;
  doc["instances"] = p.instances;
  auto& loss = doc["loss"] = nlohmann::json::array();
  for (const auto& row : p.loss) {
    auto& r = loss.emplace_back(nlohmann::json::array());
    for (const auto& v : row) r.push_back(to_string(v));
  }
  // The bound as written; validation tightens the working copy.
  doc["bound_c"] = to_string(p.declared_bound > p.bound_c ? p.declared_bound : p.bound_c);
  doc["hypotheses"] = spec.hypotheses.table;
  return doc.dump(2) + "\n";
}

inline std::string serialize_stream(const Stream& stream) {
  nlohmann::json doc;
  auto& arr = doc["stream"] = nlohmann::json::array();
  for (const auto& e : stream) {
    nlohmann::json item{{"x", e.instance}, {"y", e.label}};
    if (e.eps) item["eps"] = to_string(*e.eps);
    arr.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace smdim

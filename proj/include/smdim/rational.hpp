#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace smdim {

/// Exact rational scalar used for every loss, threshold, mixture weight and
/// game value. Expression templates are off so `auto` locals hold values.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw Error("zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

/// "p/q" for non-integers, "p" for integers; always in lowest terms.
inline std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact value of a finite double (every finite double is a dyadic rational).
inline Rational from_double_exact(double v) {
  if (!std::isfinite(v)) throw Error("non-finite value");
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  // 2^53 * mant is an integer for IEEE doubles.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational r{BigInt(scaled)};
  const int shift = exp - 53;
  if (shift >= 0) {
    r *= Rational(BigInt(1) << shift);
  } else {
    r /= Rational(BigInt(1) << -shift);
  }
  return r;
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

/// Base-10 integer from a nonempty digit string.
inline BigInt decimal_int(std::string_view digits) {
  const auto first = std::min(digits.find_first_not_of('0'), digits.size() - 1);
  return BigInt(std::string(digits.substr(first)));
}

}  // namespace detail

/// Parses "p/q", integers, and decimal literals ("0.125", "-1.5e-2") exactly.
/// Returns nullopt on malformed text.
inline std::optional<Rational> try_parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string_view s = text;
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;

  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = s.substr(0, slash);
    const auto den = s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) return std::nullopt;
    const BigInt d = detail::decimal_int(den);
    if (d == 0) return std::nullopt;
    result = Rational(detail::decimal_int(num), d);
  } else {
    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      auto exp_text = s.substr(e + 1);
      bool exp_neg = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_neg = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!detail::all_digits(exp_text) || exp_text.size() > 6) return std::nullopt;
      exponent = std::stol(std::string(exp_text));
      if (exp_neg) exponent = -exponent;
    }
    std::string digits;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
      const auto int_part = mantissa.substr(0, dot);
      const auto frac_part = mantissa.substr(dot + 1);
      if (int_part.empty() && frac_part.empty()) return std::nullopt;
      if (!int_part.empty() && !detail::all_digits(int_part)) return std::nullopt;
      if (!frac_part.empty() && !detail::all_digits(frac_part)) return std::nullopt;
      digits = std::string(int_part) + std::string(frac_part);
      exponent -= static_cast<long>(frac_part.size());
    } else {
      if (!detail::all_digits(mantissa)) return std::nullopt;
      digits = std::string(mantissa);
    }
    if (std::labs(exponent) > 4096) return std::nullopt;
    // A leading zero would make the GMP string constructor read octal.
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    result = Rational(BigInt(digits));
    const Rational ten_pow{boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)))};
    if (exponent >= 0) {
      result *= ten_pow;
    } else {
      result /= ten_pow;
    }
  }
  return negative ? Rational(-result) : result;
}

inline Rational parse_rational(std::string_view text) {
  auto r = try_parse_rational(text);
  if (!r) throw Error("malformed rational literal '" + std::string(text) + "'");
  return *r;
}

inline Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

/// Smallest integer >= r.
inline BigInt ceil_to_int(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;  // truncates toward zero
  if (q * den < num) q += 1;
  return q;
}

}  // namespace smdim

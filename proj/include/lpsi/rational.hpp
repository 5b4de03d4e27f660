#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

namespace lpsi {

using BigInt = boost::multiprecision::cpp_int;

/// Exact arithmetic scalar. Structural decisions (signs, collinearity, knot
/// positions) are computed in Rational when the pipeline runs in exact mode;
/// costs |c|^p are always evaluated in double.
using Rational = boost::multiprecision::cpp_rational;

template <class S>
inline constexpr bool is_exact_scalar_v = !std::is_floating_point_v<S>;

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }
inline double to_double(double x) { return x; }

inline int sign_of(const Rational& q) { return q.sign(); }
inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

template <class S>
S abs_value(const S& x) {
  return x < S(0) ? S(-x) : x;
}

/// Every finite double is a dyadic rational; the conversion is exact.
inline Rational rational_from_double(double x) { return Rational(x); }

inline BigInt pow10(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

/// Parses plain decimal text ("-12.05", "3e-4", "0.05E2") to an exact Rational.
/// Returns nullopt on anything else.
inline std::optional<Rational> parse_decimal(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto digit = [&](std::size_t k) { return k < n && text[k] >= '0' && text[k] <= '9'; };

  bool neg = false;
  if (i < n && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';

  BigInt mantissa = 0;
  unsigned frac_digits = 0;
  bool any = false;
  while (digit(i)) {
    mantissa = mantissa * 10 + (text[i++] - '0');
    any = true;
  }
  if (i < n && text[i] == '.') {
    ++i;
    while (digit(i)) {
      mantissa = mantissa * 10 + (text[i++] - '0');
      ++frac_digits;
      any = true;
    }
  }
  if (!any) return std::nullopt;

  long exponent = 0;
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    if (!digit(i)) return std::nullopt;
    while (digit(i)) {
      exponent = exponent * 10 + (text[i++] - '0');
      if (exponent > 100000) return std::nullopt;
    }
    if (eneg) exponent = -exponent;
  }
  if (i != n) return std::nullopt;

  long down = static_cast<long>(frac_digits) - exponent;
  Rational value;
  if (down >= 0) {
    value = Rational(mantissa, pow10(static_cast<unsigned>(down)));
  } else {
    value = Rational(mantissa * pow10(static_cast<unsigned>(-down)), 1);
  }
  if (neg) value = -value;
  return value;
}

/// "num/den" in lowest terms; integral values render without the "/1".
inline std::string to_fraction_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline std::optional<Rational> parse_fraction(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  auto num = parse_decimal(text.substr(0, slash));
  auto den = parse_decimal(text.substr(slash + 1));
  if (!num || !den || *den == 0) return std::nullopt;
  return *num / *den;
}

}  // namespace lpsi

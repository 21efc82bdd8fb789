#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace threshpath {

// Exact signed 64-bit rational. Only what the cost pipeline needs: parsing,
// normalisation, comparison, exact ceilings and lcm scaling. All overflow
// paths raise InputError instead of wrapping.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw InputError("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (den == 0) den = 1;  // num == 0 case after gcd
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <
           static_cast<__int128>(b.num) * a.den;
  }

  std::string str() const {
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Parses "p/q" or a bare integer "p". Whitespace is not tolerated: these
// strings come from config files and CLI flags where exactness matters.
inline Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const std::int64_t n = std::stoll(text, &used);
      if (used != text.size()) throw InputError("trailing characters in rational: " + text);
      return Rational(n, 1);
    }
    const std::string ns = text.substr(0, slash);
    const std::string ds = text.substr(slash + 1);
    const std::int64_t n = std::stoll(ns, &used);
    if (used != ns.size()) throw InputError("bad numerator in rational: " + text);
    const std::int64_t d = std::stoll(ds, &used);
    if (used != ds.size()) throw InputError("bad denominator in rational: " + text);
    return Rational(n, d);
  } catch (const std::invalid_argument&) {
    throw InputError("unparsable rational: " + text);
  } catch (const std::out_of_range&) {
    throw InputError("rational out of 64-bit range: " + text);
  }
}

// ceil(a / b) in exact integer arithmetic, any sign of a, b > 0.
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  if (b <= 0) throw InputError("ceil_div requires a positive divisor");
  std::int64_t q = a / b;
  if (a % b != 0 && a > 0) ++q;
  return q;
}

// ceil(r * k) exactly, for integer k.
inline std::int64_t ceil_scaled(const Rational& r, std::int64_t k) {
  const __int128 p = static_cast<__int128>(r.num) * k;
  const __int128 d = r.den;
  __int128 q = p / d;
  if (p % d != 0 && p > 0) ++q;
  if (q > INT64_MAX || q < INT64_MIN) throw InputError("rational ceiling overflows 64 bits");
  return static_cast<std::int64_t>(q);
}

struct ScaledCosts {
  std::vector<std::int64_t> values;  // mu * cost, exact
  std::int64_t mu = 1;               // lcm of the reduced denominators
};

// Rescales rational costs to integers by the least common multiple of the
// denominators. Equivalent network: thresholds scale uniformly, so the
// discovered paths are unchanged.
inline ScaledCosts scale_rational_costs(const std::vector<Rational>& costs) {
  ScaledCosts out;
  out.mu = 1;
  for (const Rational& c : costs) {
    const std::int64_t g = std::gcd(out.mu, c.den);
    const __int128 l = static_cast<__int128>(out.mu) / g * c.den;
    if (l > INT64_MAX) throw InputError("lcm of denominators overflows 64 bits");
    out.mu = static_cast<std::int64_t>(l);
  }
  out.values.reserve(costs.size());
  for (const Rational& c : costs) {
    const __int128 v = static_cast<__int128>(c.num) * (out.mu / c.den);
    if (v > INT64_MAX || v < INT64_MIN) throw InputError("scaled cost overflows 64 bits");
    out.values.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

}  // namespace threshpath

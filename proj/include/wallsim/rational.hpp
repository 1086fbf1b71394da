#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <cstdint>
#include <string>

namespace wallsim {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// Scalar traits shared by the exact and floating point code paths.
template <typename Scalar> struct ScalarOps {
  static double to_double(const Scalar &v) { return static_cast<double>(v); }
};

template <> struct ScalarOps<Rational> {
  static double to_double(const Rational &v) { return v.convert_to<double>(); }
};

template <typename Scalar> double to_double(const Scalar &v) {
  return ScalarOps<Scalar>::to_double(v);
}

/// Integer power with negative exponents allowed (base must be nonzero then).
template <typename Scalar> Scalar ipow(const Scalar &base, long long e) {
  if (e < 0)
    return Scalar(1) / ipow(base, -e);
  Scalar result(1);
  Scalar b = base;
  while (e > 0) {
    if (e & 1)
      result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

/// Parses "1/2", "0.25" or "3" into an exact rational. Decimal strings are
/// read digit by digit, so "0.2" becomes exactly 1/5.
inline Rational parse_rational(const std::string &text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    Rational num(text.substr(0, slash));
    Rational den(text.substr(slash + 1));
    return num / den;
  }
  auto dot = text.find('.');
  if (dot == std::string::npos)
    return Rational(text);
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  if (digits.empty() || digits == "-")
    throw std::invalid_argument("malformed number: " + text);
  Rational scale = ipow(Rational(10), static_cast<long long>(text.size() - dot - 1));
  return Rational(digits) / scale;
}

/// Closest "small" rational to a double, via its shortest decimal rendering.
inline Rational rational_from_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return parse_rational(buf);
}

} // namespace wallsim

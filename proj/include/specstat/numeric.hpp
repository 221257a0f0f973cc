#pragma once

// Exact scalar types shared by every module, plus the few conversions that
// need care: big integers to floating point without overflow, and the
// canonical text form of exact rationals used in every report.

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "specstat/errors.hpp"

namespace specstat {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rational& r) { return den(r) == 1; }

/// Canonical form: "p" for integers, "p/q" (q > 1, lowest terms) otherwise.
inline std::string to_string(const Rational& r) { return r.str(); }
inline std::string to_string(const BigInt& z) { return z.str(); }

/// Parses "p", "p/q" or a plain decimal such as "-0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return InvalidArgument("not an exact rational: '" + s + "'"); };
  if (s.empty()) throw bad();
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt p(s.substr(0, slash));
      BigInt q(s.substr(slash + 1));
      if (q == 0) throw bad();
      return Rational(p, q);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      std::string whole = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      bool negative = !whole.empty() && whole.front() == '-';
      if (negative || (!whole.empty() && whole.front() == '+')) whole.erase(0, 1);
      if (whole.empty()) whole = "0";
      if (frac.empty()) frac = "0";
      for (char c : whole + frac)
        if (c < '0' || c > '9') throw bad();
      BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
      Rational r(BigInt(whole) * scale + BigInt(frac), scale);
      return negative ? Rational(-r) : r;
    }
    return Rational(BigInt(s));
  } catch (const std::runtime_error&) {
    throw bad();
  }
}

inline BigInt pow2(unsigned n) {
  BigInt z = 1;
  z <<= n;
  return z;
}

namespace detail {

// |z| = mantissa * 2^exponent with the top 64 bits of |z| kept in the mantissa.
struct TopBits {
  std::uint64_t mantissa = 0;
  long exponent = 0;
};

inline TopBits top_bits(const BigInt& z) {
  const mpz_srcptr p = z.backend().data();
  if (mpz_sgn(p) == 0) return {};
  const std::size_t bits = mpz_sizeinbase(p, 2);
  mpz_t t;
  mpz_init(t);
  mpz_abs(t, p);
  long shift = 0;
  if (bits > 64) {
    shift = static_cast<long>(bits - 64);
    mpz_tdiv_q_2exp(t, t, static_cast<mp_bitcnt_t>(shift));
  }
  std::uint64_t m = 0;
  mpz_export(&m, nullptr, -1, sizeof m, 0, 0, t);
  mpz_clear(t);
  return {m, shift};
}

}  // namespace detail

/// Converts with a 64-bit mantissa; overflows to inf only past long double range.
inline long double to_long_double(const BigInt& z) {
  auto [m, e] = detail::top_bits(z);
  long double v = std::ldexp(static_cast<long double>(m), static_cast<int>(e));
  return z < 0 ? -v : v;
}

/// Natural log of |z|, finite for any non-zero z regardless of size.
inline long double log_abs(const BigInt& z) {
  auto [m, e] = detail::top_bits(z);
  if (m == 0) return -INFINITY;
  return std::log(static_cast<long double>(m)) + static_cast<long double>(e) * std::log(2.0L);
}

/// a / b for arbitrarily large operands, carried with 64-bit mantissas.
inline long double ratio(const BigInt& a, const BigInt& b) {
  if (b == 0) throw NumericError("division by zero in big-integer ratio");
  auto [ma, ea] = detail::top_bits(a);
  auto [mb, eb] = detail::top_bits(b);
  if (ma == 0) return 0.0L;
  long double v = std::ldexp(static_cast<long double>(ma) / static_cast<long double>(mb),
                             static_cast<int>(ea - eb));
  return ((a < 0) != (b < 0)) ? -v : v;
}

inline long double to_long_double(const Rational& r) { return ratio(num(r), den(r)); }
inline double to_double(const Rational& r) { return static_cast<double>(to_long_double(r)); }
inline double to_double(const BigInt& z) { return static_cast<double>(to_long_double(z)); }

/// Round-trip float formatting used by every CSV writer.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace specstat

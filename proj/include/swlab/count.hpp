#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace swlab {

/// Exact lattice-point count. 128 bits; every arithmetic step is checked.
using Count = unsigned __int128;

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

inline Count checked_add(Count a, Count b) {
  Count out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("count addition overflows 128 bits");
  return out;
}

inline Count checked_mul(Count a, Count b) {
  Count out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("count multiplication overflows 128 bits");
  return out;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("integer addition overflows 64 bits");
  return out;
}

inline std::int64_t checked_abs(std::int64_t a) {
  if (a == INT64_MIN) throw OverflowError("absolute value overflows 64 bits");
  return a < 0 ? -a : a;
}

std::uint64_t narrow_u64(Count c);
std::string to_string(Count c);
BigInt to_bigint(Count c);
Rational to_rational(Count c);
double to_double(Count c);

/// "p/q" or "p" for integers.
std::string to_string(const Rational& q);

}  // namespace swlab

#include "swlab/count.hpp"

#include <algorithm>

namespace swlab {

std::uint64_t narrow_u64(Count c) {
  if (c >> 64) throw OverflowError("count does not fit in 64 bits");
  return static_cast<std::uint64_t>(c);
}

std::string to_string(Count c) {
  if (c == 0) return "0";
  std::string out;
  while (c != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(c % 10)));
    c /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

BigInt to_bigint(Count c) {
  BigInt hi = static_cast<std::uint64_t>(c >> 64);
  BigInt lo = static_cast<std::uint64_t>(c);
  return (hi << 64) | lo;
}

Rational to_rational(Count c) { return Rational(to_bigint(c)); }

double to_double(Count c) { return static_cast<double>(c); }

std::string to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace swlab

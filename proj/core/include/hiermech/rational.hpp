#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>

namespace hiermech {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& q) { return q.convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.convert_to<double>(); }

// Exact value of a double as a rational (doubles are dyadic rationals).
inline Rat rat_from_double(double d) { return Rat(d); }

inline Rat make_rat(std::int64_t num, std::int64_t den) {
  BigInt n(num), d(den);
  if (d < 0) {
    n = -n;
    d = -d;
  }
  return Rat(n, d);
}

inline BigInt floor_rat(const Rat& q) {
  BigInt n = numerator(q), d = denominator(q);  // d > 0 canonical
  BigInt t = n / d;                             // truncates toward zero
  if (n < 0 && t * d != n) --t;
  return t;
}

inline BigInt ceil_rat(const Rat& q) { return -floor_rat(-q); }

inline std::int64_t to_int64(const BigInt& n) {
  if (n > std::numeric_limits<std::int64_t>::max() ||
      n < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("BigInt out of int64 range");
  }
  return n.convert_to<std::int64_t>();
}

}  // namespace hiermech

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exact rational arithmetic on int64 with __int128 intermediates. Internal
// to the design module; only needs to survive Gaussian elimination on
// desk-scale integer design matrices, so it throws on overflow instead of
// growing arbitrary precision.

#ifndef LOGLIN_SRC_RATIONAL_HPP
#define LOGLIN_SRC_RATIONAL_HPP

#include <cstdint>
#include <numeric>

#include "loglin/errors.hpp"

namespace loglin::detail {

using i64 = std::int64_t;
using i128 = __int128;

inline i64 checked_i64(i128 v) {
  if (v > i128(INT64_MAX) || v < i128(INT64_MIN))
    raise(Errc::invalid_argument, "rational arithmetic overflow");
  return static_cast<i64>(v);
}

inline i64 gcd_i64(i64 a, i64 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  return std::gcd(a, b);
}

struct Rat {
  i64 num = 0;
  i64 den = 1;  // > 0, gcd(num, den) == 1

  Rat() = default;
  Rat(i64 n) : num(n), den(1) {}
  Rat(i64 n, i64 d) {
    if (d == 0) raise(Errc::invalid_argument, "rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    i64 g = gcd_i64(n, d);
    if (g > 1) { n /= g; d /= g; }
    num = n;
    den = d;
  }

  bool is_zero() const { return num == 0; }
};

inline Rat norm128(i128 n, i128 d) {
  if (d == 0) raise(Errc::invalid_argument, "rational with zero denominator");
  if (d < 0) { n = -n; d = -d; }
  i128 a = n < 0 ? -n : n, b = d;
  while (b) { i128 t = a % b; a = b; b = t; }
  if (a > 1) { n /= a; d /= a; }
  Rat r;
  r.num = checked_i64(n);
  r.den = checked_i64(d);
  return r;
}

inline Rat operator+(const Rat& x, const Rat& y) {
  return norm128(i128(x.num) * y.den + i128(y.num) * x.den,
                 i128(x.den) * y.den);
}
inline Rat operator-(const Rat& x, const Rat& y) {
  return norm128(i128(x.num) * y.den - i128(y.num) * x.den,
                 i128(x.den) * y.den);
}
inline Rat operator*(const Rat& x, const Rat& y) {
  return norm128(i128(x.num) * y.num, i128(x.den) * y.den);
}
inline Rat operator/(const Rat& x, const Rat& y) {
  if (y.num == 0) raise(Errc::invalid_argument, "rational division by zero");
  return norm128(i128(x.num) * y.den, i128(x.den) * y.num);
}

inline i64 lcm_i64(i64 a, i64 b) {
  if (a == 0 || b == 0) return 0;
  return checked_i64(i128(a) / gcd_i64(a, b) * b);
}

}  // namespace loglin::detail

#endif  // LOGLIN_SRC_RATIONAL_HPP

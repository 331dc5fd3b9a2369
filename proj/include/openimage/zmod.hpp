// 2x2 matrices over Z/NZ.
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "openimage/numutil.hpp"

namespace openimage {

struct ZModMat {
  int64_t n = 1;             // modulus
  int64_t a = 0, b = 0, c = 0, d = 0;  // row-major, reduced to [0,n)

  ZModMat() = default;
  ZModMat(int64_t n_, int64_t a_, int64_t b_, int64_t c_, int64_t d_)
      : n(n_), a(mod_reduce(a_, n_)), b(mod_reduce(b_, n_)), c(mod_reduce(c_, n_)), d(mod_reduce(d_, n_)) {}

  static ZModMat identity(int64_t n) { return ZModMat(n, 1, 0, 0, 1); }
  static ZModMat scalar(int64_t n, int64_t s) { return ZModMat(n, s, 0, 0, s); }

  int64_t det() const { return mod_reduce(mul_mod(a, d, n) - mul_mod(b, c, n), n); }
  int64_t trace() const { return mod_reduce(a + d, n); }
  bool invertible() const { return std::gcd(det(), n) == 1; }

  ZModMat operator*(const ZModMat& o) const {
    return ZModMat(n, mul_mod(a, o.a, n) + mul_mod(b, o.c, n), mul_mod(a, o.b, n) + mul_mod(b, o.d, n),
                   mul_mod(c, o.a, n) + mul_mod(d, o.c, n), mul_mod(c, o.b, n) + mul_mod(d, o.d, n));
  }
  ZModMat inverse() const {
    int64_t di = inv_mod(det(), n);
    return ZModMat(n, mul_mod(d, di, n), mul_mod(-b, di, n), mul_mod(-c, di, n), mul_mod(a, di, n));
  }
  ZModMat transpose() const { return ZModMat(n, a, c, b, d); }
  ZModMat pow(int64_t e) const {
    if (e < 0) return inverse().pow(-e);
    ZModMat r = identity(n), base = *this;
    while (e) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }
  ZModMat reduce(int64_t m) const { return ZModMat(m, a % m, b % m, c % m, d % m); }

  bool operator==(const ZModMat& o) const {
    return n == o.n && a == o.a && b == o.b && c == o.c && d == o.d;
  }
  bool operator!=(const ZModMat& o) const { return !(*this == o); }
  bool operator<(const ZModMat& o) const {
    return std::array<int64_t, 4>{a, b, c, d} < std::array<int64_t, 4>{o.a, o.b, o.c, o.d};
  }
  bool is_scalar() const { return b == 0 && c == 0 && a == d; }

  uint64_t key() const {
    // injective for n < 2^16; callers with larger n use key128
    return ((uint64_t)a << 48) | ((uint64_t)b << 32) | ((uint64_t)c << 16) | (uint64_t)d;
  }
  unsigned __int128 key128() const {
    return ((((((unsigned __int128)a << 32) | (uint64_t)b) << 32) | (uint64_t)c) << 32) | (uint64_t)d;
  }

  std::string str() const {
    return "[" + std::to_string(a) + " " + std::to_string(b) + "; " + std::to_string(c) + " " +
           std::to_string(d) + "]";
  }
};

// Commutator x y x^-1 y^-1.
inline ZModMat commutator(const ZModMat& x, const ZModMat& y) {
  return x * y * x.inverse() * y.inverse();
}

}  // namespace openimage

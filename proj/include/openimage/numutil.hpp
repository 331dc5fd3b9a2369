// Small integer number-theory helpers shared across the library.
#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace openimage {

using Int = mpz_class;
using Rat = mpq_class;

// canonicalized rational a/b (mpq_class two-argument construction is raw)
inline Rat frac(const Int& a, const Int& b) {
  Rat r(a, b);
  r.canonicalize();
  return r;
}

inline int64_t mod_reduce(int64_t a, int64_t n) {
  int64_t r = a % n;
  return r < 0 ? r + n : r;
}

inline int64_t mul_mod(int64_t a, int64_t b, int64_t n) {
  return static_cast<int64_t>((__int128)a * b % n);
}

int64_t pow_mod(int64_t a, int64_t e, int64_t n);
int64_t inv_mod(int64_t a, int64_t n);  // throws if gcd(a,n) != 1

inline int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }
inline int64_t lcm64(int64_t a, int64_t b) { return std::lcm(a, b); }

// Euler phi, valuations, radicals; all by trial division (desk scale).
std::vector<std::pair<int64_t, int>> factorize(int64_t n, int64_t bound = 2000000);
int64_t euler_phi(int64_t n);
int64_t radical(int64_t n);
std::vector<int64_t> prime_divisors(int64_t n);
std::vector<int64_t> divisors(int64_t n);
bool is_prime(int64_t n);
std::vector<int64_t> primes_up_to(int64_t n);

// All m in [0,n) with gcd(m,n)=1.
std::vector<int64_t> units_mod(int64_t n);

// Generators of (Z/n)^x: primitive roots per odd prime power, {-1, 5} at
// powers of two, glued by CRT.
std::vector<int64_t> unit_group_generators(int64_t n);
int64_t primitive_root(int64_t q);  // q an odd prime power

// Multiplicative order of a mod n.
int64_t unit_order(int64_t a, int64_t n);

// x with x = a mod m, x = b mod n for coprime m, n.
int64_t crt(int64_t a, int64_t m, int64_t b, int64_t n);

// Kronecker symbol (a|n), defined for all integers.
int kronecker(const Int& a, const Int& n);

// Squarefree part d of a nonzero rational: r = d * square. Factors
// numerator and denominator by trial division; throws if a cofactor
// above the bound is not itself prime or a perfect square times a prime.
Int squarefree_part(const Rat& r, int64_t bound = 2000000);

Int gl2_order(int64_t n);  // |GL_2(Z/nZ)|
Int sl2_order(int64_t n);  // |SL_2(Z/nZ)|

std::string rat_str(const Rat& r);

}  // namespace openimage

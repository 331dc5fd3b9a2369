#include "openimage/numutil.hpp"

#include <algorithm>
#include <cmath>

namespace openimage {

int64_t pow_mod(int64_t a, int64_t e, int64_t n) {
  if (n == 1) return 0;
  a = mod_reduce(a, n);
  int64_t r = 1;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, a, n);
    a = mul_mod(a, a, n);
    e >>= 1;
  }
  return r;
}

int64_t inv_mod(int64_t a, int64_t n) {
  a = mod_reduce(a, n);
  int64_t t = 0, newt = 1, r = n, newr = a;
  while (newr != 0) {
    int64_t q = r / newr;
    std::swap(t -= q * newt, newt);
    std::swap(r -= q * newr, newr);
  }
  if (r != 1) throw std::domain_error("inv_mod: not a unit");
  return mod_reduce(t, n);
}

std::vector<std::pair<int64_t, int>> factorize(int64_t n, int64_t bound) {
  if (n <= 0) throw std::domain_error("factorize: need n > 0");
  std::vector<std::pair<int64_t, int>> out;
  for (int64_t p = 2; p * p <= n && p <= bound; p += (p == 2 ? 1 : 2)) {
    if (n % p == 0) {
      int e = 0;
      while (n % p == 0) n /= p, ++e;
      out.push_back({p, e});
    }
  }
  if (n > 1) {
    if (n > bound * bound && !is_prime(n))
      throw std::domain_error("factorize: cofactor exceeds trial-division bound");
    out.push_back({n, 1});
  }
  return out;
}

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2))
    if (n % p == 0) return false;
  return true;
}

std::vector<int64_t> primes_up_to(int64_t n) {
  std::vector<bool> sieve(n + 1, true);
  std::vector<int64_t> out;
  for (int64_t i = 2; i <= n; ++i) {
    if (!sieve[i]) continue;
    out.push_back(i);
    for (int64_t j = i * i; j <= n; j += i) sieve[j] = false;
  }
  return out;
}

int64_t euler_phi(int64_t n) {
  int64_t r = n;
  for (auto& [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

int64_t radical(int64_t n) {
  int64_t r = 1;
  for (auto& [p, e] : factorize(n)) r *= p;
  return r;
}

std::vector<int64_t> prime_divisors(int64_t n) {
  std::vector<int64_t> out;
  for (auto& [p, e] : factorize(n)) out.push_back(p);
  return out;
}

std::vector<int64_t> divisors(int64_t n) {
  std::vector<int64_t> out{1};
  for (auto& [p, e] : factorize(n)) {
    size_t m = out.size();
    int64_t q = 1;
    for (int i = 1; i <= e; ++i) {
      q *= p;
      for (size_t j = 0; j < m; ++j) out.push_back(out[j] * q);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int64_t> units_mod(int64_t n) {
  std::vector<int64_t> out;
  for (int64_t m = 0; m < n; ++m)
    if (std::gcd(m, n) == 1) out.push_back(m);
  if (n == 1) out = {0};
  return out;
}

int64_t unit_order(int64_t a, int64_t n) {
  a = mod_reduce(a, n);
  if (std::gcd(a, n) != 1) throw std::domain_error("unit_order: not a unit");
  int64_t x = a, o = 1;
  while (x != 1 % n) {
    x = mul_mod(x, a, n);
    ++o;
  }
  return o;
}

int64_t primitive_root(int64_t q) {
  auto f = factorize(q);
  if (f.size() != 1 || f[0].first == 2) throw std::domain_error("primitive_root: odd prime power required");
  int64_t p = f[0].first;
  int64_t g = 0;
  for (int64_t c = 2; c < p; ++c) {
    if (unit_order(c, p) == p - 1) {
      g = c;
      break;
    }
  }
  if (q == p) return g;
  // lift: g is primitive mod p^k unless g^{p-1} = 1 mod p^2
  if (pow_mod(g, p - 1, p * p) == 1) g += p;
  return g;
}

std::vector<int64_t> unit_group_generators(int64_t n) {
  if (n <= 2) return {};
  std::vector<int64_t> out;
  for (auto& [p, e] : factorize(n)) {
    int64_t q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    int64_t rest = n / q;
    std::vector<int64_t> local;
    if (p == 2) {
      if (q == 4) local = {3};
      if (q >= 8) local = {q - 1, 5};
    } else {
      local = {primitive_root(q)};
    }
    for (int64_t g : local) out.push_back(rest == 1 ? g : crt(g, q, 1, rest));
  }
  return out;
}

int64_t crt(int64_t a, int64_t m, int64_t b, int64_t n) {
  // x = a + m*t with m*t = b-a mod n
  int64_t t = mul_mod(mod_reduce(b - a, n), inv_mod(m % n, n), n);
  return a + m * t;
}

int kronecker(const Int& a, const Int& n) {
  return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

Int squarefree_part(const Rat& r, int64_t bound) {
  if (r == 0) throw std::domain_error("squarefree_part: zero input");
  Int m = r.get_num() * r.get_den();
  Int d = (m < 0) ? -1 : 1;
  m = abs(m);
  if (!m.fits_slong_p()) {
    // Strip square factors below the bound, then the rest must be square.
    for (int64_t p = 2; p <= bound; p += (p == 2 ? 1 : 2)) {
      Int p2 = Int(p) * p;
      while (mpz_divisible_p(m.get_mpz_t(), p2.get_mpz_t())) m /= p2;
      if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
        d *= p;
        m /= p;
      }
      if (m.fits_slong_p()) break;
    }
    if (!m.fits_slong_p()) {
      if (mpz_perfect_square_p(m.get_mpz_t())) return d;
      throw std::domain_error("squarefree_part: input too large to certify");
    }
  }
  for (auto& [p, e] : factorize(m.get_si(), bound))
    if (e & 1) d *= p;
  return d;
}

Int gl2_order(int64_t n) {
  // |GL2(Z/n)| = n^4 prod_{p|n} (1-1/p)(1-1/p^2) = prod p^{4e-3} (p-1)(p^2-1)
  Int r = 1;
  for (auto& [p, e] : factorize(n)) {
    Int t = 1;
    for (int i = 0; i < 4 * e - 3; ++i) t *= p;
    r *= t * (p - 1) * (p * p - 1);
  }
  return r;
}

Int sl2_order(int64_t n) {
  // |SL2(Z/n)| = n^3 prod_{p|n} (1-1/p^2)
  Int r = 1;
  for (auto& [p, e] : factorize(n)) {
    Int pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    r *= pe * pe * pe / (p * p) * (p * p - 1);
  }
  return r;
}

std::string rat_str(const Rat& r) {
  std::string s = r.get_num().get_str();
  if (r.get_den() != 1) s += "/" + r.get_den().get_str();
  return s;
}

}  // namespace openimage

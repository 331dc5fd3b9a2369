#include "openimage/ellcurve.hpp"

#include <algorithm>

namespace openimage {

EllCurveQ::EllCurveQ(Rat a1_, Rat a2_, Rat a3_, Rat a4_, Rat a6_)
    : a1(a1_), a2(a2_), a3(a3_), a4(a4_), a6(a6_) {
  b2 = a1 * a1 + 4 * a2;
  b4 = 2 * a4 + a1 * a3;
  b6 = a3 * a3 + 4 * a6;
  b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
  c4 = b2 * b2 - 24 * b4;
  c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
  disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
  if (disc == 0) throw std::domain_error("EllCurveQ: singular curve");
  j = c4 * c4 * c4 / disc;
  if (c4 * c4 * c4 - c6 * c6 != 1728 * disc)
    throw std::logic_error("EllCurveQ: invariant identity failed");
}

Int twist_discriminant(const EllCurveQ& e, const EllCurveQ& ep) {
  if (e.j != ep.j) throw std::domain_error("twist_discriminant: different j-invariants");
  if (e.j == 0 || e.j == 1728)
    throw std::domain_error("twist_discriminant: j must avoid 0 and 1728");
  // c4' = d^2 u^4 c4 and c6' = d^3 u^6 c6, so (c6'/c6)/(c4'/c4) = d u^2
  Rat t = (ep.c6 / e.c6) / (ep.c4 / e.c4);
  return squarefree_part(t);
}

EllCurveQ quadratic_twist(const EllCurveQ& e, const Int& d) {
  Rat dd(d);
  Rat A = Rat(-27) * e.c4 * dd * dd;
  Rat B = Rat(-54) * e.c6 * dd * dd * dd;
  return EllCurveQ::short_form(A, B);
}

// integral model via (u^2, u^3)-scaling
static std::array<Int, 5> integral_model(const EllCurveQ& e) {
  Int u = 1;
  for (const Rat* a : {&e.a1, &e.a2, &e.a3, &e.a4, &e.a6}) u = lcm(u, a->get_den());
  // scale a_i by u^i
  Rat A1 = e.a1 * Rat(u), A2 = e.a2 * Rat(u * u), A3 = e.a3 * Rat(u * u * u);
  Rat A4 = e.a4 * Rat(u * u * u * u), A6 = e.a6 * Rat(u * u * u * u * u * u);
  for (const Rat* a : {&A1, &A2, &A3, &A4, &A6})
    if (a->get_den() != 1) throw std::logic_error("integral_model: scaling failed");
  return {A1.get_num(), A2.get_num(), A3.get_num(), A4.get_num(), A6.get_num()};
}

std::vector<int64_t> bad_primes(const EllCurveQ& e) {
  auto m = integral_model(e);
  EllCurveQ ei{Rat(m[0]), Rat(m[1]), Rat(m[2]), Rat(m[3]), Rat(m[4])};
  Int D = ei.disc.get_num();
  std::vector<int64_t> out;
  if (!D.fits_slong_p()) {
    // factor by trial division on the magnitude
    Int a = abs(D);
    for (int64_t p = 2; Int(p) * p <= a && p < 2000000; p += (p == 2 ? 1 : 2)) {
      if (mpz_divisible_ui_p(a.get_mpz_t(), p)) {
        out.push_back(p);
        while (mpz_divisible_ui_p(a.get_mpz_t(), p)) a /= p;
      }
    }
    if (a > 1) {
      if (!a.fits_slong_p()) throw std::domain_error("bad_primes: discriminant too large to factor");
      out.push_back(a.get_si());
    }
    return out;
  }
  for (auto& [p, ex] : factorize(std::abs(D.get_si()))) out.push_back(p);
  return out;
}

int64_t ap_count(const EllCurveQ& e, int64_t p, int64_t bound) {
  if (p > bound) throw std::domain_error("ap_count: prime exceeds the configured bound");
  if (!is_prime(p)) throw std::domain_error("ap_count: p must be prime");
  auto m = integral_model(e);
  auto red = [&](const Int& x) { return (int64_t)mpz_fdiv_ui(x.get_mpz_t(), p); };
  int64_t A1 = red(m[0]), A2 = red(m[1]), A3 = red(m[2]), A4 = red(m[3]), A6 = red(m[4]);
  // good reduction check via the discriminant of the scaled model
  EllCurveQ ei{Rat(m[0]), Rat(m[1]), Rat(m[2]), Rat(m[3]), Rat(m[4])};
  if (mpz_fdiv_ui(ei.disc.get_num().get_mpz_t(), p) == 0)
    throw std::domain_error("ap_count: bad reduction at p");
  if (p <= 3) {
    int64_t count = 1;
    for (int64_t x = 0; x < p; ++x)
      for (int64_t y = 0; y < p; ++y) {
        int64_t lhs = mod_reduce(y * y + A1 * x * y + A3 * y, p);
        int64_t rhs = mod_reduce(x * x * x + A2 * x * x + A4 * x + A6, p);
        if (lhs == rhs) ++count;
      }
    return p + 1 - count;
  }
  // complete the square: y -> (y - a1 x - a3)/2; count y^2 = 4x^3+b2x^2+2b4x+b6
  int64_t B2 = mod_reduce(A1 * A1 + 4 * A2, p);
  int64_t B4 = mod_reduce(2 * A4 + A1 * A3, p);
  int64_t B6 = mod_reduce(A3 * A3 + 4 * A6, p);
  std::vector<int8_t> chi(p, -1);
  chi[0] = 0;
  for (int64_t t = 1; t < p; ++t) chi[mul_mod(t, t, p)] = 1;
  int64_t sum = 0;
  for (int64_t x = 0; x < p; ++x) {
    int64_t f = mod_reduce(4 * x % p * x % p * x + mul_mod(B2, mul_mod(x, x, p), p) +
                           mul_mod(2 * B4 % p, x, p) + B6, p);
    sum += chi[f];
  }
  // #affine = sum over x of (1 + chi(f)) = p + sum; total = p + 1 + sum
  return -sum;
}

EllCurveQ minimal_twist(const EllCurveQ& e, Int* used_d) {
  std::vector<int64_t> base = bad_primes(e);
  // candidate twists: squarefree products of current bad primes and their negatives
  std::vector<Int> cands{1, -1};
  for (size_t mask = 1; mask < ((size_t)1 << std::min<size_t>(base.size(), 10)); ++mask) {
    Int d = 1;
    for (size_t i = 0; i < base.size() && i < 10; ++i)
      if (mask & (1u << i)) d *= base[i];
    cands.push_back(d);
    cands.push_back(-d);
  }
  EllCurveQ best = e;
  Int bestd = 1;
  size_t best_count = bad_primes(e).size();
  for (const Int& d : cands) {
    EllCurveQ t = quadratic_twist(e, d);
    size_t c = bad_primes(t).size();
    if (c < best_count || (c == best_count && abs(d) < abs(bestd))) {
      best = t;
      bestd = d;
      best_count = c;
    }
  }
  if (used_d) *used_d = bestd;
  return best;
}

}  // namespace openimage

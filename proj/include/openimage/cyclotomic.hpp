// Exact arithmetic in Q(zeta_N), represented in the power basis of
// Q[x]/Phi_N(x).  Contexts (cyclotomic polynomial, reduction tables) are
// cached per N and shared; CycNum values are immutable after construction.
#pragma once

#include <memory>
#include <vector>

#include "openimage/numutil.hpp"

namespace openimage {

struct CycCtx {
  int64_t N;
  int64_t deg;                         // phi(N)
  std::vector<Int> phi_poly;           // Phi_N, monic, length deg+1
  std::vector<std::vector<Int>> xpow;  // x^k mod Phi_N for k in [0, 2deg-1)
  std::vector<int64_t> zeta_pow;       // j -> exponent row index (= j < N)

  static std::shared_ptr<const CycCtx> get(int64_t N);
};

class CycNum {
 public:
  CycNum() : CycNum(Rat(0)) {}
  explicit CycNum(const Rat& r, int64_t N = 1);
  CycNum(std::shared_ptr<const CycCtx> ctx, std::vector<Rat> coeffs);

  // zeta_N^j
  static CycNum root_of_unity(int64_t N, int64_t j);
  // Reduce sum poly[i] x^i mod Phi_N into the power basis.
  static CycNum from_poly(const std::vector<Rat>& poly, int64_t N);

  int64_t modulus() const { return ctx_->N; }
  int64_t degree() const { return ctx_->deg; }
  const std::vector<Rat>& coeffs() const { return c_; }
  const std::shared_ptr<const CycCtx>& ctx() const { return ctx_; }

  bool is_zero() const;
  bool is_rational() const;
  Rat rational_part() const;  // throws unless is_rational()

  CycNum operator-() const;
  CycNum operator+(const CycNum& o) const;
  CycNum operator-(const CycNum& o) const;
  CycNum operator*(const CycNum& o) const;
  CycNum operator*(const Rat& r) const;
  CycNum inverse() const;  // throws on zero
  CycNum operator/(const CycNum& o) const { return *this * o.inverse(); }
  bool operator==(const CycNum& o) const;
  bool operator!=(const CycNum& o) const { return !(*this == o); }

  // Galois automorphism sigma_d, zeta -> zeta^d, gcd(d,N)=1.
  CycNum galois(int64_t d) const;
  // Image under zeta_N -> zeta_M^{M/N} for N | M.
  CycNum embed(int64_t M) const;

  std::string str() const;  // "c0 + c1*z + ..."

 private:
  std::shared_ptr<const CycCtx> ctx_;
  std::vector<Rat> c_;  // length deg

  static CycNum lift_common(const CycNum& a, const CycNum& b, CycNum& bb);
};

// Cyclotomic polynomial Phi_N over Z.
std::vector<Int> cyclotomic_poly(int64_t N);

}  // namespace openimage

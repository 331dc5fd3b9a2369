// Truncated Laurent series in q_N = e^{2 pi i tau / N} with coefficients in
// Q(zeta_N).  Precision is a hard contract: coefficients are known exactly
// for all exponents n < prec and reading any other coefficient throws.
#pragma once

#include <functional>

#include "openimage/cyclotomic.hpp"

namespace openimage {

class QSeries {
 public:
  QSeries() : N_(1), low_(0), prec_(0) {}
  QSeries(int64_t N, int64_t lowDeg, int64_t prec, std::vector<CycNum> coeffs);

  static QSeries zero(int64_t N, int64_t prec) { return QSeries(N, 0, prec, {}); }
  static QSeries one(int64_t N, int64_t prec);
  static QSeries monomial(int64_t N, int64_t exp, const CycNum& c, int64_t prec);

  int64_t modulus() const { return N_; }
  int64_t low_deg() const { return low_; }
  int64_t precision() const { return prec_; }

  // Coefficient of q_N^n; throws for n >= prec.
  const CycNum& coeff(int64_t n) const;
  // Smallest exponent with nonzero known coefficient; prec if all known are 0.
  int64_t order() const;
  bool known_zero() const;  // all known coefficients vanish

  QSeries operator+(const QSeries& o) const;
  QSeries operator-(const QSeries& o) const;
  QSeries operator-() const;
  QSeries operator*(const QSeries& o) const;
  QSeries operator*(const CycNum& c) const;
  QSeries operator*(const Rat& r) const;
  // Multiplicative inverse of a series whose lowest known coefficient is
  // nonzero; throws if the leading term is unknown or zero.
  QSeries inverse() const;
  QSeries operator/(const QSeries& o) const { return *this * o.inverse(); }
  QSeries pow(int64_t e) const;

  bool operator==(const QSeries& o) const;

  // sigma_d applied to every coefficient.
  QSeries galois(int64_t d) const;
  // Reinterpret in q_M = q_N^{1/s} for M = s*N: exponents scale by s.
  QSeries rescale(int64_t M) const;
  // q_N -> zeta_N^t q_N (the substitution tau -> tau + t).
  QSeries shift_tau(int64_t t) const;
  // Keep only exponents divisible by s (and scale by mult), used for
  // width-subgroup averaging.
  QSeries project_support(int64_t s, const Rat& mult) const;
  QSeries truncate(int64_t prec) const;

  std::string str(int64_t max_terms = 12) const;

 private:
  int64_t N_;
  int64_t low_;
  int64_t prec_;
  std::vector<CycNum> c_;  // exponent low_ + i

  void normalize();
};

// Dense convolution of plain coefficient vectors; test oracle helper.
std::vector<CycNum> convolve(const std::vector<CycNum>& a, const std::vector<CycNum>& b);

}  // namespace openimage

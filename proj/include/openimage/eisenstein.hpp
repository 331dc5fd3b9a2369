// Dense power series over Z[zeta_N] with 128-bit integer coordinates in the
// power basis.  This is the workhorse for Eisenstein-series products: the
// weight-one series are integral after scaling by 2N, so all basis-algorithm
// sums stay in exact integer arithmetic and convert to Q(zeta_N) at the end.
#pragma once

#include "openimage/qseries.hpp"

namespace openimage {

using i128 = __int128;

struct ZetaRed {
  // reduction data mod Phi_N with int64 entries
  int64_t N, deg;
  std::vector<std::vector<int64_t>> xpow;  // x^k for k in [0, 2deg-1)
  static std::shared_ptr<const ZetaRed> get(int64_t N);
};

class ZetaSeries {
 public:
  ZetaSeries() = default;
  ZetaSeries(int64_t N, int64_t prec);

  int64_t modulus() const { return red_->N; }
  int64_t precision() const { return prec_; }
  i128& at(int64_t n, int64_t i) { return c_[n * red_->deg + i]; }
  const i128& at(int64_t n, int64_t i) const { return c_[n * red_->deg + i]; }

  void add_scaled(const ZetaSeries& o, i128 scale);
  // this += o * zeta^j
  void add_zeta_mult(const ZetaSeries& o, int64_t j);
  ZetaSeries mul(const ZetaSeries& o, int64_t prec_cap = -1) const;
  // keep exponents divisible by s, scaling kept ones by mult
  void project_support(int64_t s, int64_t mult);

  i128 max_abs() const;
  QSeries to_qseries(const Int& denominator) const;

 private:
  std::shared_ptr<const ZetaRed> red_;
  int64_t prec_ = 0;
  std::vector<i128> c_;
};

// (2N) . E^(1)_alpha as an integral series to the given precision.
ZetaSeries eisenstein1_scaled(int64_t N, int64_t a, int64_t b, int64_t prec);

// Exact q-expansion of E^(1)_alpha (coefficients in Q(zeta_N)).
QSeries eisenstein1_qexp(std::pair<int64_t, int64_t> alpha, int64_t N, int64_t prec);

// Integral rescaling of an exact series with low_deg >= 0: q = Z / den.
// Throws if a numerator does not fit the 128-bit budget.
std::pair<ZetaSeries, Int> zeta_scaled(const QSeries& q);

// Shared table of all scaled weight-one series at level N.
class EisTable {
 public:
  EisTable(int64_t N, int64_t prec);
  int64_t modulus() const { return N_; }
  int64_t precision() const { return prec_; }
  const ZetaSeries& series(int64_t a, int64_t b) const;

 private:
  int64_t N_, prec_;
  std::vector<ZetaSeries> tab_;
};

// Classical level-one series as exact rational q-expansions (modulus 1).
QSeries classical_E4(int64_t prec);
QSeries classical_E6(int64_t prec);
QSeries classical_Delta(int64_t prec);
QSeries classical_j(int64_t prec);        // lowDeg -1
QSeries classical_j_minus_1728(int64_t prec);

enum class ClassicalForm { E4, E6, Delta, J, Jm1728 };
QSeries classical_qexp(ClassicalForm which, int64_t prec);

}  // namespace openimage

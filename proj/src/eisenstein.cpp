#include "openimage/eisenstein.hpp"

#include <map>
#include <mutex>

namespace openimage {

std::shared_ptr<const ZetaRed> ZetaRed::get(int64_t N) {
  static std::mutex mu;
  static std::map<int64_t, std::shared_ptr<const ZetaRed>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[N];
  if (slot) return slot;
  auto ctx = CycCtx::get(N);
  auto red = std::make_shared<ZetaRed>();
  red->N = N;
  red->deg = ctx->deg;
  red->xpow.resize(ctx->xpow.size());
  for (size_t k = 0; k < ctx->xpow.size(); ++k) {
    red->xpow[k].resize(ctx->deg);
    for (int64_t i = 0; i < ctx->deg; ++i) {
      if (!ctx->xpow[k][i].fits_slong_p())
        throw std::domain_error("ZetaRed: cyclotomic reduction entry too large");
      red->xpow[k][i] = ctx->xpow[k][i].get_si();
    }
  }
  slot = red;
  return slot;
}

ZetaSeries::ZetaSeries(int64_t N, int64_t prec)
    : red_(ZetaRed::get(N)), prec_(prec), c_(prec * red_->deg, 0) {}

void ZetaSeries::add_scaled(const ZetaSeries& o, i128 scale) {
  int64_t n = std::min(prec_, o.prec_) * red_->deg;
  for (int64_t i = 0; i < n; ++i) c_[i] += scale * o.c_[i];
  if (o.prec_ < prec_) prec_ = o.prec_;
}

void ZetaSeries::add_zeta_mult(const ZetaSeries& o, int64_t j) {
  // zeta^j in the power basis
  int64_t N = red_->N, deg = red_->deg;
  j = mod_reduce(j, N);
  int64_t n = std::min(prec_, o.prec_);
  if (j < deg) {
    for (int64_t t = 0; t < n; ++t)
      for (int64_t i = 0; i < deg; ++i) {
        i128 v = o.c_[t * deg + i];
        if (v == 0) continue;
        // zeta^j * zeta^i = zeta^{i+j}, reduce via table
        int64_t e = i + j;
        if (e < deg) {
          c_[t * deg + e] += v;
        } else {
          const auto& row = red_->xpow[e];
          for (int64_t s = 0; s < deg; ++s)
            if (row[s]) c_[t * deg + s] += v * row[s];
        }
      }
  } else {
    // reduce zeta^j once, then distribute
    std::vector<int64_t> row;
    if ((size_t)j < red_->xpow.size()) {
      row = red_->xpow[j];
    } else {
      // build zeta^j by repeated multiplication by zeta
      std::vector<int64_t> cur(deg, 0);
      cur[0] = 1;
      for (int64_t t = 0; t < j; ++t) {
        std::vector<int64_t> nxt(deg, 0);
        for (int64_t i = 0; i < deg; ++i) {
          if (!cur[i]) continue;
          int64_t e = i + 1;
          if (e < deg) {
            nxt[e] += cur[i];
          } else {
            const auto& r = red_->xpow[e];
            for (int64_t s = 0; s < deg; ++s) nxt[s] += cur[i] * r[s];
          }
        }
        cur = nxt;
      }
      row = cur;
    }
    for (int64_t t = 0; t < n; ++t)
      for (int64_t i = 0; i < deg; ++i) {
        i128 v = o.c_[t * deg + i];
        if (v == 0) continue;
        for (int64_t s2 = 0; s2 < deg; ++s2) {
          if (!row[s2]) continue;
          int64_t e = i + s2;
          i128 vv = v * row[s2];
          if (e < deg) {
            c_[t * deg + e] += vv;
          } else {
            const auto& r = red_->xpow[e];
            for (int64_t s = 0; s < deg; ++s)
              if (r[s]) c_[t * deg + s] += vv * r[s];
          }
        }
      }
  }
  if (o.prec_ < prec_) prec_ = o.prec_;
}

ZetaSeries ZetaSeries::mul(const ZetaSeries& o, int64_t prec_cap) const {
  int64_t deg = red_->deg;
  int64_t prec = std::min(prec_, o.prec_);
  if (prec_cap >= 0) prec = std::min(prec, prec_cap);
  ZetaSeries out(red_->N, prec);
  std::vector<i128> tmp(2 * deg - 1);
  for (int64_t s = 0; s < prec_; ++s) {
    bool any = false;
    for (int64_t i = 0; i < deg; ++i) any = any || c_[s * deg + i] != 0;
    if (!any) continue;
    int64_t tmax = std::min(o.prec_, prec - s);
    for (int64_t t = 0; t < tmax; ++t) {
      // coefficient product into exponent s+t
      std::fill(tmp.begin(), tmp.end(), (i128)0);
      bool nz = false;
      for (int64_t i = 0; i < deg; ++i) {
        i128 a = c_[s * deg + i];
        if (a == 0) continue;
        const i128* brow = &o.c_[t * deg];
        for (int64_t j = 0; j < deg; ++j) {
          if (brow[j] == 0) continue;
          tmp[i + j] += a * brow[j];
          nz = true;
        }
      }
      if (!nz) continue;
      i128* dst = &out.c_[(s + t) * deg];
      for (int64_t e = 0; e < 2 * deg - 1; ++e) {
        if (tmp[e] == 0) continue;
        if (e < deg) {
          dst[e] += tmp[e];
        } else {
          const auto& row = red_->xpow[e];
          for (int64_t u = 0; u < deg; ++u)
            if (row[u]) dst[u] += tmp[e] * row[u];
        }
      }
    }
  }
  return out;
}

void ZetaSeries::project_support(int64_t s, int64_t mult) {
  int64_t deg = red_->deg;
  for (int64_t n = 0; n < prec_; ++n) {
    if (n % s == 0) {
      if (mult != 1)
        for (int64_t i = 0; i < deg; ++i) c_[n * deg + i] *= mult;
    } else {
      for (int64_t i = 0; i < deg; ++i) c_[n * deg + i] = 0;
    }
  }
}

i128 ZetaSeries::max_abs() const {
  i128 m = 0;
  for (auto v : c_) {
    i128 a = v < 0 ? -v : v;
    if (a > m) m = a;
  }
  return m;
}

static Rat i128_to_rat(i128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
  uint64_t hi = (uint64_t)(u >> 64), lo = (uint64_t)u;
  Int big = Int(hi);
  big <<= 64;
  big += Int(lo);
  if (neg) big = -big;
  return Rat(big);
}

QSeries ZetaSeries::to_qseries(const Int& denominator) const {
  int64_t deg = red_->deg;
  Rat den = Rat(denominator);
  std::vector<CycNum> coeffs;
  auto ctx = CycCtx::get(red_->N);
  for (int64_t n = 0; n < prec_; ++n) {
    std::vector<Rat> cc(deg);
    for (int64_t i = 0; i < deg; ++i) cc[i] = i128_to_rat(c_[n * deg + i]) / den;
    coeffs.push_back(CycNum(ctx, std::move(cc)));
  }
  return QSeries(red_->N, 0, prec_, std::move(coeffs));
}

std::pair<ZetaSeries, Int> zeta_scaled(const QSeries& q) {
  if (q.low_deg() < 0) throw std::domain_error("zeta_scaled: negative low degree");
  int64_t N = q.modulus();
  auto ctx = CycCtx::get(N);
  Int den = 1;
  for (int64_t n = q.low_deg(); n < q.precision(); ++n)
    for (const auto& x : q.coeff(n).coeffs()) den = lcm(den, x.get_den());
  ZetaSeries out(N, q.precision());
  for (int64_t n = q.low_deg(); n < q.precision(); ++n) {
    const auto& cs = q.coeff(n).coeffs();
    for (int64_t i = 0; i < ctx->deg; ++i) {
      Int v = cs[i].get_num() * (den / cs[i].get_den());
      if (mpz_sizeinbase(v.get_mpz_t(), 2) > 120)
        throw std::domain_error("zeta_scaled: coefficient exceeds the integer budget");
      bool neg = v < 0;
      Int a = abs(v);
      Int hi = a >> 64;
      uint64_t lo = mpz_get_ui(Int(a - (hi << 64)).get_mpz_t());
      i128 val = ((i128)hi.get_ui() << 64) | (i128)lo;
      out.at(n, i) = neg ? -val : val;
    }
  }
  return {out, den};
}

// ------------------------------------------------------------- E1 expansions

ZetaSeries eisenstein1_scaled(int64_t N, int64_t a, int64_t b, int64_t prec) {
  a = mod_reduce(a, N);
  b = mod_reduce(b, N);
  ZetaSeries out(N, prec);
  auto ctx = CycCtx::get(N);
  int64_t deg = ctx->deg;
  if (a == 0 && b == 0) return out;
  // constant term, scaled by 2N
  {
    std::vector<Rat> c0(deg, Rat(0));
    if (a != 0) {
      c0[0] = Rat(N - 2 * a, 1);  // 2N (1/2 - a/N)
    } else {
      // N (1+zeta^b) prod_{j != b, 1 <= j < N} (1 - zeta^j)
      CycNum prod(Rat(1), N);
      for (int64_t j = 1; j < N; ++j) {
        if (j == b) continue;
        prod = prod * (CycNum(Rat(1), N) - CycNum::root_of_unity(N, j));
      }
      CycNum v = (CycNum(Rat(1), N) + CycNum::root_of_unity(N, b)) * prod;
      for (int64_t i = 0; i < deg; ++i) c0[i] = v.coeffs()[i];
    }
    for (int64_t i = 0; i < deg; ++i) {
      if (c0[i].get_den() != 1) throw std::logic_error("eisenstein1_scaled: non-integral constant");
      if (!c0[i].get_num().fits_slong_p())
        throw std::domain_error("eisenstein1_scaled: constant term overflow");
      out.at(0, i) = c0[i].get_num().get_si();
    }
  }
  // 2N * (sum_{m = a mod N} zeta^{bn} q^{mn} + (-1) sum_{m = -a mod N} zeta^{-bn} q^{mn})
  auto zeta_row = [&](int64_t e) {
    e = mod_reduce(e, N);
    std::vector<int64_t> row(deg, 0);
    if (e < deg) {
      row[e] = 1;
    } else {
      const auto& ctxrow = ctx->xpow[e];
      for (int64_t i = 0; i < deg; ++i) {
        if (!ctxrow[i].fits_slong_p()) throw std::domain_error("eisenstein1_scaled: row overflow");
        row[i] = ctxrow[i].get_si();
      }
    }
    return row;
  };
  for (int64_t m = (a == 0 ? N : a); m < prec; m += N)
    for (int64_t n = 1; m * n < prec; ++n) {
      auto row = zeta_row(b * n);
      for (int64_t i = 0; i < deg; ++i) out.at(m * n, i) += (i128)2 * N * row[i];
    }
  int64_t am = mod_reduce(-a, N);
  for (int64_t m = (am == 0 ? N : am); m < prec; m += N)
    for (int64_t n = 1; m * n < prec; ++n) {
      auto row = zeta_row(-b * n);
      for (int64_t i = 0; i < deg; ++i) out.at(m * n, i) -= (i128)2 * N * row[i];
    }
  return out;
}

QSeries eisenstein1_qexp(std::pair<int64_t, int64_t> alpha, int64_t N, int64_t prec) {
  return eisenstein1_scaled(N, alpha.first, alpha.second, prec).to_qseries(Int(2 * N));
}

EisTable::EisTable(int64_t N, int64_t prec) : N_(N), prec_(prec), tab_(N * N) {
  for (int64_t a = 0; a < N; ++a)
    for (int64_t b = 0; b < N; ++b) {
      if (a == 0 && b == 0) {
        tab_[0] = ZetaSeries(N, prec);
        continue;
      }
      tab_[a * N + b] = eisenstein1_scaled(N, a, b, prec);
    }
}

const ZetaSeries& EisTable::series(int64_t a, int64_t b) const {
  return tab_[mod_reduce(a, N_) * N_ + mod_reduce(b, N_)];
}

// --------------------------------------------------------- classical series

static CycNum cyc1(const Rat& r) { return CycNum(r, 1); }

QSeries classical_E4(int64_t prec) {
  std::vector<CycNum> c(prec, cyc1(Rat(0)));
  c[0] = cyc1(Rat(1));
  for (int64_t n = 1; n < prec; ++n) {
    Int s = 0;
    for (int64_t d = 1; d <= n; ++d)
      if (n % d == 0) s += Int(d) * d * d;
    c[n] = cyc1(Rat(240 * s));
  }
  return QSeries(1, 0, prec, std::move(c));
}

QSeries classical_E6(int64_t prec) {
  std::vector<CycNum> c(prec, cyc1(Rat(0)));
  c[0] = cyc1(Rat(1));
  for (int64_t n = 1; n < prec; ++n) {
    Int s = 0;
    for (int64_t d = 1; d <= n; ++d)
      if (n % d == 0) s += Int(d) * d * d * d * d;
    c[n] = cyc1(Rat(-504 * s));
  }
  return QSeries(1, 0, prec, std::move(c));
}

QSeries classical_Delta(int64_t prec) {
  // q prod (1-q^n)^24 via the pentagonal number recurrence for prod(1-q^n)
  std::vector<Rat> eta(prec, Rat(0));
  eta[0] = 1;
  for (int64_t k = 1;; ++k) {
    int64_t g1 = k * (3 * k - 1) / 2, g2 = k * (3 * k + 1) / 2;
    if (g1 >= prec && g2 >= prec) break;
    Rat sign = (k % 2 == 0) ? Rat(1) : Rat(-1);
    if (g1 < prec) eta[g1] += sign;
    if (g2 < prec) eta[g2] += sign;
  }
  // this produced the series coefficients of prod(1-q^n)? use the recurrence:
  // prod_{n>=1}(1-q^n) = sum_k (-1)^k q^{k(3k±1)/2}
  std::vector<CycNum> e(prec, cyc1(Rat(0)));
  for (int64_t n = 0; n < prec; ++n) e[n] = cyc1(eta[n]);
  QSeries etaq(1, 0, prec, std::move(e));
  QSeries p = etaq;
  for (int i = 1; i < 24; ++i) p = p * etaq;
  return QSeries::monomial(1, 1, cyc1(Rat(1)), prec + 1).truncate(prec) * p;
}

QSeries classical_j(int64_t prec) {
  // j = E4^3 / Delta; Delta has lowDeg 1, so compute with enough slack
  int64_t p = prec + 2;
  QSeries e4 = classical_E4(p);
  QSeries delta = classical_Delta(p);
  return (e4 * e4 * e4) * delta.inverse();
}

QSeries classical_j_minus_1728(int64_t prec) {
  int64_t p = prec + 2;
  QSeries e6 = classical_E6(p);
  QSeries delta = classical_Delta(p);
  return (e6 * e6) * delta.inverse();
}

QSeries classical_qexp(ClassicalForm which, int64_t prec) {
  switch (which) {
    case ClassicalForm::E4: return classical_E4(prec);
    case ClassicalForm::E6: return classical_E6(prec);
    case ClassicalForm::Delta: return classical_Delta(prec);
    case ClassicalForm::J: return classical_j(prec);
    case ClassicalForm::Jm1728: return classical_j_minus_1728(prec);
  }
  throw std::logic_error("classical_qexp: unknown form");
}

}  // namespace openimage

#include "openimage/cyclotomic.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace openimage {

std::vector<Int> cyclotomic_poly(int64_t N) {
  // x^N - 1 = prod_{d|N} Phi_d; divide out the proper divisors.
  std::vector<Int> num(N + 1, 0);
  num[0] = -1;
  num[N] = 1;
  for (int64_t d : divisors(N)) {
    if (d == N) continue;
    std::vector<Int> q = cyclotomic_poly(d);
    // exact division num /= q
    std::vector<Int> res(num.size() - q.size() + 1, 0);
    std::vector<Int> rem = num;
    for (int64_t i = res.size() - 1; i >= 0; --i) {
      Int c = rem[i + q.size() - 1];  // q is monic
      res[i] = c;
      if (c != 0)
        for (size_t j = 0; j < q.size(); ++j) rem[i + j] -= c * q[j];
    }
    num = res;
  }
  return num;
}

std::shared_ptr<const CycCtx> CycCtx::get(int64_t N) {
  static std::mutex mu;
  static std::map<int64_t, std::shared_ptr<const CycCtx>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;

  auto ctx = std::make_shared<CycCtx>();
  ctx->N = N;
  ctx->phi_poly = cyclotomic_poly(N);
  int64_t d = ctx->deg = (int64_t)ctx->phi_poly.size() - 1;
  // x^k mod Phi for k < max(2d-1, N): products of reduced elements need
  // 2d-2, single roots of unity need up to N-1.
  ctx->xpow.resize(std::max<int64_t>({2 * d - 1, d + 1, N}));
  for (int64_t k = 0; k < (int64_t)ctx->xpow.size(); ++k) {
    std::vector<Int>& row = ctx->xpow[k];
    row.assign(d, 0);
    if (k < d) {
      row[k] = 1;
    } else {
      // x^k = x * x^{k-1} reduced
      const std::vector<Int>& prev = ctx->xpow[k - 1];
      std::vector<Int> tmp(d + 1, 0);
      for (int64_t i = 0; i < d; ++i) tmp[i + 1] = prev[i];
      Int lead = tmp[d];
      for (int64_t i = 0; i < d; ++i) row[i] = tmp[i] - lead * ctx->phi_poly[i];
    }
  }
  cache[N] = ctx;
  return ctx;
}

CycNum::CycNum(const Rat& r, int64_t N) : ctx_(CycCtx::get(N)), c_(ctx_->deg, Rat(0)) {
  c_[0] = r;
}

CycNum::CycNum(std::shared_ptr<const CycCtx> ctx, std::vector<Rat> coeffs)
    : ctx_(std::move(ctx)), c_(std::move(coeffs)) {
  if ((int64_t)c_.size() != ctx_->deg) throw std::logic_error("CycNum: bad coefficient length");
}

CycNum CycNum::root_of_unity(int64_t N, int64_t j) {
  std::vector<Rat> poly(mod_reduce(j, N) + 1, Rat(0));
  poly.back() = 1;
  return from_poly(poly, N);
}

CycNum CycNum::from_poly(const std::vector<Rat>& poly, int64_t N) {
  auto ctx = CycCtx::get(N);
  int64_t d = ctx->deg;
  std::vector<Rat> out(d, Rat(0));
  // Reduce exponents >= N via x^N = 1 first, then the table rows.
  std::vector<Rat> byexp(N, Rat(0));
  for (size_t i = 0; i < poly.size(); ++i) byexp[i % N] += poly[i];
  for (int64_t e = 0; e < N; ++e) {
    if (byexp[e] == 0) continue;
    if (e < d) {
      out[e] += byexp[e];
    } else {
      // need x^e mod Phi; table holds < 2d-1, extend by repeated folding
      std::vector<Int> row(d, 0);
      if (e < (int64_t)ctx->xpow.size()) {
        row = ctx->xpow[e];
      } else {
        // compute on the fly: start from highest table row and multiply by x
        row = ctx->xpow.back();
        for (int64_t k = (int64_t)ctx->xpow.size() - 1; k < e; ++k) {
          std::vector<Int> tmp(d + 1, 0);
          for (int64_t i = 0; i < d; ++i) tmp[i + 1] = row[i];
          Int lead = tmp[d];
          for (int64_t i = 0; i < d; ++i) row[i] = tmp[i] - lead * ctx->phi_poly[i];
        }
      }
      for (int64_t i = 0; i < d; ++i)
        if (row[i] != 0) out[i] += byexp[e] * Rat(row[i]);
    }
  }
  return CycNum(ctx, std::move(out));
}

bool CycNum::is_zero() const {
  for (auto& x : c_)
    if (x != 0) return false;
  return true;
}

bool CycNum::is_rational() const {
  for (size_t i = 1; i < c_.size(); ++i)
    if (c_[i] != 0) return false;
  return true;
}

Rat CycNum::rational_part() const {
  if (!is_rational()) throw std::domain_error("CycNum: not rational");
  return c_[0];
}

CycNum CycNum::operator-() const {
  std::vector<Rat> out(c_);
  for (auto& x : out) x = -x;
  return CycNum(ctx_, std::move(out));
}

CycNum CycNum::lift_common(const CycNum& a, const CycNum& b, CycNum& bb) {
  if (a.modulus() == b.modulus()) {
    bb = b;
    return a;
  }
  int64_t M = lcm64(a.modulus(), b.modulus());
  bb = b.embed(M);
  return a.embed(M);
}

CycNum CycNum::operator+(const CycNum& o) const {
  CycNum b;
  CycNum a = lift_common(*this, o, b);
  std::vector<Rat> out(a.c_);
  for (size_t i = 0; i < out.size(); ++i) out[i] += b.c_[i];
  return CycNum(a.ctx_, std::move(out));
}

CycNum CycNum::operator-(const CycNum& o) const { return *this + (-o); }

CycNum CycNum::operator*(const CycNum& o) const {
  CycNum b;
  CycNum a = lift_common(*this, o, b);
  int64_t d = a.ctx_->deg;
  std::vector<Rat> prod(2 * d - 1, Rat(0));
  for (int64_t i = 0; i < d; ++i) {
    if (a.c_[i] == 0) continue;
    for (int64_t j = 0; j < d; ++j) {
      if (b.c_[j] == 0) continue;
      prod[i + j] += a.c_[i] * b.c_[j];
    }
  }
  std::vector<Rat> out(d, Rat(0));
  for (int64_t k = 0; k < 2 * d - 1; ++k) {
    if (prod[k] == 0) continue;
    if (k < d) {
      out[k] += prod[k];
    } else {
      const std::vector<Int>& row = a.ctx_->xpow[k];
      for (int64_t i = 0; i < d; ++i)
        if (row[i] != 0) out[i] += prod[k] * Rat(row[i]);
    }
  }
  return CycNum(a.ctx_, std::move(out));
}

CycNum CycNum::operator*(const Rat& r) const {
  std::vector<Rat> out(c_);
  for (auto& x : out) x *= r;
  return CycNum(ctx_, std::move(out));
}

CycNum CycNum::inverse() const {
  if (is_zero()) throw std::domain_error("CycNum: inverse of zero");
  // Extended Euclid in Q[x] between Phi_N and this.
  int64_t d = ctx_->deg;
  std::vector<Rat> r0(ctx_->phi_poly.size()), r1(c_.size());
  for (size_t i = 0; i < r0.size(); ++i) r0[i] = Rat(ctx_->phi_poly[i]);
  r1 = c_;
  auto deg_of = [](const std::vector<Rat>& p) {
    for (int64_t i = (int64_t)p.size() - 1; i >= 0; --i)
      if (p[i] != 0) return i;
    return (int64_t)-1;
  };
  std::vector<Rat> s0{Rat(0)}, s1{Rat(1)};  // coefficients on *this
  while (true) {
    int64_t d1 = deg_of(r1);
    if (d1 < 0) throw std::logic_error("CycNum: gcd with Phi_N nontrivial");
    if (d1 == 0) break;
    int64_t d0 = deg_of(r0);
    // r0 -= (lead0/lead1) x^{d0-d1} r1, same on s
    Rat q = r0[d0] / r1[d1];
    int64_t sh = d0 - d1;
    if ((int64_t)r0.size() < d1 + sh + 1) r0.resize(d1 + sh + 1, Rat(0));
    for (int64_t i = 0; i <= d1; ++i) r0[i + sh] -= q * r1[i];
    if (s0.size() < s1.size() + sh) s0.resize(s1.size() + sh, Rat(0));
    for (size_t i = 0; i < s1.size(); ++i) s0[i + sh] -= q * s1[i];
    if (deg_of(r0) < d1) {
      std::swap(r0, r1);
      std::swap(s0, s1);
    }
  }
  Rat lead = r1[0];
  std::vector<Rat> out(d, Rat(0));
  for (size_t i = 0; i < s1.size() && i < (size_t)d; ++i) out[i] = s1[i] / lead;
  // s1 may have degree >= d in exotic cases; fold just in case.
  if (s1.size() > (size_t)d) {
    std::vector<Rat> poly(s1.size());
    for (size_t i = 0; i < s1.size(); ++i) poly[i] = s1[i] / lead;
    return from_poly(poly, ctx_->N);
  }
  return CycNum(ctx_, std::move(out));
}

bool CycNum::operator==(const CycNum& o) const {
  CycNum b;
  CycNum a = lift_common(*this, o, b);
  return a.c_ == b.c_;
}

CycNum CycNum::galois(int64_t d) const {
  int64_t N = ctx_->N;
  if (std::gcd(mod_reduce(d, N), N) != 1) throw std::domain_error("galois: d not a unit mod N");
  std::vector<Rat> poly(N, Rat(0));
  for (int64_t i = 0; i < ctx_->deg; ++i)
    if (c_[i] != 0) poly[mod_reduce(i * d, N)] += c_[i];
  return from_poly(poly, N);
}

CycNum CycNum::embed(int64_t M) const {
  int64_t N = ctx_->N;
  if (M % N != 0) throw std::domain_error("embed: N does not divide M");
  if (M == N) return *this;
  int64_t s = M / N;
  std::vector<Rat> poly(M, Rat(0));
  for (int64_t i = 0; i < ctx_->deg; ++i)
    if (c_[i] != 0) poly[i * s] += c_[i];
  return from_poly(poly, M);
}

std::string CycNum::str() const {
  std::ostringstream os;
  bool first = true;
  for (int64_t i = 0; i < ctx_->deg; ++i) {
    if (c_[i] == 0) continue;
    if (!first) os << " + ";
    os << rat_str(c_[i]);
    if (i == 1) os << "*z";
    if (i > 1) os << "*z^" << i;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace openimage

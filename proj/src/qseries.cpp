#include "openimage/qseries.hpp"

#include <sstream>

namespace openimage {

QSeries::QSeries(int64_t N, int64_t lowDeg, int64_t prec, std::vector<CycNum> coeffs)
    : N_(N), low_(lowDeg), prec_(prec), c_(std::move(coeffs)) {
  if ((int64_t)c_.size() > prec_ - low_) throw std::logic_error("QSeries: too many coefficients");
  for (auto& x : c_)
    if (x.modulus() != N_) x = x.embed(N_);
  normalize();
}

void QSeries::normalize() {
  if (prec_ < low_) prec_ = low_;
  c_.resize(std::max<int64_t>(prec_ - low_, 0), CycNum(Rat(0), N_));
  // trim leading zeros to keep low_ tight (cheap, keeps mult costs down)
  int64_t k = 0;
  while (k < (int64_t)c_.size() && c_[k].is_zero()) ++k;
  if (k > 0) {
    c_.erase(c_.begin(), c_.begin() + k);
    low_ += k;
  }
}

QSeries QSeries::one(int64_t N, int64_t prec) {
  return monomial(N, 0, CycNum(Rat(1), N), prec);
}

QSeries QSeries::monomial(int64_t N, int64_t exp, const CycNum& c, int64_t prec) {
  std::vector<CycNum> v;
  if (exp < prec) v.push_back(c);
  return QSeries(N, exp, prec, std::move(v));
}

const CycNum& QSeries::coeff(int64_t n) const {
  if (n >= prec_) throw std::domain_error("QSeries: coefficient beyond precision");
  static const CycNum zero_small = CycNum(Rat(0), 1);
  static thread_local CycNum zero_cache;
  if (n < low_) {
    zero_cache = CycNum(Rat(0), N_);
    return zero_cache;
  }
  return c_[n - low_];
}

int64_t QSeries::order() const {
  for (int64_t i = 0; i < (int64_t)c_.size(); ++i)
    if (!c_[i].is_zero()) return low_ + i;
  return prec_;
}

bool QSeries::known_zero() const { return order() == prec_; }

QSeries QSeries::operator+(const QSeries& o) const {
  if (N_ != o.N_) throw std::domain_error("QSeries: modulus mismatch");
  int64_t low = std::min(low_, o.low_);
  int64_t prec = std::min(prec_, o.prec_);
  std::vector<CycNum> out(std::max<int64_t>(prec - low, 0), CycNum(Rat(0), N_));
  for (int64_t n = low; n < prec; ++n) {
    CycNum v = CycNum(Rat(0), N_);
    if (n >= low_ && n - low_ < (int64_t)c_.size()) v = v + c_[n - low_];
    if (n >= o.low_ && n - o.low_ < (int64_t)o.c_.size()) v = v + o.c_[n - o.low_];
    out[n - low] = v;
  }
  return QSeries(N_, low, prec, std::move(out));
}

QSeries QSeries::operator-() const {
  std::vector<CycNum> out(c_);
  for (auto& x : out) x = -x;
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::operator-(const QSeries& o) const { return *this + (-o); }

QSeries QSeries::operator*(const QSeries& o) const {
  if (N_ != o.N_) throw std::domain_error("QSeries: modulus mismatch");
  // result coefficient at n needs all splits n = i + j with i,j known:
  // known for n < min(prec_a + low_b, prec_b + low_a).
  int64_t low = low_ + o.low_;
  int64_t prec = std::min(prec_ + o.low_, o.prec_ + low_);
  int64_t len = std::max<int64_t>(prec - low, 0);
  std::vector<CycNum> out(len, CycNum(Rat(0), N_));
  for (int64_t i = 0; i < (int64_t)c_.size(); ++i) {
    if (c_[i].is_zero()) continue;
    for (int64_t j = 0; j < (int64_t)o.c_.size(); ++j) {
      int64_t k = i + j;
      if (k >= len) break;
      if (o.c_[j].is_zero()) continue;
      out[k] = out[k] + c_[i] * o.c_[j];
    }
  }
  return QSeries(N_, low, prec, std::move(out));
}

QSeries QSeries::operator*(const CycNum& cc) const {
  CycNum c = cc.modulus() == N_ ? cc : cc.embed(N_);
  std::vector<CycNum> out(c_);
  for (auto& x : out) x = x * c;
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::operator*(const Rat& r) const {
  std::vector<CycNum> out(c_);
  for (auto& x : out) x = x * r;
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::inverse() const {
  if (prec_ <= low_ || c_.empty())
    throw std::domain_error("QSeries: inverting a series with unknown leading term");
  if (c_[0].is_zero()) throw std::domain_error("QSeries: leading coefficient is zero");
  int64_t L = prec_ - low_;  // known length
  // (q^low * u)^{-1} = q^{-low} u^{-1}; u^{-1} known to the same length.
  CycNum lead_inv = c_[0].inverse();
  std::vector<CycNum> out(L, CycNum(Rat(0), N_));
  out[0] = lead_inv;
  for (int64_t n = 1; n < L; ++n) {
    CycNum s = CycNum(Rat(0), N_);
    for (int64_t k = 1; k <= n; ++k) {
      if (k < (int64_t)c_.size() && !c_[k].is_zero() && !out[n - k].is_zero())
        s = s + c_[k] * out[n - k];
    }
    out[n] = -(s * lead_inv);
  }
  return QSeries(N_, -low_, -low_ + L, std::move(out));
}

QSeries QSeries::pow(int64_t e) const {
  if (e < 0) return inverse().pow(-e);
  if (e == 0) return QSeries::one(N_, prec_ - low_);
  QSeries acc = *this;
  for (int64_t i = 1; i < e; ++i) acc = acc * *this;
  return acc;
}

bool QSeries::operator==(const QSeries& o) const {
  int64_t prec = std::min(prec_, o.prec_);
  int64_t low = std::min(low_, o.low_);
  for (int64_t n = low; n < prec; ++n) {
    CycNum a = (n >= low_ && n - low_ < (int64_t)c_.size()) ? c_[n - low_] : CycNum(Rat(0), N_);
    CycNum b = (n >= o.low_ && n - o.low_ < (int64_t)o.c_.size()) ? o.c_[n - o.low_] : CycNum(Rat(0), N_);
    if (!(a == b)) return false;
  }
  return true;
}

QSeries QSeries::galois(int64_t d) const {
  std::vector<CycNum> out(c_);
  for (auto& x : out) x = x.galois(d);
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::rescale(int64_t M) const {
  if (M % N_ != 0) throw std::domain_error("rescale: N must divide M");
  int64_t s = M / N_;
  std::vector<CycNum> out((prec_ - low_ - 1) * s + 1, CycNum(Rat(0), M));
  if (prec_ <= low_) out.clear();
  for (int64_t i = 0; i < (int64_t)c_.size(); ++i) out[i * s] = c_[i].embed(M);
  // q_N^n known for n < prec  <=>  q_M^{sn} known; between multiples of s
  // coefficients are genuinely zero, so precision extends to s*(prec-1)+1.
  return QSeries(M, low_ * s, (prec_ - 1) * s + 1, std::move(out));
}

QSeries QSeries::shift_tau(int64_t t) const {
  std::vector<CycNum> out(c_);
  for (int64_t i = 0; i < (int64_t)out.size(); ++i)
    out[i] = out[i] * CycNum::root_of_unity(N_, mod_reduce((low_ + i) * t, N_));
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::project_support(int64_t s, const Rat& mult) const {
  std::vector<CycNum> out(c_);
  for (int64_t i = 0; i < (int64_t)out.size(); ++i) {
    if (mod_reduce(low_ + i, s) != 0)
      out[i] = CycNum(Rat(0), N_);
    else
      out[i] = out[i] * mult;
  }
  return QSeries(N_, low_, prec_, std::move(out));
}

QSeries QSeries::truncate(int64_t prec) const {
  if (prec >= prec_) return *this;
  if (prec <= low_) return QSeries(N_, prec, prec, {});
  std::vector<CycNum> out;
  for (int64_t n = low_; n < prec; ++n)
    if (n - low_ < (int64_t)c_.size()) out.push_back(c_[n - low_]);
  return QSeries(N_, low_, prec, std::move(out));
}

std::string QSeries::str(int64_t max_terms) const {
  std::ostringstream os;
  int64_t shown = 0;
  for (int64_t n = low_; n < prec_ && shown < max_terms; ++n) {
    const CycNum& v = c_[n - low_];
    if (v.is_zero()) continue;
    if (shown) os << " + ";
    os << "(" << v.str() << ")*q^" << n;
    ++shown;
  }
  if (!shown) os << "0";
  os << " + O(q_" << N_ << "^" << prec_ << ")";
  return os.str();
}

std::vector<CycNum> convolve(const std::vector<CycNum>& a, const std::vector<CycNum>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<CycNum> out(a.size() + b.size() - 1, CycNum(Rat(0), std::max(a[0].modulus(), b[0].modulus())));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] = out[i + j] + a[i] * b[j];
  return out;
}

}  // namespace openimage

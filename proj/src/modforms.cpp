#include "openimage/modforms.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <cmath>
#include <sstream>

namespace openimage {

EisMonomial EisMonomial::acted_by(const ZModMat& A) const {
  EisMonomial out = *this;
  for (auto& [a, b] : out.alphas) {
    int64_t na = mod_reduce(a * A.a + b * A.c, N);
    int64_t nb = mod_reduce(a * A.b + b * A.d, N);
    a = na;
    b = nb;
  }
  // the zeta^{j det g} weight picks up det(A) when summing over gA
  out.j = mod_reduce(j * inv_mod(A.det(), N), N);
  return out;
}

std::string EisMonomial::str() const {
  std::ostringstream os;
  os << "j=" << j << " [";
  for (auto& [a, b] : alphas) os << "(" << a << "," << b << ")";
  os << "]";
  return os.str();
}

int64_t mf_dimension(const FinSubgroup& G, int64_t k) {
  if (k < 0) return 0;
  if (k == 0) return 1;
  if (k == 1) throw std::domain_error("mf_dimension: weight 1 unsupported");
  bool minus = G.contains(ZModMat::scalar(G.modulus(), G.modulus() - 1));
  if (k % 2 == 1 && minus) return 0;
  CuspStructure cs(G);
  const GammaData& d = cs.gamma();
  Rat dim = Rat(k - 1) * Rat(d.genus - 1) + Rat(d.v2) * Rat(k / 4) + Rat(d.v3) * Rat(k / 3);
  if (k % 2 == 0) {
    dim += frac(k, 2) * Rat(d.cusp_count);
  } else {
    int64_t reg = 0, irr = 0;
    for (auto& c : cs.cusps()) (c.regular ? reg : irr) += 1;
    if (d.v2 != 0) throw std::logic_error("mf_dimension: order-2 elliptic points without -I");
    dim += frac(k, 2) * Rat(reg) + frac(k - 1, 2) * Rat(irr);
  }
  dim.canonicalize();
  if (dim.get_den() != 1) throw std::logic_error("mf_dimension: non-integral dimension");
  int64_t v = dim.get_num().get_si();
  return std::max<int64_t>(v, 0);
}

SturmData sturm_bound(const CuspStructure& cs, int64_t k, bool minus_in_g) {
  const GammaData& d = cs.gamma();
  int64_t N = cs.modulus();
  SturmData out;
  out.B = frac(k, 2) * Rat(2 * d.genus - 2) + frac(k, 2) * Rat(d.cusp_count) +
          Rat(k / 4) * Rat(d.v2) + Rat(k / 3) * Rat(d.v3);
  if (k % 2 == 0 && minus_in_g) {
    // smallest integer with b > B N / [SL2(Z) : Gamma_G]
    Rat bound = out.B * Rat(N) / Rat(d.index);
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), bound.get_num().get_mpz_t(), bound.get_den().get_mpz_t());
    out.b = fl.get_si() + 1;
  } else {
    // valence inequality: any b > k N / 12 pins the form
    out.b = k * N / 12 + 1;
  }
  for (auto& c : cs.cusps()) {
    int64_t mi = (c.width * out.b + N - 1) / N;
    out.m.push_back(mi);
    out.total += mi;
  }
  return out;
}

ModularFormSpace::ModularFormSpace(FinSubgroup G, int64_t k) : G_(std::move(G)), k_(k) {
  // pad N <= 2 up to modulus 4 (the space is unchanged)
  if (G_.modulus() <= 2) G_ = OpenSubgroup(Ambient::GL2, G_).image_mod(4);
  N_ = G_.modulus();
  minus_in_g_ = G_.contains(ZModMat::scalar(N_, N_ - 1));
  if (k_ < 2) throw std::domain_error("ModularFormSpace: weight must be at least 2");
  if (k_ % 2 == 0 && !minus_in_g_)
    G_ = G_.joined_with({ZModMat::scalar(N_, N_ - 1)});  // even weight only sees +-G
  if (k_ % 2 == 1 && minus_in_g_)
    throw std::domain_error("ModularFormSpace: odd weight with -I in G is zero");
  minus_in_g_ = G_.contains(ZModMat::scalar(N_, N_ - 1));
  cs_ = std::make_shared<CuspStructure>(G_);
  dim_ = mf_dimension(G_, k_);
  sturm_ = sturm_bound(*cs_, k_, minus_in_g_);
}

int64_t ModForm::weight() const { return space->weight(); }

ModForm ModForm::operator*(const Rat& c) const {
  ModForm out = *this;
  for (auto& e : out.expansions) e = e * c;
  for (auto& [r, m] : out.provenance) r *= c;
  return out;
}

ModForm ModForm::operator+(const ModForm& o) const {
  ModForm out = *this;
  for (size_t i = 0; i < out.expansions.size(); ++i) out.expansions[i] = out.expansions[i] + o.expansions[i];
  out.provenance.insert(out.provenance.end(), o.provenance.begin(), o.provenance.end());
  return out;
}

struct ModularFormSpace::EvalPlan {
  int64_t prec;
  std::unique_ptr<EisTable> table;
  std::vector<std::pair<int64_t, ZModMat>> reps;  // (det, coset rep) for G/H
  std::vector<ZModMat> hconj_per_cusp_done;       // placeholder
  std::vector<std::vector<ZModMat>> hconj;        // per cusp: A_i^{-1} H A_i elements
  std::vector<ZModMat> Ai;                        // cusp representatives mod N
};

std::shared_ptr<ModularFormSpace::EvalPlan> ModularFormSpace::plan(int64_t prec) const {
  std::lock_guard<std::mutex> lock(plan_mu_);
  if (plan_ && plan_->prec >= prec) return plan_;
  auto p = std::make_shared<EvalPlan>();
  p->prec = prec;
  p->table = std::make_unique<EisTable>(N_, prec);
  p->reps = G_.det_transversal();
  const auto& H = cs_->sl2_part();
  const auto& helts = H.elements();
  for (auto& c : cs_->cusps()) {
    ZModMat A(N_, c.lift[0], c.lift[1], c.lift[2], c.lift[3]);
    p->Ai.push_back(A);
    ZModMat Ainv = A.inverse();
    std::vector<ZModMat> conj;
    conj.reserve(helts.size());
    for (auto& h : helts) conj.push_back(Ainv * h * A);
    p->hconj.push_back(std::move(conj));
  }
  plan_ = p;
  return p;
}

// encode a k-tuple of index vectors as a dedup key
static uint64_t tuple_key(const std::vector<std::pair<int64_t, int64_t>>& v, int64_t N) {
  uint64_t key = 1469598103934665603ull;
  for (auto& [a, b] : v) {
    key ^= (uint64_t)(a * N + b + 1);
    key *= 1099511628211ull;
  }
  return key;
}

// inner width-averaged sums per (cusp, coset rep); shared by all j-twists
std::vector<std::vector<ZetaSeries>> ModularFormSpace::inner_sums(
    const std::vector<std::pair<int64_t, int64_t>>& alphas, int64_t prec) const {
  auto p = plan(prec);
  std::vector<std::vector<ZetaSeries>> inners(cs_->cusps().size());
  for (size_t ci = 0; ci < cs_->cusps().size(); ++ci) {
    int64_t w = cs_->cusps()[ci].width;
    int64_t step = N_ / w;
    for (auto& [detv, grep] : p->reps) {
      (void)detv;
      ZModMat M0 = grep * p->Ai[ci];
      std::vector<std::pair<int64_t, int64_t>> base(alphas.size());
      for (size_t t = 0; t < alphas.size(); ++t) {
        auto [a, b] = alphas[t];
        base[t] = {mod_reduce(a * M0.a + b * M0.c, N_), mod_reduce(a * M0.b + b * M0.d, N_)};
      }
      ZetaSeries inner(N_, prec);
      // one representative per right coset h' U_i of the width subgroup
      std::set<unsigned __int128> seen;
      std::vector<std::pair<int64_t, int64_t>> v(alphas.size());
      for (const auto& h : p->hconj[ci]) {
        unsigned __int128 canon = ~(unsigned __int128)0;
        for (int64_t s = 0; s < step; ++s) {
          // h * T^{s w}: adds s*w*col1 to col2
          ZModMat m(N_, h.a, h.b + h.a * s * w, h.c, h.d + h.c * s * w);
          canon = std::min(canon, m.key128());
        }
        if (!seen.insert(canon).second) continue;
        for (size_t t = 0; t < base.size(); ++t) {
          auto [a, b] = base[t];
          v[t] = {mod_reduce(a * h.a + b * h.c, N_), mod_reduce(a * h.b + b * h.d, N_)};
        }
        ZetaSeries prod = p->table->series(v[0].first, v[0].second);
        for (size_t t = 1; t < v.size(); ++t)
          prod = prod.mul(p->table->series(v[t].first, v[t].second), prec);
        inner.add_scaled(prod, 1);
      }
      inner.project_support(step, step);
      inners[ci].push_back(std::move(inner));
    }
  }
  return inners;
}

std::vector<QSeries> ModularFormSpace::assemble_j(
    const std::vector<std::vector<ZetaSeries>>& inners, int64_t j, int64_t prec) const {
  auto p = plan(prec);
  Int den = 1;
  for (int64_t t = 0; t < k_; ++t) den *= 2 * N_;
  std::vector<QSeries> out;
  for (size_t ci = 0; ci < inners.size(); ++ci) {
    ZetaSeries acc(N_, prec);
    for (size_t ri = 0; ri < p->reps.size(); ++ri)
      acc.add_zeta_mult(inners[ci][ri], mod_reduce(j * p->reps[ri].first, N_));
    out.push_back(acc.to_qseries(den));
  }
  return out;
}

std::vector<QSeries> ModularFormSpace::monomial_expansions(const EisMonomial& mono,
                                                           int64_t prec) const {
  auto inners = inner_sums(mono.alphas, prec);
  return assemble_j(inners, mono.j, prec);
}

QVec ModularFormSpace::phi_vector(const std::vector<QSeries>& expansions) const {
  QVec out;
  auto ctx = CycCtx::get(N_);
  for (size_t ci = 0; ci < cs_->cusps().size(); ++ci) {
    int64_t w = cs_->cusps()[ci].width;
    int64_t step = N_ / w;
    for (int64_t n = 0; n < sturm_.m[ci]; ++n) {
      CycNum c = expansions[ci].coeff(n * step);
      for (auto& x : c.coeffs()) out.push_back(x);
    }
  }
  return out;
}

std::vector<ModForm> ModularFormSpace::basis(int64_t prec) const {
  if (prec <= 0) prec = sturm_.b + N_;
  prec = std::max<int64_t>(prec, sturm_.b + 1);
  if (dim_ == 0) return {};
  auto self = shared_from_this();
  const auto& gelts = G_.elements();  // for orbit removal
  int64_t phi = euler_phi(N_);

  std::vector<ModForm> out;
  RowSpan span;
  std::set<uint64_t> removed;

  // iterate nondecreasing tuples of nonzero alpha indices
  int64_t nalpha = N_ * N_;
  std::vector<int64_t> tup(k_, 1);  // encoded alpha = a*N+b, skipping 0
  auto decode = [&](int64_t e) { return std::pair<int64_t, int64_t>{e / N_, e % N_}; };
  auto bump = [&]() {
    int64_t pos = k_ - 1;
    while (pos >= 0) {
      if (++tup[pos] < nalpha) {
        for (int64_t t = pos + 1; t < k_; ++t) tup[t] = tup[pos];
        return true;
      }
      --pos;
    }
    return false;
  };
  while (true) {
    std::vector<std::pair<int64_t, int64_t>> alphas;
    for (auto e : tup) alphas.push_back(decode(e));
    uint64_t key = tuple_key(alphas, N_);
    if (!removed.count(key)) {
      // remove the whole G x S_k orbit of this tuple
      std::vector<std::pair<int64_t, int64_t>> img(k_);
      for (const auto& g : gelts) {
        for (int64_t t = 0; t < k_; ++t) {
          auto [a, b] = alphas[t];
          img[t] = {mod_reduce(a * g.a + b * g.c, N_), mod_reduce(a * g.b + b * g.d, N_)};
        }
        std::sort(img.begin(), img.end());
        removed.insert(tuple_key(img, N_));
      }
      auto inners = inner_sums(alphas, prec);
      for (int64_t j = 0; j < phi && (int64_t)out.size() < dim_; ++j) {
        EisMonomial mono{N_, k_, j, alphas};
        auto exps = assemble_j(inners, j, prec);
        QVec vec = phi_vector(exps);
        if (span.add(vec)) {
          ModForm f;
          f.space = self;
          f.expansions = std::move(exps);
          f.provenance = {{Rat(1), mono}};
          out.push_back(std::move(f));
        }
      }
      if ((int64_t)out.size() == dim_) return out;
    }
    if (!bump()) break;
  }
  throw std::logic_error("ModularFormSpace::basis: tuples exhausted before reaching the dimension");
}

// ------------------------------------------------------------------- slash

SlashResult slash_expand(const ModForm& f, const std::array<int64_t, 4>& Bm) {
  const ModularFormSpace& sp = *f.space;
  int64_t N = sp.modulus();
  int64_t k = sp.weight();
  int64_t det = Bm[0] * Bm[3] - Bm[1] * Bm[2];
  if (det <= 0) throw std::domain_error("slash_expand: determinant must be positive");
  int64_t content = std::gcd(std::gcd(std::abs(Bm[0]), std::abs(Bm[1])),
                             std::gcd(std::abs(Bm[2]), std::abs(Bm[3])));
  if (content != 1) throw std::domain_error("slash_expand: matrix content must be 1");
  // B infinity = (B00 : B10)
  int64_t p = Bm[0], q = Bm[2];
  int64_t g = std::gcd(std::abs(p), std::abs(q));
  if (g != 0) {
    p /= g;
    q /= g;
  }
  const CuspStructure& cs = sp.cusps();
  int64_t cj = cs.cusp_of_vector(mod_reduce(p, N), mod_reduce(q, N));
  // sigma in SL2(Z) with first column (p, q)
  int64_t b0 = 0, d0 = 0;
  {
    int64_t old_r = p, r = q, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
      int64_t qq = old_r / r;
      std::swap(old_r -= qq * r, r);
      std::swap(old_s -= qq * s, s);
      std::swap(old_t -= qq * t, t);
    }
    if (old_r < 0) {
      old_s = -old_s;
      old_t = -old_t;
    }
    d0 = old_s;
    b0 = -old_t;
  }
  std::array<int64_t, 4> sigma{p, b0, q, d0};
  // A = sigma^{-1} B upper triangular with positive diagonal
  auto matmul = [](std::array<int64_t, 4> x, std::array<int64_t, 4> y) {
    return std::array<int64_t, 4>{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                                  x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  std::array<int64_t, 4> sigma_inv{sigma[3], -sigma[1], -sigma[2], sigma[0]};
  std::array<int64_t, 4> A = matmul(sigma_inv, Bm);
  if (A[2] != 0) throw std::logic_error("slash_expand: triangularization failed");
  if (A[0] < 0) {
    for (auto& x : sigma) x = -x;
    for (auto& x : A) x = -x;
    sigma_inv = {sigma[3], -sigma[1], -sigma[2], sigma[0]};
  }
  int64_t a = A[0], b = A[1], d = A[3];
  // decompose sigma mod N as h * A_j * T^t * (s I)
  ZModMat sbar(N, sigma[0], sigma[1], sigma[2], sigma[3]);
  const CuspData& cd = cs.cusps()[cj];
  ZModMat Aj(N, cd.lift[0], cd.lift[1], cd.lift[2], cd.lift[3]);
  const FinSubgroup& H = cs.sl2_part();
  int64_t tshift = -1, ssign = 1;
  for (int64_t t = 0; t < N && tshift < 0; ++t)
    for (int64_t s : {(int64_t)1, N - 1}) {
      ZModMat cand = sbar * ZModMat::scalar(N, inv_mod(s, N)) * ZModMat(N, 1, -t, 0, 1) * Aj.inverse();
      if (H.contains(cand)) {
        tshift = t;
        ssign = s;
        break;
      }
    }
  if (tshift < 0) throw std::logic_error("slash_expand: cusp decomposition failed");
  QSeries S = f.expansions[cj].shift_tau(tshift);
  Rat scale(1);
  if (ssign != 1 && k % 2 == 1) scale = -scale;
  // now apply [[a,b],[0,d]]: q_{w_j}-series -> q_{d w_j}-series
  int64_t w = cd.width;
  int64_t outw = d * w;
  int64_t M = lcm64(N, outw);
  // S has q_N exponents on multiples of N/w; in q_{w}: n_w = n_N * w / N.
  // output exponent in q_outw: a*n_w = a*n_N*w/N; in q_M: multiply by M/outw.
  // coefficient gains zeta_{outw}^{b * n_w}.
  int64_t prec_w = S.precision() * w / N;  // known q_w coefficients
  int64_t out_prec_qm = (a * (prec_w - 1) + 1) * (M / outw);
  std::vector<CycNum> coeffs;
  int64_t lowq = 0;
  std::vector<std::pair<int64_t, CycNum>> entries;
  for (int64_t nw = 0; nw < prec_w; ++nw) {
    int64_t nN = nw * (N / w);
    if (nN >= S.precision()) break;
    CycNum c = S.coeff(nN);
    if (c.is_zero()) continue;
    CycNum zz = CycNum::root_of_unity(M, mod_reduce((M / outw) * b * nw, M));
    entries.push_back({a * nw * (M / outw), c.embed(M) * zz});
  }
  (void)lowq;
  std::vector<CycNum> dense(out_prec_qm, CycNum(Rat(0), M));
  for (auto& [e, c] : entries)
    if (e < out_prec_qm) dense[e] = c;
  QSeries outs(M, 0, out_prec_qm, std::move(dense));
  // epsilon^k folded via ssign; (a/d)^{k/2}
  SlashResult res;
  res.out_width = outw;
  int64_t num = a, den = d, gg = std::gcd(num, den);
  num /= gg;
  den /= gg;
  res.scale = scale;
  if (k % 2 == 0) {
    Rat r = frac(num, den);
    for (int64_t i = 0; i < k / 2; ++i) res.scale *= r;
    res.scale_sqrt = false;
  } else {
    Rat r = frac(num, den);
    for (int64_t i = 0; i < (k - 1) / 2; ++i) res.scale *= r;
    // leftover sqrt(num/den); fold perfect squares
    auto isqrt = [](int64_t v) {
      int64_t r = (int64_t)std::sqrt((double)v);
      while (r * r > v) --r;
      while ((r + 1) * (r + 1) <= v) ++r;
      return r;
    };
    int64_t sn = isqrt(num), sd = isqrt(den);
    if (sn * sn == num && sd * sd == den) {
      res.scale *= frac(sn, sd);
      res.scale_sqrt = false;
    } else {
      res.scale_sqrt = true;
      res.sqrt_num = num;
      res.sqrt_den = den;
    }
  }
  res.series = outs * res.scale;
  return res;
}

ModForm with_precision(const ModForm& f, int64_t prec) {
  bool enough = true;
  for (auto& e : f.expansions)
    if (e.precision() < prec) enough = false;
  if (enough) return f;
  ModForm out;
  out.space = f.space;
  out.provenance = f.provenance;
  bool first = true;
  for (auto& [c, mono] : f.provenance) {
    auto e = f.space->monomial_expansions(mono, prec);
    if (first) {
      for (auto& s : e) out.expansions.push_back(s * c);
      first = false;
    } else {
      for (size_t i = 0; i < e.size(); ++i) out.expansions[i] = out.expansions[i] + e[i] * c;
    }
  }
  return out;
}

std::vector<ModForm> nice_basis(const std::vector<ModForm>& basis, bool lll) {
  if (basis.empty()) return {};
  const ModularFormSpace& sp = *basis[0].space;
  QMat vecs;
  for (const auto& f : basis) vecs.push_back(sp.phi_vector(f.expansions));
  ZMat ints = scale_to_integer(vecs);
  ZMat sat = saturate_lattice(ints);
  if (lll) sat = lll_reduce(sat);
  // express each new row as a rational combination of the old ones
  QMat transposed(vecs[0].size(), QVec(vecs.size(), Rat(0)));
  for (size_t i = 0; i < vecs.size(); ++i)
    for (size_t j = 0; j < vecs[i].size(); ++j) transposed[j][i] = vecs[i][j];
  std::vector<ModForm> out;
  for (const auto& row : sat) {
    QVec target;
    for (const auto& x : row) target.push_back(Rat(x));
    auto sol = solve(transposed, target);
    if (!sol) throw std::logic_error("nice_basis: saturation left the span");
    ModForm f;
    f.space = basis[0].space;
    bool first = true;
    for (size_t i = 0; i < basis.size(); ++i) {
      if ((*sol)[i] == 0) continue;
      ModForm term = basis[i] * (*sol)[i];
      if (first) {
        f = term;
        first = false;
      } else {
        f = f + term;
      }
    }
    if (first) continue;
    out.push_back(f);
  }
  return out;
}

int64_t eis_monomial_rank(int64_t N, int64_t k, int64_t stop_at) {
  // precision pinning forms of weight k on Gamma(N) from the infinity cusp
  Int mu2 = sl2_order(N) / 2;
  int64_t b = Int(Int(k) * mu2 / 12).get_si() + 2;
  EisTable table(N, b);
  CycRowSpan span;
  auto ctx = CycCtx::get(N);
  std::vector<int64_t> tup(k, 1);
  int64_t nalpha = N * N;
  auto bump = [&]() {
    int64_t pos = k - 1;
    while (pos >= 0) {
      if (++tup[pos] < nalpha) {
        for (int64_t t = pos + 1; t < k; ++t) tup[t] = tup[pos];
        return true;
      }
      --pos;
    }
    return false;
  };
  Int den = 1;
  while (true) {
    ZetaSeries prod = table.series(tup[0] / N, tup[0] % N);
    for (int64_t t = 1; t < k; ++t) prod = prod.mul(table.series(tup[t] / N, tup[t] % N), b);
    QSeries qs = prod.to_qseries(Int(1));
    std::vector<CycNum> row;
    for (int64_t n = 0; n < b; ++n) row.push_back(qs.coeff(n));
    span.add(row);
    if (stop_at > 0 && span.rank() >= stop_at) return span.rank();
    if (!bump()) break;
  }
  (void)den;
  (void)ctx;
  return span.rank();
}

}  // namespace openimage

#include "openimage/linalg.hpp"

#include <algorithm>

namespace openimage {

std::vector<int> rref(QMat& m) {
  std::vector<int> pivots;
  if (m.empty()) return pivots;
  size_t rows = m.size(), cols = m[0].size();
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t sel = r;
    while (sel < rows && m[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[r]);
    Rat inv = 1 / m[r][c];
    for (size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rat f = m[i][c];
      for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back((int)c);
    ++r;
  }
  m.resize(r);
  return pivots;
}

QMat nullspace(const QMat& m_in) {
  QMat m = m_in;
  if (m.empty()) return {};
  size_t cols = m[0].size();
  std::vector<int> pivots = rref(m);
  std::vector<bool> is_pivot(cols, false);
  for (int p : pivots) is_pivot[p] = true;
  QMat out;
  for (size_t free_c = 0; free_c < cols; ++free_c) {
    if (is_pivot[free_c]) continue;
    QVec v(cols, Rat(0));
    v[free_c] = 1;
    for (size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free_c];
    out.push_back(v);
  }
  return out;
}

std::optional<QVec> solve(const QMat& m_in, const QVec& b) {
  QMat aug = m_in;
  for (size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
  size_t cols = m_in.empty() ? 0 : m_in[0].size();
  std::vector<int> pivots = rref(aug);
  QVec x(cols, Rat(0));
  for (size_t i = 0; i < pivots.size(); ++i) {
    if (pivots[i] == (int)cols) return std::nullopt;  // pivot in the b column
    x[pivots[i]] = aug[i].back();
  }
  // verify (handles underdetermined consistency)
  for (size_t i = 0; i < m_in.size(); ++i) {
    Rat acc(0);
    for (size_t j = 0; j < cols; ++j) acc += m_in[i][j] * x[j];
    if (acc != b[i]) return std::nullopt;
  }
  return x;
}

int rank(QMat m) {
  return (int)rref(m).size();
}

bool RowSpan::add(QVec row) {
  for (size_t i = 0; i < rows_.size(); ++i) {
    if (row[pivots_[i]] == 0) continue;
    Rat f = row[pivots_[i]];
    for (size_t j = 0; j < row.size(); ++j) row[j] -= f * rows_[i][j];
  }
  int pivot = -1;
  for (size_t j = 0; j < row.size(); ++j)
    if (row[j] != 0) {
      pivot = (int)j;
      break;
    }
  if (pivot < 0) return false;
  Rat inv = 1 / row[pivot];
  for (auto& x : row) x *= inv;
  rows_.push_back(std::move(row));
  pivots_.push_back(pivot);
  return true;
}

bool CycRowSpan::add(std::vector<CycNum> row) {
  for (size_t i = 0; i < rows_.size(); ++i) {
    if (row[pivots_[i]].is_zero()) continue;
    CycNum f = row[pivots_[i]];
    for (size_t j = 0; j < row.size(); ++j) row[j] = row[j] - f * rows_[i][j];
  }
  int pivot = -1;
  for (size_t j = 0; j < row.size(); ++j)
    if (!row[j].is_zero()) {
      pivot = (int)j;
      break;
    }
  if (pivot < 0) return false;
  CycNum inv = row[pivot].inverse();
  for (auto& x : row) x = x * inv;
  rows_.push_back(std::move(row));
  pivots_.push_back(pivot);
  return true;
}

ZMat scale_to_integer(const QMat& rows) {
  ZMat out;
  for (const auto& r : rows) {
    Int den = 1;
    for (const auto& x : r) den = lcm(den, x.get_den());
    Int g = 0;
    ZVec v;
    for (const auto& x : r) {
      Int e = x.get_num() * (den / x.get_den());
      v.push_back(e);
      g = gcd(g, e);
    }
    if (g > 1)
      for (auto& e : v) e /= g;
    out.push_back(v);
  }
  return out;
}

ZMat hnf(const ZMat& rows_in) {
  ZMat m = rows_in;
  if (m.empty()) return m;
  size_t rows = m.size(), cols = m[0].size();
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    // gcd-reduce column c below row r
    while (true) {
      size_t best = rows;
      for (size_t i = r; i < rows; ++i)
        if (m[i][c] != 0 && (best == rows || abs(m[i][c]) < abs(m[best][c]))) best = i;
      if (best == rows) break;
      std::swap(m[best], m[r]);
      bool done = true;
      for (size_t i = r + 1; i < rows; ++i) {
        if (m[i][c] == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m[i][c].get_mpz_t(), m[r][c].get_mpz_t());
        for (size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
        if (m[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (m[r][c] == 0) continue;
    if (m[r][c] < 0)
      for (size_t j = 0; j < cols; ++j) m[r][j] = -m[r][j];
    // reduce above
    for (size_t i = 0; i < r; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), m[i][c].get_mpz_t(), m[r][c].get_mpz_t());
      if (q != 0)
        for (size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
    }
    ++r;
  }
  m.resize(r);
  return m;
}

bool lattice_equal(const ZMat& a, const ZMat& b) { return hnf(a) == hnf(b); }

ZMat saturate_lattice(const ZMat& rows) {
  if (rows.empty()) return {};
  // Echelonize over Q; express the saturation through the pivot coordinates.
  size_t cols = rows[0].size();
  QMat q;
  for (const auto& r : rows) {
    QVec v;
    for (const auto& x : r) v.push_back(Rat(x));
    q.push_back(v);
  }
  std::vector<int> pivots = rref(q);
  size_t k = pivots.size();
  if (k == 0) return {};
  // lattice L = {c in Q^k : sum c_i q_i integral}; sandwich Z^k <= L <= (1/D)Z^k
  Int D = 1;
  for (auto& row : q)
    for (auto& x : row) D = lcm(D, x.get_den());
  // basis of L via incremental intersection with the column conditions
  // work with the matrix B (k x k) whose rows generate L, starting at (1/D)I
  // condition: for each column j: sum_i c_i q[i][j] in Z.
  // iterate: maintain rows of L as rational vectors.
  QMat basis(k, QVec(k, Rat(0)));
  for (size_t i = 0; i < k; ++i) basis[i][i] = frac(1, D);
  for (size_t j = 0; j < cols; ++j) {
    // linear form on c: ell(c) = sum_i c_i q[i][j]; refine to ell(c) in Z
    // compute values of ell on current basis rows
    std::vector<Rat> val(k);
    bool all_int = true;
    for (size_t i = 0; i < k; ++i) {
      Rat acc(0);
      for (size_t t = 0; t < k; ++t) acc += basis[i][t] * q[t][j];
      val[i] = acc;
      if (acc.get_den() != 1) all_int = false;
    }
    if (all_int) continue;
    // sublattice {x in Z^k : sum x_i val_i in Z}: use one extended-gcd pass
    Int mden = 1;
    for (auto& v : val) mden = lcm(mden, v.get_den());
    std::vector<Int> w(k);
    for (size_t i = 0; i < k; ++i) w[i] = val[i].get_num() * (mden / val[i].get_den()) % mden;
    // solve: x . w = 0 mod mden; basis of that sublattice of Z^k via HNF of
    // the (k+1) x k stack [I ; e_i rows] trick: rows x with x.w = 0 mod mden:
    // generated by mden*e_i and combinations; use HNF of the kernel built by
    // pairwise gcd elimination.
    ZMat gen;
    for (size_t i = 0; i < k; ++i) {
      ZVec e(k, 0);
      e[i] = mden;
      gen.push_back(e);
    }
    // add vectors e_i*w_l - e_l*w_i and a primitive solver row via gcd chain
    // simple approach: HNF of {x : x.w = 0 mod mden} built from gcd chain:
    std::vector<Int> g(k + 1);
    g[0] = mden;
    ZMat chain;  // rows generating the kernel
    // process coordinates left to right, maintaining partial gcd
    // x.w = 0 mod mden: standard: kernel generated by:
    //  - for each i: (mden/gcd(w_i,mden)) e_i ... plus cross terms; to stay
    //    simple and correct use the generic method: enumerate HNF of the
    //    integer kernel of the 1 x (k) map into Z/mden via column HNF of
    //    the 1x(k+1) matrix [w | mden].
    // Build (k+1)x(k+1) unimodular reduction on the row vector (w, mden):
    {
      std::vector<ZVec> U(k + 1, ZVec(k + 1, 0));
      for (size_t i = 0; i <= k; ++i) U[i][i] = 1;
      ZVec v(k + 1);
      for (size_t i = 0; i < k; ++i) v[i] = w[i];
      v[k] = mden;
      // column-reduce v to (g,0,...,0) tracking U (columns ops on v = rows of U^T):
      // treat v as a row vector; apply column operations.
      while (true) {
        size_t best = k + 1;
        for (size_t i = 0; i <= k; ++i)
          if (v[i] != 0 && (best == k + 1 || abs(v[i]) < abs(v[best]))) best = i;
        if (best == k + 1) break;
        bool clean = true;
        for (size_t i = 0; i <= k; ++i) {
          if (i == best || v[i] == 0) continue;
          Int qq;
          mpz_fdiv_q(qq.get_mpz_t(), v[i].get_mpz_t(), v[best].get_mpz_t());
          v[i] -= qq * v[best];
          for (size_t t = 0; t <= k; ++t) U[i][t] -= qq * U[best][t];
          if (v[i] != 0) clean = false;
        }
        if (clean) {
          if (best != 0) {
            std::swap(v[0], v[best]);
            std::swap(U[0], U[best]);
          }
          break;
        }
      }
      // kernel of x -> x.w mod mden on Z^k: columns i >= 1 of the relation
      // give x-parts (first k coords of U rows with v = 0), plus mden e_i…
      gen.clear();
      for (size_t i = 0; i <= k; ++i) {
        if (v[i] != 0) continue;
        ZVec x(w.size());
        bool nonzero = false;
        for (size_t t = 0; t < k; ++t) {
          x[t] = U[i][t];
          nonzero = nonzero || x[t] != 0;
        }
        if (nonzero) gen.push_back(x);
      }
      for (size_t i = 0; i < k; ++i) {
        ZVec e(k, 0);
        e[i] = mden;
        gen.push_back(e);
      }
    }
    ZMat ker_rows = hnf(gen);
    // new basis rows = kernel rows (in old-basis coordinates)
    QMat nb;
    for (auto& x : ker_rows) {
      QVec row(k, Rat(0));
      for (size_t t = 0; t < k; ++t)
        for (size_t s = 0; s < k; ++s) row[s] += Rat(x[t]) * basis[t][s];
      nb.push_back(row);
    }
    basis = nb;
  }
  // basis rows (c-coordinates) -> actual vectors sum c_i q_i (integral now)
  ZMat out;
  for (auto& b : basis) {
    QVec vec(cols, Rat(0));
    for (size_t t = 0; t < k; ++t)
      for (size_t j = 0; j < cols; ++j) vec[j] += b[t] * q[t][j];
    ZVec iv;
    for (auto& x : vec) {
      if (x.get_den() != 1) throw std::logic_error("saturate_lattice: non-integral result");
      iv.push_back(x.get_num());
    }
    out.push_back(iv);
  }
  return hnf(out);
}

ZMat lll_reduce(const ZMat& basis_in) {
  // textbook LLL with exact rational Gram-Schmidt, delta = 3/4
  ZMat b = basis_in;
  size_t n = b.size();
  if (n <= 1) return b;
  auto dot = [](const ZVec& x, const ZVec& y) {
    Int s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  auto recompute = [&](std::vector<std::vector<Rat>>& mu, std::vector<Rat>& B) {
    size_t k = b.size();
    std::vector<std::vector<Rat>> gs(k, std::vector<Rat>(b[0].size(), Rat(0)));
    mu.assign(k, std::vector<Rat>(k, Rat(0)));
    B.assign(k, Rat(0));
    for (size_t i = 0; i < k; ++i) {
      std::vector<Rat> v;
      for (auto& x : b[i]) v.push_back(Rat(x));
      for (size_t j = 0; j < i; ++j) {
        Rat num(0);
        for (size_t t = 0; t < v.size(); ++t) num += Rat(b[i][t]) * gs[j][t];
        mu[i][j] = B[j] == 0 ? Rat(0) : num / B[j];
        for (size_t t = 0; t < v.size(); ++t) v[t] -= mu[i][j] * gs[j][t];
      }
      gs[i] = v;
      Rat nrm(0);
      for (auto& x : v) nrm += x * x;
      B[i] = nrm;
    }
  };
  std::vector<std::vector<Rat>> mu;
  std::vector<Rat> B;
  recompute(mu, B);
  size_t kk = 1;
  int guard = 0;
  while (kk < n) {
    if (++guard > 100000) throw std::logic_error("lll_reduce: iteration bound exceeded");
    // size reduction
    for (size_t j = kk; j-- > 0;) {
      Rat m = mu[kk][j];
      Int q;
      Rat half(1, 2);
      Rat shifted = m + half;
      mpz_fdiv_q(q.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
      if (q != 0) {
        for (size_t t = 0; t < b[kk].size(); ++t) b[kk][t] -= q * b[j][t];
        recompute(mu, B);
      }
    }
    // Lovasz condition
    if (B[kk] >= (frac(3, 4) - mu[kk][kk - 1] * mu[kk][kk - 1]) * B[kk - 1]) {
      ++kk;
    } else {
      std::swap(b[kk], b[kk - 1]);
      recompute(mu, B);
      kk = std::max<size_t>(1, kk - 1);
    }
  }
  (void)dot;
  return b;
}

}  // namespace openimage

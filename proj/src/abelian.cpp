#include "openimage/abelian.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace openimage {

// ------------------------------------------------------------------ UnitGroup

int64_t UnitGroup::order() const {
  int64_t o = 1;
  for (int64_t x : orders) o *= x;
  return o;
}

std::vector<int64_t> UnitGroup::dlog(int64_t u) const {
  u = mod_reduce(u, n);
  if (n == 1) return {};
  if (std::gcd(u, n) != 1) throw std::domain_error("UnitGroup::dlog: not a unit");
  std::vector<int64_t> out(gens.size(), 0);
  for (auto& [p, e] : factorize(n)) {
    int64_t q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    int64_t uq = u % q;
    // generators local to this prime power (congruent to 1 at the others)
    std::vector<size_t> loc;
    for (size_t i = 0; i < gens.size(); ++i)
      if (mod_reduce(gens[i] - 1, n / q) == 0 && mod_reduce(gens[i], q) != 1 % q) loc.push_back(i);
    if (loc.empty()) {
      if (uq != 1 % q) throw std::logic_error("UnitGroup::dlog: missing local generators");
      continue;
    }
    std::vector<int64_t> exps(loc.size(), 0);
    bool found = false;
    while (true) {
      int64_t v = 1 % q;
      for (size_t i = 0; i < loc.size(); ++i)
        v = mul_mod(v, pow_mod(gens[loc[i]], exps[i], q), q);
      if (v == uq) {
        for (size_t i = 0; i < loc.size(); ++i) out[loc[i]] = exps[i];
        found = true;
        break;
      }
      size_t k = 0;
      while (k < loc.size()) {
        if (++exps[k] < orders[loc[k]]) break;
        exps[k] = 0;
        ++k;
      }
      if (k == loc.size()) break;
    }
    if (!found) throw std::logic_error("UnitGroup::dlog: search failed");
  }
  return out;
}

int64_t UnitGroup::eval(const std::vector<int64_t>& e) const {
  int64_t v = 1 % n;
  for (size_t i = 0; i < gens.size(); ++i)
    v = mul_mod(v, pow_mod(gens[i], mod_reduce(e[i], orders[i]), n), n);
  return v;
}

UnitGroup unit_group(int64_t n) {
  UnitGroup U;
  U.n = n;
  if (n <= 2) return U;
  for (auto& [p, e] : factorize(n)) {
    int64_t q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    int64_t rest = n / q;
    auto push = [&](int64_t g, int64_t o) {
      U.gens.push_back(rest == 1 ? g : crt(g, q, 1, rest));
      U.orders.push_back(o);
    };
    if (p == 2) {
      if (q == 4) push(3, 2);
      if (q >= 8) {
        push(q - 1, 2);
        push(5, q / 4);
      }
    } else {
      push(primitive_root(q), q / p * (p - 1));
    }
  }
  return U;
}

// ----------------------------------------------------------------- Smith form

SmithForm smith_relations(const std::vector<std::vector<Int>>& rows, int k) {
  std::vector<std::vector<Int>> A = rows;
  for (auto& r : A)
    if ((int)r.size() != k) throw std::domain_error("smith_relations: bad row length");
  int m = (int)A.size();
  std::vector<std::vector<Int>> vinv(k, std::vector<Int>(k, 0));
  for (int i = 0; i < k; ++i) vinv[i][i] = 1;
  // Column op A -> A with col[dst] += c*col[src] changes basis; V^{-1} keeps
  // the expression of the new basis in the old generators.
  auto col_swap = [&](int i, int j) {
    for (int r = 0; r < m; ++r) std::swap(A[r][i], A[r][j]);
    std::swap(vinv[i], vinv[j]);
  };
  auto col_add = [&](int dst, int src, const Int& c) {
    for (int r = 0; r < m; ++r) A[r][dst] += c * A[r][src];
    for (int t = 0; t < k; ++t) vinv[src][t] -= c * vinv[dst][t];
  };
  auto col_neg = [&](int i) {
    for (int r = 0; r < m; ++r) A[r][i] = -A[r][i];
    for (int t = 0; t < k; ++t) vinv[i][t] = -vinv[i][t];
  };

  int piv = 0;
  for (; piv < k && piv < m; ++piv) {
    while (true) {
      int bi = -1, bj = -1;
      Int best = 0;
      for (int i = piv; i < m; ++i)
        for (int j = piv; j < k; ++j)
          if (A[i][j] != 0 && (bi < 0 || abs(A[i][j]) < best)) {
            best = abs(A[i][j]);
            bi = i;
            bj = j;
          }
      if (bi < 0) goto done;
      if (bi != piv) std::swap(A[bi], A[piv]);
      if (bj != piv) col_swap(bj, piv);
      if (A[piv][piv] < 0) col_neg(piv);
      bool again = false;
      for (int i = piv + 1; i < m; ++i)
        if (A[i][piv] != 0) {
          Int q;
          mpz_fdiv_q(q.get_mpz_t(), A[i][piv].get_mpz_t(), A[piv][piv].get_mpz_t());
          for (int t = 0; t < k; ++t) A[i][t] -= q * A[piv][t];
          if (A[i][piv] != 0) again = true;
        }
      for (int j = piv + 1; j < k; ++j)
        if (A[piv][j] != 0) {
          Int q;
          mpz_fdiv_q(q.get_mpz_t(), A[piv][j].get_mpz_t(), A[piv][piv].get_mpz_t());
          col_add(j, piv, -q);
          if (A[piv][j] != 0) again = true;
        }
      if (!again) break;
    }
  }
done:
  SmithForm out;
  out.diag.assign(k, 0);
  for (int j = 0; j < std::min(m, k); ++j) out.diag[j] = abs(A[j][j]);
  out.vinv_rows = vinv;
  return out;
}

// ------------------------------------------------------------ AbelianQuotient

AbelianQuotient::AbelianQuotient(FinSubgroup big, FinSubgroup small)
    : big_(std::move(big)), small_(std::move(small)) {
  if (big_.modulus() != small_.modulus())
    throw std::domain_error("AbelianQuotient: modulus mismatch");
  if (!big_.contains_group(small_)) throw std::domain_error("AbelianQuotient: not a subgroup");
  if (!small_.is_normal_in(big_)) throw std::domain_error("AbelianQuotient: not normal");
  for (const auto& a : big_.generators())
    for (const auto& b : big_.generators())
      if (!small_.contains(commutator(a, b)))
        throw std::domain_error("AbelianQuotient: quotient is not abelian");

  ZModMat id = ZModMat::identity(big_.modulus());
  reps_.push_back(id);
  coset_of_cache_[id.key128()] = 0;
  for (size_t i = 0; i < reps_.size(); ++i)
    for (const auto& g : big_.generators()) {
      ZModMat x = reps_[i] * g;
      if (coset_index(x) < 0) {
        coset_of_cache_[x.key128()] = (int)reps_.size();
        reps_.push_back(x);
      }
    }

  std::vector<ZModMat> gens;
  for (const auto& g : big_.generators())
    if (!small_.contains(g)) gens.push_back(g);
  if (gens.empty()) {
    basis_.push_back(id);
    basis_orders_.push_back(1);
    build_labels();
    return;
  }
  int k = (int)gens.size();
  std::map<int, std::vector<Int>> word;
  std::vector<std::vector<Int>> rels;
  word[0] = std::vector<Int>(k, 0);
  std::vector<std::pair<int, ZModMat>> queue{{0, id}};
  for (size_t i = 0; i < queue.size(); ++i) {
    auto [ci, mat] = queue[i];
    for (int gi = 0; gi < k; ++gi) {
      ZModMat x = mat * gens[gi];
      int cj = coset_index(x);
      std::vector<Int> w = word[ci];
      w[gi] += 1;
      if (!word.count(cj)) {
        word[cj] = w;
        queue.push_back({cj, x});
      } else {
        std::vector<Int> rel = w;
        for (int t = 0; t < k; ++t) rel[t] -= word[cj][t];
        bool nonzero = false;
        for (auto& v : rel) nonzero = nonzero || v != 0;
        if (nonzero) rels.push_back(rel);
      }
    }
  }
  if ((int64_t)word.size() != order()) throw std::logic_error("AbelianQuotient: coset BFS incomplete");
  SmithForm sf = smith_relations(rels, k);
  Int ord(order());
  for (int j = 0; j < k; ++j) {
    if (sf.diag[j] == 1) continue;
    if (sf.diag[j] == 0) throw std::logic_error("AbelianQuotient: relation lattice not full rank");
    ZModMat b = id;
    for (int i = 0; i < k; ++i) {
      Int er;
      mpz_mod(er.get_mpz_t(), sf.vinv_rows[j][i].get_mpz_t(), ord.get_mpz_t());
      b = b * gens[i].pow(er.get_si());
    }
    basis_.push_back(b);
    basis_orders_.push_back(sf.diag[j].get_si());
  }
  if (basis_.empty()) {
    basis_.push_back(id);
    basis_orders_.push_back(1);
  }
  build_labels();
}

int AbelianQuotient::coset_index(const ZModMat& x) const {
  auto it = coset_of_cache_.find(x.key128());
  if (it != coset_of_cache_.end()) return it->second;
  for (size_t i = 0; i < reps_.size(); ++i)
    if (small_.contains(reps_[i].inverse() * x)) {
      const_cast<AbelianQuotient*>(this)->coset_of_cache_[x.key128()] = (int)i;
      return (int)i;
    }
  return -1;
}

void AbelianQuotient::build_labels() {
  int64_t prod = 1;
  for (int64_t o : basis_orders_) prod *= o;
  if (prod != order()) throw std::domain_error("AbelianQuotient: basis does not span");
  label_of_rep_.assign(reps_.size(), {});
  std::vector<int64_t> assigned(reps_.size(), 0);
  std::vector<int64_t> e(basis_.size(), 0);
  int64_t filled = 0;
  while (true) {
    ZModMat m = ZModMat::identity(big_.modulus());
    for (size_t i = 0; i < basis_.size(); ++i) m = m * basis_[i].pow(e[i]);
    int ci = coset_index(m);
    if (ci < 0) throw std::domain_error("AbelianQuotient: basis product escapes group");
    if (assigned[ci]) throw std::domain_error("AbelianQuotient: basis not independent");
    assigned[ci] = 1;
    label_of_rep_[ci] = e;
    ++filled;
    size_t k = 0;
    while (k < e.size()) {
      if (++e[k] < basis_orders_[k]) break;
      e[k] = 0;
      ++k;
    }
    if (k == e.size()) break;
  }
  if (filled != order()) throw std::domain_error("AbelianQuotient: label table incomplete");
}

int64_t AbelianQuotient::exponent() const {
  int64_t e = 1;
  for (int64_t o : basis_orders_) e = std::lcm(e, o);
  return e;
}

std::vector<int64_t> AbelianQuotient::label(const ZModMat& x) const {
  int ci = coset_index(x);
  if (ci < 0) throw std::domain_error("AbelianQuotient::label: element not in group");
  return label_of_rep_[ci];
}

ZModMat AbelianQuotient::rep(const std::vector<int64_t>& lab) const {
  ZModMat m = ZModMat::identity(big_.modulus());
  for (size_t i = 0; i < basis_.size(); ++i)
    m = m * basis_[i].pow(mod_reduce(lab[i], basis_orders_[i]));
  return m;
}

std::vector<int64_t> AbelianQuotient::add(const std::vector<int64_t>& a,
                                          const std::vector<int64_t>& b) const {
  std::vector<int64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = mod_reduce(a[i] + b[i], basis_orders_[i]);
  return out;
}

std::vector<int64_t> AbelianQuotient::neg(const std::vector<int64_t>& a) const {
  std::vector<int64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = mod_reduce(-a[i], basis_orders_[i]);
  return out;
}

bool AbelianQuotient::is_zero(const std::vector<int64_t>& a) const {
  for (auto v : a)
    if (v != 0) return false;
  return true;
}

void AbelianQuotient::relabel(const std::vector<ZModMat>& gens, const std::vector<int64_t>& orders) {
  if (gens.size() != orders.size()) throw std::domain_error("relabel: size mismatch");
  for (const auto& g : gens)
    if (!big_.contains(g)) throw std::domain_error("relabel: generator not in group");
  basis_ = gens;
  basis_orders_ = orders;
  build_labels();
}

// ---------------------------------------------------------------- characters

std::vector<int64_t> CharacterMap::eval(int64_t u) const {
  std::vector<int64_t> out(q_orders.size(), 0);
  if (modulus == 1) return out;
  auto e = units.dlog(mod_reduce(u, modulus));
  for (size_t i = 0; i < units.gens.size(); ++i)
    for (size_t l = 0; l < q_orders.size(); ++l)
      out[l] = mod_reduce(out[l] + e[i] * images[i][l], q_orders[l]);
  return out;
}

bool CharacterMap::is_trivial() const {
  for (auto& img : images)
    for (auto v : img)
      if (v != 0) return false;
  return true;
}

CharacterMap solve_character(int64_t M, int64_t e, const std::vector<int64_t>& q_orders,
                             const std::vector<std::pair<int64_t, std::vector<int64_t>>>& samples) {
  int64_t D0 = 1;
  for (auto& [p, ee] : factorize(M)) {
    int64_t v = 0, t = e;
    while (t % p == 0) t /= p, ++v;
    int64_t a = (p == 2) ? v + 2 : v + 1;
    for (int64_t i = 0; i < a; ++i) D0 *= p;
  }
  UnitGroup U = unit_group(D0);
  size_t k = U.gens.size();
  std::vector<int64_t> qe(k);
  for (size_t i = 0; i < k; ++i) qe[i] = std::gcd(U.orders[i], e);
  {
    // the sampled primes must generate U/U^e
    std::set<std::vector<int64_t>> sub;
    std::vector<std::vector<int64_t>> queue, sample_vecs;
    std::vector<int64_t> zero(k, 0);
    sub.insert(zero);
    queue.push_back(zero);
    for (auto& [p, lab] : samples) {
      auto d = U.dlog(mod_reduce(p, D0));
      for (size_t i = 0; i < k; ++i) d[i] = mod_reduce(d[i], qe[i]);
      sample_vecs.push_back(d);
    }
    for (size_t i = 0; i < queue.size(); ++i)
      for (auto& s : sample_vecs) {
        std::vector<int64_t> x(k);
        for (size_t t = 0; t < k; ++t) x[t] = mod_reduce(queue[i][t] + s[t], qe[t]);
        if (sub.insert(x).second) queue.push_back(x);
      }
    int64_t full = 1;
    for (auto v : qe) full *= v;
    if ((int64_t)sub.size() != full)
      throw std::domain_error("solve_character: sampled primes do not generate");
  }
  std::vector<std::vector<int64_t>> dlogs;
  for (auto& [p, lab] : samples) dlogs.push_back(U.dlog(mod_reduce(p, D0)));
  std::vector<std::vector<int64_t>> images(k, std::vector<int64_t>(q_orders.size(), 0));
  for (size_t l = 0; l < q_orders.size(); ++l) {
    int64_t d = q_orders[l];
    std::vector<int64_t> step(k), count(k);
    for (size_t i = 0; i < k; ++i) {
      int64_t g = std::gcd(d, U.orders[i]);
      step[i] = d / g;  // the image of a generator of order o has order | gcd(d,o)
      count[i] = g;
    }
    std::vector<int64_t> idx(k, 0);
    bool solved = false;
    while (true) {
      bool ok = true;
      for (size_t s = 0; s < samples.size() && ok; ++s) {
        int64_t acc = 0;
        for (size_t i = 0; i < k; ++i) acc = mod_reduce(acc + dlogs[s][i] * (idx[i] * step[i]), d);
        if (acc != mod_reduce(samples[s].second[l], d)) ok = false;
      }
      if (ok) {
        for (size_t i = 0; i < k; ++i) images[i][l] = idx[i] * step[i];
        solved = true;
        break;
      }
      size_t t = 0;
      while (t < k) {
        if (++idx[t] < count[t]) break;
        idx[t] = 0;
        ++t;
      }
      if (t == k) break;
    }
    if (!solved)
      throw std::domain_error("solve_character: samples inconsistent with a homomorphism");
  }
  CharacterMap cm{D0, U, images, q_orders};
  for (int64_t d : divisors(D0)) {
    bool factors = true;
    for (int64_t u = 1 + d; u < D0 && factors; u += d) {
      if (std::gcd(u, D0) != 1) continue;
      for (auto x : cm.eval(u))
        if (x != 0) factors = false;
    }
    if (!factors) continue;
    if (d == D0) return cm;
    CharacterMap red;
    red.modulus = d;
    red.units = unit_group(d);
    red.q_orders = q_orders;
    for (int64_t g : red.units.gens) {
      int64_t lift = g;
      while (std::gcd(lift, D0) != 1) lift += d;
      red.images.push_back(cm.eval(lift));
    }
    return red;
  }
  return cm;
}

int64_t quad_field_disc(const Int& d) {
  Int sf = squarefree_part(Rat(d));
  if (sf == 1) return 1;
  Int disc = (mod_reduce(mpz_fdiv_ui(sf.get_mpz_t(), 4), 4) == 1) ? sf : 4 * sf;
  return disc.get_si();
}

CharacterMap quadratic_character(const Int& d) {
  int64_t disc = quad_field_disc(d);
  CharacterMap cm;
  cm.q_orders = {2};
  cm.modulus = std::abs(disc);
  cm.units = unit_group(cm.modulus);
  if (disc == 1) return cm;
  for (int64_t g : cm.units.gens) {
    int kr = kronecker(disc, g);
    cm.images.push_back({kr == 1 ? 0 : 1});
  }
  return cm;
}

CharacterMap product_character(const std::vector<CharacterMap>& parts) {
  CharacterMap out;
  out.modulus = 1;
  for (auto& p : parts) out.modulus = lcm64(out.modulus, p.modulus);
  out.units = unit_group(out.modulus);
  for (auto& p : parts)
    out.q_orders.insert(out.q_orders.end(), p.q_orders.begin(), p.q_orders.end());
  for (int64_t g : out.units.gens) {
    std::vector<int64_t> img;
    for (auto& p : parts) {
      auto v = p.eval(g);
      img.insert(img.end(), v.begin(), v.end());
    }
    out.images.push_back(img);
  }
  return out;
}

}  // namespace openimage

#include "openimage/agreeable.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

namespace openimage {

bool is_agreeable(const OpenSubgroup& G) {
  if (G.ambient() != Ambient::GL2) return false;
  if (!G.det_full()) return false;
  OpenSubgroup Gc = G.certify_level();
  if (!Gc.image().contains_all_scalars()) return false;
  int64_t lg = Gc.level();
  int64_t ls = Gc.sl2_part().certify_level().level();
  auto odd_primes = [](int64_t n) {
    std::set<int64_t> s;
    for (int64_t p : prime_divisors(n))
      if (p != 2) s.insert(p);
    return s;
  };
  return odd_primes(lg) == odd_primes(ls);
}

OpenSubgroup adjoin_scalars_with_bound(const OpenSubgroup& H, int64_t N0) {
  if (H.ambient() != Ambient::GL2) throw std::domain_error("adjoin_scalars: GL2 ambient required");
  OpenSubgroup S = H.sl2_part().certify_level();
  int64_t lvl = std::max<int64_t>(S.level(), 1);
  if (N0 == 0) {
    N0 = lvl;
    if (N0 % 4 == 2) N0 *= 2;
  } else {
    if (N0 % lvl != 0) throw std::domain_error("adjoin_scalars: N0 not a multiple of the SL2 level");
    if (N0 % 4 == 2) throw std::domain_error("adjoin_scalars: level of SL2 part is 2 mod 4");
  }
  int64_t N1 = (N0 % 2 == 1) ? N0 : 2 * N0;
  int64_t hl = std::max<int64_t>(H.certify_level().level(), 1);
  int64_t L = lcm64(std::max<int64_t>(N1, 2), std::max<int64_t>(hl, 2));
  FinSubgroup img = H.image_mod(L);
  std::vector<ZModMat> extra;
  for (int64_t u : unit_group_generators(L)) extra.push_back(ZModMat::scalar(L, u));
  return OpenSubgroup(Ambient::GL2, img.joined_with(extra)).certify_level();
}

OpenSubgroup agreeable_closure(const OpenSubgroup& G) {
  if (G.ambient() != Ambient::GL2 || !G.det_full())
    throw std::domain_error("agreeable_closure: need det(G) full in GL2");
  OpenSubgroup C = commutator_open(G);
  int64_t N = radical(C.level());  // even: [G,G] lies in the level-2 commutator of GL2(Zhat)
  OpenSubgroup Gc = G.certify_level();
  int64_t lvl = std::max<int64_t>(Gc.level(), 1);
  // modulus carrying the projection of G to the primes dividing N
  int64_t m = 1;
  for (int64_t p : prime_divisors(N)) {
    int64_t e = 0, t = lvl;
    while (t % p == 0) t /= p, ++e;
    int64_t pe = 1;
    for (int64_t i = 0; i < std::max<int64_t>(e, 1); ++i) pe *= p;
    m *= pe;
  }
  if (m == 1) m = 2;
  OpenSubgroup projected(Ambient::GL2, Gc.image_mod(m));
  return adjoin_scalars_with_bound(projected, 0);
}

// ------------------------------------------------------------- family member

FamilyContext::FamilyContext(const OpenSubgroup& calG_, const OpenSubgroup& G_)
    : calG(calG_),
      G(G_),
      modulus(lcm64(calG_.modulus(), G_.modulus())),
      quotient(calG_.image_mod(lcm64(calG_.modulus(), G_.modulus())),
               G_.image_mod(lcm64(calG_.modulus(), G_.modulus()))) {
  if (!G.det_full()) throw std::domain_error("FamilyContext: det(G) must be full");
}

static void validate_character(const CharacterMap& gamma) {
  for (size_t i = 0; i < gamma.units.gens.size(); ++i)
    for (size_t l = 0; l < gamma.q_orders.size(); ++l)
      if (mod_reduce(gamma.images[i][l] * gamma.units.orders[i], gamma.q_orders[l]) != 0)
        throw std::domain_error("character is not a homomorphism: order relation fails");
}

OpenSubgroup family_member(const FamilyContext& fam, const CharacterMap& gamma) {
  if (gamma.q_orders != fam.quotient.basis_orders())
    throw std::domain_error("family_member: character target does not match the quotient");
  validate_character(gamma);
  int64_t L = lcm64(fam.modulus, std::max<int64_t>(gamma.modulus, 1));
  FinSubgroup calL = fam.calG.image_mod(L);
  FinSubgroup GL = fam.G.image_mod(L);
  int64_t m = fam.modulus;

  // section of the quotient through the SL2 part
  FinSubgroup K = calL.sl2_intersection();
  std::map<std::vector<int64_t>, ZModMat> section;
  std::vector<ZModMat> queue{ZModMat::identity(L)};
  section[fam.quotient.label(ZModMat::identity(m))] = queue[0];
  for (size_t i = 0; i < queue.size() && (int64_t)section.size() < fam.quotient.order(); ++i) {
    for (const auto& g : K.generators()) {
      ZModMat x = queue[i] * g;
      auto lab = fam.quotient.label(x.reduce(m));
      if (!section.count(lab)) {
        section[lab] = x;
        queue.push_back(x);
      }
    }
  }
  if ((int64_t)section.size() != fam.quotient.order())
    throw std::logic_error("family_member: SL2 part does not surject onto the quotient");

  // G_gamma = (G intersect SL2) . {det-section elements with prescribed cosets}
  std::vector<ZModMat> gens = GL.sl2_intersection().generators();
  auto dets = calL.det_transversal();
  std::map<int64_t, ZModMat> det_rep(dets.begin(), dets.end());
  for (int64_t u : unit_group_generators(L)) {
    ZModMat x = det_rep.at(u);
    auto have = fam.quotient.label(x.reduce(m));
    auto want = gamma.eval(u);
    auto delta = fam.quotient.add(want, fam.quotient.neg(have));
    gens.push_back(x * section.at(delta));
  }
  OpenSubgroup out = OpenSubgroup(Ambient::GL2, FinSubgroup(L, gens)).certify_level();
  if (!out.det_full()) throw std::logic_error("family_member: determinant not full");
  return out;
}

OpenSubgroup twist_image(const OpenSubgroup& GE, const Int& d) {
  if (!GE.det_full()) throw std::domain_error("twist_image: det must be full");
  Int sf = squarefree_part(Rat(d));
  if (sf != d) throw std::domain_error("twist_image: d must be squarefree");
  CharacterMap psi = quadratic_character(d);
  int64_t L = lcm64(std::max<int64_t>(GE.certify_level().level(), 2),
                    std::max<int64_t>(psi.modulus, 1));
  FinSubgroup img = GE.image_mod(L);
  std::vector<ZModMat> gens;
  for (const auto& g : img.generators()) {
    int64_t s = psi.eval(g.det())[0] == 0 ? 1 : L - 1;
    gens.push_back(ZModMat::scalar(L, s) * g);
  }
  return OpenSubgroup(Ambient::GL2, FinSubgroup(L, gens)).certify_level();
}

// ------------------------------------------------------------------ S3 tools

Perm3 perm3_compose(const Perm3& a, const Perm3& b) { return Perm3{a[b[0]], a[b[1]], a[b[2]]}; }
bool perm3_is_id(const Perm3& p) { return p == Perm3{0, 1, 2}; }

std::vector<Perm3> all_perm3() {
  return {Perm3{0, 1, 2}, Perm3{1, 2, 0}, Perm3{2, 0, 1},
          Perm3{1, 0, 2}, Perm3{0, 2, 1}, Perm3{2, 1, 0}};
}

ZModMat perm3_matrix(const Perm3& p, int64_t q) {
  ZModMat rot(q, 0, -1, 1, -1), flip(q, 0, 1, 1, 0);
  Perm3 r{1, 2, 0}, f{1, 0, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      Perm3 cand{0, 1, 2};
      for (int t = 0; t < i; ++t) cand = perm3_compose(r, cand);
      if (j) cand = perm3_compose(cand, f);
      if (cand == p) return rot.pow(i) * flip.pow(j);
    }
  throw std::logic_error("perm3_matrix: not a permutation");
}

// ------------------------------------------------------- maximal agreeables

namespace {

OpenSubgroup local_commutator(const OpenSubgroup& B, const std::vector<int64_t>& support) {
  OpenSubgroup Bc = B.certify_level();
  std::map<int64_t, int64_t> e;
  for (int64_t p : support) {
    int64_t v = 0, n = std::max<int64_t>(Bc.level(), 1);
    while (n % p == 0) n /= p, ++v;
    e[p] = std::max<int64_t>(p == 2 ? 2 : 1, v);
  }
  while (true) {
    bool ok = true;
    for (int64_t ell : support) {
      int64_t Nl = 1;
      for (int64_t i = 0; i < e[ell]; ++i) Nl *= ell;
      for (int64_t p : support)
        if (p != ell && mod_reduce(p * p, ell) == 1 % ell) Nl *= p;
      int64_t m = Nl * ell;
      FinSubgroup D = B.image_mod(m).derived_subgroup();
      for (const auto& k : kernel_generators(Ambient::SL2, Nl, ell))
        if (!D.contains(k)) {
          ok = false;
          break;
        }
      if (!ok) {
        e[ell] += 1;
        break;
      }
    }
    if (ok) break;
  }
  int64_t Nc = 1;
  for (auto& [p, ee] : e)
    for (int64_t i = 0; i < ee; ++i) Nc *= p;
  FinSubgroup D = B.image_mod(Nc).derived_subgroup();
  return OpenSubgroup(Ambient::SL2, D).certify_level();
}

std::vector<std::set<std::vector<int64_t>>> all_subgroups(const AbelianQuotient& Q, int64_t cap) {
  std::vector<std::vector<int64_t>> elements;
  {
    std::vector<int64_t> e(Q.basis_orders().size(), 0);
    while (true) {
      elements.push_back(e);
      size_t k = 0;
      while (k < e.size()) {
        if (++e[k] < Q.basis_orders()[k]) break;
        e[k] = 0;
        ++k;
      }
      if (k == e.size()) break;
    }
  }
  auto closure = [&](std::set<std::vector<int64_t>> s) {
    std::vector<std::vector<int64_t>> queue(s.begin(), s.end());
    for (size_t i = 0; i < queue.size(); ++i)
      for (auto x : std::vector<std::vector<int64_t>>(s.begin(), s.end())) {
        auto y = Q.add(queue[i], x);
        if (s.insert(y).second) queue.push_back(y);
      }
    return s;
  };
  std::set<std::set<std::vector<int64_t>>> seen;
  std::vector<std::set<std::vector<int64_t>>> queue;
  std::set<std::vector<int64_t>> triv{std::vector<int64_t>(Q.basis_orders().size(), 0)};
  seen.insert(triv);
  queue.push_back(triv);
  for (size_t i = 0; i < queue.size(); ++i) {
    for (auto& x : elements) {
      if (queue[i].count(x)) continue;
      auto bigger = queue[i];
      bigger.insert(x);
      auto cl = closure(bigger);
      if (seen.insert(cl).second) {
        if ((int64_t)seen.size() > cap)
          throw std::domain_error("maximal_agreeable: subgroup enumeration cap exceeded");
        queue.push_back(cl);
      }
    }
  }
  return std::vector<std::set<std::vector<int64_t>>>(seen.begin(), seen.end());
}

struct SmallGroup {
  std::vector<ZModMat> reps;
  std::vector<std::vector<int>> mul;
  std::vector<int> order_of;
  std::vector<int64_t> order_hist;
};

SmallGroup quotient_table(const FinSubgroup& G, const FinSubgroup& H, int64_t cap) {
  SmallGroup out;
  ZModMat id = ZModMat::identity(G.modulus());
  std::map<unsigned __int128, int> idx;
  auto find = [&](const ZModMat& x) -> int {
    auto it = idx.find(x.key128());
    if (it != idx.end()) return it->second;
    for (size_t i = 0; i < out.reps.size(); ++i)
      if (H.contains(out.reps[i].inverse() * x)) {
        idx[x.key128()] = (int)i;
        return (int)i;
      }
    return -1;
  };
  out.reps.push_back(id);
  idx[id.key128()] = 0;
  for (size_t i = 0; i < out.reps.size(); ++i)
    for (const auto& g : G.generators()) {
      ZModMat x = out.reps[i] * g;
      if (find(x) < 0) {
        if ((int64_t)out.reps.size() >= cap)
          throw std::domain_error("maximal_agreeable: quotient cap exceeded");
        idx[x.key128()] = (int)out.reps.size();
        out.reps.push_back(x);
      }
    }
  int n = (int)out.reps.size();
  out.mul.assign(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.mul[i][j] = find(out.reps[i] * out.reps[j]);
  out.order_of.assign(n, 1);
  for (int i = 1; i < n; ++i) {
    int y = i, o = 1;
    while (y != 0) {
      y = out.mul[y][i];
      ++o;
      if (o > n + 1) throw std::logic_error("quotient_table: order runaway");
    }
    out.order_of[i] = o;
  }
  out.order_hist.assign(out.order_of.begin(), out.order_of.end());
  std::sort(out.order_hist.begin(), out.order_hist.end());
  return out;
}

std::vector<std::vector<int>> group_isos(const SmallGroup& A, const SmallGroup& B, int64_t cap) {
  std::vector<std::vector<int>> isos;
  int n = (int)A.reps.size();
  if ((int)B.reps.size() != n) return isos;
  if (A.order_hist != B.order_hist) return isos;
  std::vector<int> gens;
  {
    std::set<int> have{0};
    while ((int)have.size() < n) {
      int pick = -1;
      for (int i = 0; i < n && pick < 0; ++i)
        if (!have.count(i)) pick = i;
      gens.push_back(pick);
      std::vector<int> q(have.begin(), have.end());
      have.insert(pick);
      q.push_back(pick);
      for (size_t t = 0; t < q.size(); ++t)
        for (int g : std::vector<int>(have.begin(), have.end())) {
          int x = A.mul[q[t]][g];
          if (have.insert(x).second) q.push_back(x);
          int y = A.mul[g][q[t]];
          if (have.insert(y).second) q.push_back(y);
        }
    }
  }
  std::vector<int> img(n, -1);
  img[0] = 0;
  int64_t nodes = 0;
  std::function<void(size_t)> rec = [&](size_t gi) {
    if (++nodes > cap) throw std::domain_error("maximal_agreeable: isomorphism search cap exceeded");
    if (gi == gens.size()) {
      for (int i = 0; i < n; ++i)
        if (img[i] < 0) return;
      std::set<int> vals(img.begin(), img.end());
      if ((int)vals.size() == n) isos.push_back(img);
      return;
    }
    int a = gens[gi];
    for (int b = 0; b < n; ++b) {
      if (A.order_of[a] != B.order_of[b]) continue;
      if (img[a] >= 0 && img[a] != b) continue;
      std::vector<int> save = img;
      img[a] = b;
      bool ok = true, changed = true;
      while (changed && ok) {
        changed = false;
        for (int i = 0; i < n && ok; ++i) {
          if (img[i] < 0) continue;
          for (int j = 0; j < n && ok; ++j) {
            if (img[j] < 0) continue;
            int p = A.mul[i][j], q = B.mul[img[i]][img[j]];
            if (img[p] < 0) {
              img[p] = q;
              changed = true;
            } else if (img[p] != q) {
              ok = false;
            }
          }
        }
      }
      if (ok) rec(gi + 1);
      img = save;
    }
  };
  rec(0);
  return isos;
}

void push_candidate(std::vector<OpenSubgroup>& out, const OpenSubgroup& calGc, OpenSubgroup cand) {
  cand = cand.certify_level();
  if (cand.same_group(calGc)) return;
  if (!calGc.contains(cand)) return;
  if (!is_agreeable(cand)) return;
  int64_t L = lcm64(std::max<int64_t>(cand.level(), 2), std::max<int64_t>(calGc.level(), 2));
  FinSubgroup a = cand.image_mod(L), b = calGc.image_mod(L);
  for (auto& [p, e] : factorize(L)) {
    int64_t q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    if (!a.project(q).same_group(b.project(q))) return;
  }
  for (auto& prev : out)
    if (prev.same_group(cand)) return;
  out.push_back(cand);
}

}  // namespace

std::vector<OpenSubgroup> maximal_agreeable(const OpenSubgroup& calG,
                                            const MaximalAgreeableOptions& opt) {
  if (!is_agreeable(calG)) throw std::domain_error("maximal_agreeable: input not agreeable");
  OpenSubgroup Gc = calG.certify_level();
  int64_t level = std::max<int64_t>(Gc.level(), 1);
  int64_t N = radical(level);
  std::vector<OpenSubgroup> out;

  // ---- same prime support: fiber products over pairs (C1, C2)
  for (int64_t d1 : divisors(N)) {
    if (d1 == 1 || d1 * d1 > N) continue;
    int64_t d2 = N / d1;
    (void)d2;
    int64_t L1 = 1, L2 = 1;
    for (auto& [p, e] : factorize(level)) {
      int64_t q = 1;
      for (int i = 0; i < e; ++i) q *= p;
      (d1 % p == 0 ? L1 : L2) *= q;
    }
    FinSubgroup GL = Gc.image_mod(level);
    FinSubgroup B1 = kernel_of_projection(GL, L1, L2, opt.coset_cap);
    FinSubgroup B2 = kernel_of_projection(GL, L2, L1, opt.coset_cap);
    if (!B1.contains_all_scalars() || !B2.contains_all_scalars()) continue;
    OpenSubgroup C1base = local_commutator(OpenSubgroup(Ambient::GL2, B1), prime_divisors(L1));
    OpenSubgroup C2base = local_commutator(OpenSubgroup(Ambient::GL2, B2), prime_divisors(L2));
    auto make_K = [&](const OpenSubgroup& Cb, int64_t Lpart) {
      int64_t m = lcm64(std::max<int64_t>(Cb.level(), 1), Lpart);
      FinSubgroup img = Cb.image_mod(m);
      std::vector<ZModMat> extra;
      for (int64_t u : unit_group_generators(m)) extra.push_back(ZModMat::scalar(m, u));
      return img.joined_with(extra);
    };
    FinSubgroup K1 = make_K(C1base, L1), K2 = make_K(C2base, L2);
    int64_t m1 = K1.modulus(), m2 = K2.modulus();
    FinSubgroup B1m = OpenSubgroup(Ambient::GL2, B1).image_mod(m1);
    FinSubgroup B2m = OpenSubgroup(Ambient::GL2, B2).image_mod(m2);
    FinSubgroup G1m = OpenSubgroup(Ambient::GL2, GL.project(L1)).image_mod(m1);
    FinSubgroup G2m = OpenSubgroup(Ambient::GL2, GL.project(L2)).image_mod(m2);
    AbelianQuotient Q1(B1m, K1), Q2(B2m, K2);
    auto subs1 = all_subgroups(Q1, opt.subgroup_cap);
    auto subs2 = all_subgroups(Q2, opt.subgroup_cap);
    auto stable = [&](const AbelianQuotient& Q, const FinSubgroup& Gm,
                      const std::set<std::vector<int64_t>>& C) {
      for (auto& lab : C) {
        ZModMat r = Q.rep(lab);
        for (const auto& g : Gm.generators())
          if (!C.count(Q.label(g * r * g.inverse()))) return false;
      }
      return true;
    };
    // Candidate kernels: proper stable subgroups.  Maximality of the resulting
    // graph groups is decided afterwards by containment filtering plus an
    // explicit intermediate-subgroup certificate; filtering pairs by
    // maximal-normality of C_i alone can discard maximal agreeable graphs
    // whose coarser pairings collapse to non-agreeable groups.
    auto usable = [&](const AbelianQuotient& Q, const FinSubgroup& Gm,
                      const std::set<std::vector<int64_t>>& C) {
      if ((int64_t)C.size() == Q.order()) return false;
      return stable(Q, Gm, C);
    };
    for (auto& C1lab : subs1) {
      if (!usable(Q1, G1m, C1lab)) continue;
      for (auto& C2lab : subs2) {
        if (C1lab.size() * Q2.order() != C2lab.size() * Q1.order()) continue;
        if (!usable(Q2, G2m, C2lab)) continue;
        auto group_of = [&](const AbelianQuotient& Q, const FinSubgroup& K,
                            const std::set<std::vector<int64_t>>& labs) {
          std::vector<ZModMat> gens = K.generators();
          for (auto& lab : labs) gens.push_back(Q.rep(lab));
          return FinSubgroup(K.modulus(), reduce_generators(K.modulus(), gens));
        };
        FinSubgroup C1 = group_of(Q1, K1, C1lab), C2 = group_of(Q2, K2, C2lab);
        AbelianQuotient BC1(B1m, C1), BC2(B2m, C2);
        auto s1 = BC1.basis_orders(), s2 = BC2.basis_orders();
        std::sort(s1.begin(), s1.end());
        std::sort(s2.begin(), s2.end());
        if (s1 != s2) continue;
        SmallGroup T1 = quotient_table(G1m, C1, opt.coset_cap);
        SmallGroup T2 = quotient_table(G2m, C2, opt.coset_cap);
        auto isos = group_isos(T1, T2, opt.iso_cap);
        for (auto& theta : isos) {
          int64_t M = m1 * m2;
          std::vector<ZModMat> gens;
          auto lift = [&](const ZModMat& a, const ZModMat& b) {
            return ZModMat(M, crt(a.a, m1, b.a, m2), crt(a.b, m1, b.b, m2), crt(a.c, m1, b.c, m2),
                           crt(a.d, m1, b.d, m2));
          };
          ZModMat id1 = ZModMat::identity(m1), id2 = ZModMat::identity(m2);
          for (const auto& c : C1.generators()) gens.push_back(lift(c, id2));
          for (const auto& c : C2.generators()) gens.push_back(lift(id1, c));
          for (size_t i = 0; i < T1.reps.size(); ++i)
            gens.push_back(lift(T1.reps[i], T2.reps[theta[i]]));
          push_candidate(out, Gc,
                         OpenSubgroup(Ambient::GL2, FinSubgroup(M, reduce_generators(M, gens))));
        }
      }
    }
  }

  auto characters2 = [](const AbelianQuotient& Q) {
    std::vector<std::vector<int64_t>> chars;
    size_t k = Q.basis_orders().size();
    std::vector<int64_t> c(k, 0);
    while (true) {
      bool valid = true, nontriv = false;
      for (size_t i = 0; i < k; ++i) {
        if (c[i] == 1 && Q.basis_orders()[i] % 2 != 0) valid = false;
        nontriv = nontriv || c[i] == 1;
      }
      if (valid && nontriv) chars.push_back(c);
      size_t t = 0;
      while (t < k) {
        if (++c[t] < 2) break;
        c[t] = 0;
        ++t;
      }
      if (t == k) break;
    }
    return chars;
  };
  auto char_val = [](const AbelianQuotient& Q, const std::vector<int64_t>& chr, const ZModMat& x) {
    auto lab = Q.label(x);
    int64_t v = 0;
    for (size_t i = 0; i < lab.size(); ++i)
      if (chr[i]) v += lab[i];
    return (int)mod_reduce(v, 2);
  };

  // ---- new prime 2 (M = 2N), only when the level is odd and > 1
  if (level % 2 != 0 && level > 1) {
    int64_t m = level;
    FinSubgroup gl8(8, gl2_generators(8));
    FinSubgroup der8 = gl8.derived_subgroup().joined_with(
        {ZModMat::scalar(8, 3), ZModMat::scalar(8, 5), ZModMat::scalar(8, 7)});
    AbelianQuotient A2(gl8, der8);
    FinSubgroup Gm = Gc.image_mod(m);
    std::vector<ZModMat> scalars_m;
    for (int64_t u : unit_group_generators(m)) scalars_m.push_back(ZModMat::scalar(m, u));
    FinSubgroup derm = Gm.derived_subgroup().joined_with(scalars_m);
    AbelianQuotient AN(Gm, derm);
    auto kernel_of_char2 = [&](const FinSubgroup& G, const AbelianQuotient& Q,
                               const std::vector<int64_t>& chr) {
      ZModMat id = ZModMat::identity(G.modulus());
      ZModMat odd_rep = id;
      bool have_odd = false;
      for (const auto& g : G.generators())
        if (char_val(Q, chr, g) == 1) {
          odd_rep = g;
          have_odd = true;
          break;
        }
      if (!have_odd) throw std::domain_error("maximal_agreeable: character not surjective");
      std::vector<ZModMat> schreier;
      for (const ZModMat& r : {id, odd_rep})
        for (const auto& g : G.generators()) {
          ZModMat x = r * g;
          ZModMat s = (char_val(Q, chr, x) == 0) ? x : x * odd_rep.inverse();
          if (!(s == id)) schreier.push_back(s);
        }
      return std::make_pair(FinSubgroup(G.modulus(), reduce_generators(G.modulus(), schreier)),
                            odd_rep);
    };
    for (auto& ac : characters2(A2)) {
      auto [ker_a, a1] = kernel_of_char2(gl8, A2, ac);
      for (auto& bc : characters2(AN)) {
        auto [ker_b, b1] = kernel_of_char2(Gm, AN, bc);
        int64_t M = 8 * m;
        std::vector<ZModMat> gens;
        auto lift = [&](const ZModMat& a, const ZModMat& b) {
          return ZModMat(M, crt(a.a, 8, b.a, m), crt(a.b, 8, b.b, m), crt(a.c, 8, b.c, m),
                         crt(a.d, 8, b.d, m));
        };
        for (const auto& kx : ker_a.generators()) gens.push_back(lift(kx, ZModMat::identity(m)));
        for (const auto& kx : ker_b.generators()) gens.push_back(lift(ZModMat::identity(8), kx));
        gens.push_back(lift(a1, b1));
        push_candidate(out, Gc, OpenSubgroup(Ambient::GL2, FinSubgroup(M, gens)));
      }
    }
  }

  // ---- new prime 3 (M = 3N): psi: calG_N ->> S3
  if (level % 3 != 0 && level > 1) {
    int64_t m = level;
    FinSubgroup Gm0 = Gc.image_mod(m);
    FinSubgroup Gm(m, reduce_generators(m, Gm0.generators()));
    // try to shrink the generating set; the hom search is exponential in it
    {
      std::mt19937_64 rng(12345);
      const auto& base = Gm.generators();
      auto rand_word = [&]() {
        ZModMat w = ZModMat::identity(m);
        for (int i = 0; i < 6; ++i) w = w * base[rng() % base.size()];
        return w;
      };
      for (size_t want = 2; want < base.size(); ++want) {
        bool found = false;
        for (int attempt = 0; attempt < 60 && !found; ++attempt) {
          std::vector<ZModMat> cand;
          for (size_t i = 0; i < want; ++i) cand.push_back(rand_word());
          FinSubgroup g(m, cand);
          if (g.order() == Gm.order()) {
            Gm = g;
            found = true;
          }
        }
        if (found) break;
      }
    }
    const auto& gens = Gm.generators();
    int64_t q = 5;
    while (m % q == 0) q += 2;
    // sign characters: order-2 characters of the abelianization
    FinSubgroup derm = Gm.derived_subgroup();
    AbelianQuotient ABm(Gm, derm);
    auto sign_chars = characters2(ABm);
    sign_chars.push_back(std::vector<int64_t>(ABm.basis_orders().size(), 0));  // allow trivial sign? S3 surjective needs nontrivial sign; keep only nontrivial
    sign_chars.pop_back();
    auto elt_order = [&](const ZModMat& x) {
      ZModMat y = x;
      int64_t o = 1;
      while (!(y == ZModMat::identity(m))) {
        y = y * x;
        ++o;
        if (o > 100000) return (int64_t)-1;
      }
      return o;
    };
    std::vector<int64_t> gen_orders;
    for (const auto& g : gens) gen_orders.push_back(elt_order(g));
    auto perms = all_perm3();
    auto perm_order = [](const Perm3& p) {
      if (perm3_is_id(p)) return 1;
      if (p == Perm3{1, 2, 0} || p == Perm3{2, 0, 1}) return 3;
      return 2;
    };
    std::vector<std::vector<Perm3>> homs;
    Int gm_order = Gm.order();
    for (auto& sc : sign_chars) {
      // candidate images per generator, constrained by the sign character and order
      std::vector<std::vector<Perm3>> options(gens.size());
      for (size_t i = 0; i < gens.size(); ++i) {
        int sign_needed = (int)char_val(ABm, sc, gens[i]);
        for (auto& pm : perms) {
          bool odd = perm_order(pm) == 2;
          if ((odd ? 1 : 0) != sign_needed) continue;
          if (gen_orders[i] > 0 && gen_orders[i] % perm_order(pm) != 0) continue;
          options[i].push_back(pm);
        }
      }
      bool any_empty = false;
      for (auto& o : options) any_empty = any_empty || o.empty();
      if (any_empty) continue;
      std::vector<size_t> idx(gens.size(), 0);
      int64_t tried = 0;
      while (true) {
        if (++tried > opt.iso_cap)
          throw std::domain_error("maximal_agreeable: S3 hom search cap exceeded");
        std::vector<ZModMat> graph_gens;
        for (size_t i = 0; i < gens.size(); ++i) {
          ZModMat pm = perm3_matrix(options[i][idx[i]], q);
          graph_gens.push_back(ZModMat(m * q, crt(gens[i].a, m, pm.a, q), crt(gens[i].b, m, pm.b, q),
                                       crt(gens[i].c, m, pm.c, q), crt(gens[i].d, m, pm.d, q)));
        }
        FinSubgroup graph(m * q, graph_gens);
        if (graph.order() == gm_order && graph.project(q).order() == 6) {
          std::vector<Perm3> imgs;
          for (size_t i = 0; i < gens.size(); ++i) imgs.push_back(options[i][idx[i]]);
          homs.push_back(imgs);
        }
        size_t t = 0;
        while (t < gens.size()) {
          if (++idx[t] < options[t].size()) break;
          idx[t] = 0;
          ++t;
        }
        if (t == gens.size()) break;
      }
    }
    if (!homs.empty()) {
      FinSubgroup gl3(3, gl2_generators(3));
      std::vector<ZModMat> gl3_els = gl3.elements();
      auto phi3_preimage = [&](const Perm3& v) {
        for (const auto& e : gl3_els)
          if (phi3(e) == v) return e;
        throw std::logic_error("maximal_agreeable: phi3 preimage missing");
      };
      FinSubgroup ker_phi3(3, reduce_generators(3, [&] {
                             std::vector<ZModMat> ks;
                             for (const auto& e : gl3_els)
                               if (perm3_is_id(phi3(e))) ks.push_back(e);
                             return ks;
                           }()));
      for (auto& images : homs) {
        std::map<Perm3, ZModMat> rep;
        rep[Perm3{0, 1, 2}] = ZModMat::identity(m);
        std::vector<Perm3> queue{Perm3{0, 1, 2}};
        for (size_t i = 0; i < queue.size(); ++i)
          for (size_t gi = 0; gi < gens.size(); ++gi) {
            Perm3 w = perm3_compose(queue[i], images[gi]);
            if (!rep.count(w)) {
              rep[w] = rep[queue[i]] * gens[gi];
              queue.push_back(w);
            }
          }
        std::vector<ZModMat> ker_psi;
        for (auto& [v, r] : rep)
          for (size_t gi = 0; gi < gens.size(); ++gi) {
            ZModMat x = r * gens[gi];
            Perm3 w = perm3_compose(v, images[gi]);
            ZModMat s = x * rep.at(w).inverse();
            if (!(s == ZModMat::identity(m))) ker_psi.push_back(s);
          }
        int64_t M = 3 * m;
        std::vector<ZModMat> gcand;
        auto lift = [&](const ZModMat& a3, const ZModMat& bm) {
          return ZModMat(M, crt(a3.a, 3, bm.a, m), crt(a3.b, 3, bm.b, m), crt(a3.c, 3, bm.c, m),
                         crt(a3.d, 3, bm.d, m));
        };
        for (const auto& kx : ker_phi3.generators()) gcand.push_back(lift(kx, ZModMat::identity(m)));
        for (const auto& kx : reduce_generators(m, ker_psi))
          gcand.push_back(lift(ZModMat::identity(3), kx));
        for (auto& [v, r] : rep) gcand.push_back(lift(phi3_preimage(v), r));
        push_candidate(out, Gc,
                       OpenSubgroup(Ambient::GL2, FinSubgroup(M, reduce_generators(M, gcand))));
      }
    }
  }

  // ---- new primes 2 and 3 together (M = 6N)
  if (level % 2 != 0 && level % 3 != 0) {
    FinSubgroup gl3(3, gl2_generators(3));
    std::vector<ZModMat> gl3_els = gl3.elements();
    FinSubgroup ker_phi3(3, reduce_generators(3, [&] {
                           std::vector<ZModMat> ks;
                           for (const auto& e : gl3_els)
                             if (perm3_is_id(phi3(e))) ks.push_back(e);
                           return ks;
                         }()));
    auto perm_of_mod2 = [&](const ZModMat& x) {
      auto img = [&](int64_t a, int64_t b) {
        int64_t u = mod_reduce(x.a * a + x.b * b, 2), v = mod_reduce(x.c * a + x.d * b, 2);
        if (u == 1 && v == 0) return 0;
        if (u == 0 && v == 1) return 1;
        return 2;
      };
      return Perm3{img(1, 0), img(0, 1), img(1, 1)};
    };
    FinSubgroup g2full(2, gl2_generators(2));
    std::vector<ZModMat> g2els = g2full.elements();
    for (auto& theta : all_perm3()) {
      Perm3 theta_inv{0, 1, 2};
      for (auto& cand : all_perm3())
        if (perm3_is_id(perm3_compose(theta, cand))) theta_inv = cand;
      std::vector<ZModMat> gens6;
      auto lift6 = [&](const ZModMat& a3, const ZModMat& b2) {
        return ZModMat(6, crt(a3.a, 3, b2.a, 2), crt(a3.b, 3, b2.b, 2), crt(a3.c, 3, b2.c, 2),
                       crt(a3.d, 3, b2.d, 2));
      };
      for (const auto& kx : ker_phi3.generators()) gens6.push_back(lift6(kx, ZModMat::identity(2)));
      for (const auto& b : g2els) {
        Perm3 target = perm3_compose(perm3_compose(theta, perm_of_mod2(b)), theta_inv);
        gens6.push_back(lift6([&] {
                          for (const auto& e : gl3_els)
                            if (phi3(e) == target) return e;
                          throw std::logic_error("maximal_agreeable: missing phi3 preimage");
                        }(),
                        b));
      }
      if (level > 1) {
        int64_t MM = 6 * level;
        FinSubgroup GNm = Gc.image_mod(level);
        std::vector<ZModMat> big;
        for (const auto& g : gens6)
          big.push_back(ZModMat(MM, crt(g.a, 6, 1, level), crt(g.b, 6, 0, level),
                                crt(g.c, 6, 0, level), crt(g.d, 6, 1, level)));
        for (const auto& g : GNm.generators())
          big.push_back(ZModMat(MM, crt(1, 6, g.a, level), crt(0, 6, g.b, level),
                                crt(0, 6, g.c, level), crt(1, 6, g.d, level)));
        push_candidate(out, Gc,
                       OpenSubgroup(Ambient::GL2, FinSubgroup(MM, reduce_generators(MM, big))));
      } else {
        push_candidate(out, Gc,
                       OpenSubgroup(Ambient::GL2, FinSubgroup(6, reduce_generators(6, gens6))));
      }
    }
  }

  // ---- maximality filters
  std::vector<OpenSubgroup> maximal;
  for (size_t i = 0; i < out.size(); ++i) {
    bool is_max = true;
    for (size_t j = 0; j < out.size() && is_max; ++j)
      if (i != j && out[j].contains(out[i]) && !out[i].contains(out[j])) is_max = false;
    if (is_max) maximal.push_back(out[i]);
  }
  if (opt.certify_maximality) {
    for (auto& G : maximal) {
      int64_t L = lcm64(std::max<int64_t>(G.level(), 2), std::max<int64_t>(Gc.level(), 2));
      FinSubgroup GI = G.image_mod(L), CI = Gc.image_mod(L);
      std::vector<ZModMat> reps{ZModMat::identity(L)};
      for (size_t i = 0; i < reps.size(); ++i) {
        if (Int(reps.size()) * GI.order() >= CI.order()) break;
        for (const auto& g : CI.generators()) {
          ZModMat x = reps[i] * g;
          bool known = false;
          for (const auto& r : reps)
            if (GI.contains(r.inverse() * x)) known = true;
          if (!known) reps.push_back(x);
        }
      }
      // walk the full interval lattice between G and calG
      std::vector<FinSubgroup> lattice{GI};
      for (size_t i = 0; i < lattice.size(); ++i) {
        for (const auto& r : reps) {
          if (lattice[i].contains(r)) continue;
          FinSubgroup H = lattice[i].joined_with({r});
          bool seen = false;
          for (const auto& other : lattice)
            if (other.same_group(H)) seen = true;
          if (!seen) {
            if ((int64_t)lattice.size() > 500)
              throw std::domain_error("maximal_agreeable: intermediate lattice cap exceeded");
            lattice.push_back(H);
          }
        }
      }
      for (const auto& H : lattice) {
        if (H.same_group(GI) || H.order() == CI.order()) continue;
        OpenSubgroup OH(Ambient::GL2, H);
        if (is_agreeable(OH))
          throw std::logic_error(
              "maximal_agreeable: certification failed, intermediate agreeable group found");
      }
    }
  }
  std::sort(maximal.begin(), maximal.end(), [](const OpenSubgroup& a, const OpenSubgroup& b) {
    if (a.modulus() != b.modulus()) return a.modulus() < b.modulus();
    if (a.image().order() != b.image().order()) return a.image().order() < b.image().order();
    return a.image().generators() < b.image().generators();
  });
  return maximal;
}

}  // namespace openimage

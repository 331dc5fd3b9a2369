#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "openimage/abelian.hpp"
#include "openimage/models.hpp"

using namespace openimage;

TEST_CASE("torsion function expansions") {
  // h_alpha has no constant term and leading term n^2 zeta^{s} q^{r}
  for (int64_t N : {5, 7}) {
    for (int64_t r = 1; r < N; ++r) {
      QSeries h = torsion_h_qexp(N, r, 2, 3 * N);
      CHECK(h.coeff(0).is_zero());
      // below N/2 only the leading lattice term contributes to q^r
      if (2 * r < N) CHECK(h.coeff(r) == CycNum::root_of_unity(N, 2));
    }
  }
  // x_alpha transforms under T and the determinant twist like the index
  int64_t N = 5, prec = 40;
  QSeries x10 = torsion_x_qexp(N, 1, 0, prec);
  QSeries x11 = torsion_x_qexp(N, 1, 1, prec);
  // x * T = x_{alpha T}: alpha (1,0) T = (1,1); the slash by T is tau -> tau+1,
  // i.e. q_N -> zeta_N q_N
  CHECK(x10.shift_tau(1) == x11);
  // sigma_d coefficientwise equals replacing s by ds
  QSeries x12 = torsion_x_qexp(N, 1, 2, prec);
  CHECK(x11.galois(2) == x12);
  // same checks for h_alpha (weight 3 slash by T is the same substitution)
  QSeries h10 = torsion_h_qexp(N, 1, 0, prec), h11 = torsion_h_qexp(N, 1, 1, prec);
  CHECK(h10.shift_tau(1) == h11);
  CHECK_THROWS(torsion_h_qexp(5, 0, 1, 10));
}

TEST_CASE("model parameters") {
  // full level: genus 0, single cusp; k = 2 gives deg 1 >= 1
  // for the j-line the line bundle first reaches degree 2g+1 = 1 at weight 12
  CuspStructure cs(FinSubgroup(3, gl2_generators(3)));
  auto [k, e] = choose_model_params(cs);
  CHECK(k == 12);
  auto sp = std::make_shared<ModularFormSpace>(FinSubgroup(3, gl2_generators(3)), k);
  auto basis = sp->basis();
  auto V = vanishing_subspace(basis, e);
  // deg F = base - sum(e); dim V = deg F - g + 1 when deg F > 2g-2
  Rat base = frac(k, 2) * Rat(-2) + frac(k, 2) * Rat(1) + Rat(k / 4) * Rat(1) + Rat(k / 3) * Rat(1);
  base.canonicalize();
  int64_t degF = Int(base.get_num()).get_si();
  for (auto x : e) degF -= x;
  CHECK(degF == 1);
  CHECK((int64_t)V.size() == degF - 0 + 1);
  // genus 0 with several cusps: weight 2 suffices for Borel mod 8 (6 cusps)
  CuspStructure cs8(FinSubgroup(8, borel_generators(8)));
  auto [k8, e8] = choose_model_params(cs8);
  CHECK(k8 == 2);
}

TEST_CASE("P1 model for the full group") {
  ProjectiveModel m = curve_model(FinSubgroup(5, gl2_generators(5)));
  CHECK(m.genus == 0);
  CHECK(m.coords.size() == 2);
  CHECK(m.ideal.empty());
}

TEST_CASE("degree-1 relation when coordinates repeat") {
  FinSubgroup g(5, gl2_generators(5));
  auto sp = std::make_shared<ModularFormSpace>(g, 4);
  auto basis = sp->basis(sturm_bound(sp->cusps(), 12, true).b + 6);
  REQUIRE(!basis.empty());
  std::vector<ModForm> coords{basis[0], basis[0]};
  auto I1 = relations(coords, 1);
  REQUIRE(I1.size() == 1);
  CHECK(I1[0].terms.size() == 2);  // x0 - x1 up to sign/scale
}

TEST_CASE("X0(22): genus 2 large-degree model") {
  ProjectiveModel m = curve_model(FinSubgroup(22, borel_generators(22)));
  CHECK(m.genus == 2);
  CHECK(!m.canonical);
  // deg F = 5 embedding into P^3: one quadric, six cubics
  CHECK(m.coords.size() == 4);
  int64_t q2 = 0, q3 = 0;
  for (auto& p : m.ideal) (p.degree() == 2 ? q2 : q3) += 1;
  CHECK(q2 == 1);
  CHECK(q3 >= 6);  // includes multiples of the quadric
  // cusp images are finite coordinates, not all zero
  for (auto& pt : m.cusp_images) {
    bool nonzero = false;
    for (auto& c : pt) nonzero = nonzero || !c.is_zero();
    CHECK(nonzero);
  }
}

TEST_CASE("X0(30): genus 3 hyperelliptic detection") {
  ProjectiveModel m = curve_model(FinSubgroup(30, borel_generators(30)));
  CHECK(m.genus == 3);
  CHECK(m.hyperelliptic);
  CHECK(!m.canonical);
}

TEST_CASE("X0(34): genus 3 canonical plane quartic") {
  ProjectiveModel m = curve_model(FinSubgroup(34, borel_generators(34)));
  CHECK(m.genus == 3);
  CHECK(!m.hyperelliptic);
  CHECK(m.canonical);
  CHECK(m.coords.size() == 3);
  // dim I_2 = 0 and the ideal is generated by one quartic
  int64_t quartics = 0;
  for (auto& p : m.ideal) {
    CHECK(p.degree() != 2);
    if (p.degree() == 4) ++quartics;
  }
  CHECK(quartics == 1);
}

TEST_CASE("j-map of the Borel mod 2 curve has degree 3") {
  FinSubgroup b(4, [] {
    // preimage of Borel(2) at modulus 4
    OpenSubgroup o(Ambient::GL2, FinSubgroup(2, borel_generators(2)));
    return o.image_mod(4).generators();
  }());
  ProjectiveModel m = curve_model(b);
  CHECK(m.genus == 0);
  REQUIRE(m.coords.size() == 2);
  JMap jm = jmap(m, 6);
  CHECK(jm.map_degree == 3);
  CHECK(jm.F1.degree() == jm.F2.degree());
  // verify the identity F1(f) Delta = F2(f) E4^3 beyond the pinning bound
  const ModularFormSpace& sp = *m.space;
  int64_t n = jm.F1.degree();
  SturmData st = sturm_bound(sp.cusps(), n * m.k + 12, true);
  std::vector<std::vector<QSeries>> coords;
  for (auto& f : m.coords) coords.push_back(f.expansions);
  auto v1 = jm.F1.evaluate(coords);
  auto v2 = jm.F2.evaluate(coords);
  int64_t N = sp.modulus();
  QSeries delta = classical_Delta(st.b / N + 3).rescale(N);
  QSeries e43 = classical_E4(st.b / N + 3).rescale(N);
  e43 = e43 * e43 * e43;
  for (size_t ci = 0; ci < v1.size(); ++ci) {
    QSeries diff = v1[ci] * delta - v2[ci] * e43;
    CHECK(diff.known_zero());
    CHECK(diff.precision() > st.b);
  }
}

TEST_CASE("hauptmodul expression: identity and constants") {
  FinSubgroup b(4, [] {
    OpenSubgroup o(Ambient::GL2, FinSubgroup(2, borel_generators(2)));
    return o.image_mod(4).generators();
  }());
  ProjectiveModel m = curve_model(b);
  auto t = hauptmodul_series(m);
  const CuspStructure& cs = m.space->cusps();
  // h = t: expression t/1
  RatFunc r1 = express_in_hauptmodul(cs, t, t, 1, 3);
  CHECK(r1.num.size() >= 2);
  // h = constant 7
  std::vector<QSeries> c7;
  for (auto& q : t) c7.push_back(QSeries::one(q.modulus(), q.precision()) * Rat(7));
  RatFunc r2 = express_in_hauptmodul(cs, t, c7, 0, 3);
  // evaluate: num/den must be the constant 7: num = 7*den
  REQUIRE(r2.num.size() == r2.den.size());
  for (size_t i = 0; i < r2.num.size(); ++i) CHECK(r2.num[i] == Rat(7) * r2.den[i]);
}

TEST_CASE("j in the hauptmodul of X0(2) matches the jmap route") {
  FinSubgroup b(4, [] {
    OpenSubgroup o(Ambient::GL2, FinSubgroup(2, borel_generators(2)));
    return o.image_mod(4).generators();
  }());
  ProjectiveModel m = curve_model(b);
  JMap jm = jmap(m, 6);
  for (auto& f : m.coords) f = with_precision(f, 160);
  auto t = hauptmodul_series(m);
  const ModularFormSpace& sp = *m.space;
  int64_t N = sp.modulus();
  // j as a per-cusp series
  int64_t prec = 0;
  for (auto& q : t) prec = std::max(prec, q.precision());
  QSeries jq = classical_j(prec / N + 3).rescale(N);
  std::vector<QSeries> js(t.size(), jq);
  RatFunc rf = express_in_hauptmodul(sp.cusps(), t, js, 3, 6);
  // the two routes agree as rational functions: cross-multiply coefficients
  // rf = j = F1h/F2h; jmap gives j = F1(f)/F2(f) with f = (f0, f1); on the
  // hauptmodul chart x0 = t, x1 = 1 they agree up to scalar
  auto eval_univ = [&](const HPoly& h, const std::vector<Rat>& tv) {
    // dehomogenize: x0 -> t, x1 -> 1: evaluate at a rational point tv[0]
    Rat acc(0);
    for (auto& [e, c] : h.terms) {
      Rat term = c;
      for (int i = 0; i < e[0]; ++i) term *= tv[0];
      acc += term;
    }
    return acc;
  };
  auto eval_rf = [&](const RatFunc& f, const Rat& x) {
    Rat n(0), d(0), p(1);
    for (size_t i = 0; i < f.num.size() || i < f.den.size(); ++i) {
      if (i < f.num.size()) n += f.num[i] * p;
      if (i < f.den.size()) d += f.den[i] * p;
      p *= x;
    }
    return std::pair<Rat, Rat>{n, d};
  };
  for (Rat x : {Rat(2), Rat(3), Rat(-1), Rat(7, 2)}) {
    auto [n1, d1] = eval_rf(rf, x);
    Rat n2 = eval_univ(jm.F1, {x}), d2 = eval_univ(jm.F2, {x});
    if (d1 != 0 && d2 != 0) CHECK(n1 * d2 == n2 * d1);
  }
}

TEST_CASE("relative minimal polynomial of the X0(2) hauptmodul over the j-line") {
  // base curve: the j-line (full level); subgroup: Borel mod 2 at modulus 4
  ProjectiveModel base = curve_model(FinSubgroup(4, gl2_generators(4)));
  for (auto& f : base.coords) f = with_precision(f, 700);
  FinSubgroup b(4, [] {
    OpenSubgroup o(Ambient::GL2, FinSubgroup(2, borel_generators(2)));
    return o.image_mod(4).generators();
  }());
  ProjectiveModel sub = curve_model(b);
  for (auto& f : sub.coords) f = with_precision(f, 700);
  // h = f0/f1 on X0(2); coset lifts of Borel(2)\SL2(Z): I, S, ST
  std::vector<std::array<int64_t, 4>> lifts{{1, 0, 0, 1}, {0, -1, 1, 0}, {0, -1, 1, 1}};
  RelMinPoly P = relative_minpoly(sub.coords[0], sub.coords[1], base, lifts);
  CHECK(P.coeffs.size() == 3);
}

TEST_CASE("universal curve data for a group without -I") {
  // upper triangular with unipotent corner mod 3
  FinSubgroup G(3, {ZModMat(3, 1, 1, 0, 1), ZModMat(3, 1, 0, 0, 2)});
  UniversalCurve uc = universal_curve(G);
  int64_t N = uc.weight3->modulus();
  // j-invariant of the family equals j: with A = -27 j (j-1728), B = 54 j (j-1728)^2,
  // twisted by delta: c4 = -48 A d^2, c6 = -864 B d^3, and 1728 c4^3 = j (c4^3 - c6^2)
  for (size_t ci = 0; ci < uc.delta.size(); ++ci) {
    const QSeries& d = uc.delta[ci];
    const QSeries& j = uc.jseries[ci];
    QSeries jm = j - QSeries::one(N, j.precision() - std::max<int64_t>(0, -j.low_deg())) * Rat(1728);
    QSeries A = j * jm * Rat(-27);
    QSeries B = j * jm * jm * Rat(54);
    QSeries c4 = A * d * d * Rat(-48);
    QSeries c6 = B * d * d * d * Rat(-864);
    QSeries c43 = c4 * c4 * c4;
    QSeries lhs = c43 * Rat(1728);
    QSeries rhs = j * (c43 - c6 * c6);
    CHECK(lhs == rhs);
    // twisting by delta recovers the generic family invariants
    QSeries c4g = A * Rat(-48), c6g = B * Rat(-864);
    CHECK(c4 == c4g * d * d);
    CHECK(c6 == c6g * d * d * d);
  }
}

TEST_CASE("invariant subspace with p0^e = 2 and -I outside G") {
  // calG = +-G for the group above
  FinSubgroup G(3, {ZModMat(3, 1, 1, 0, 1), ZModMat(3, 1, 0, 0, 2)});
  FinSubgroup pm = G.joined_with({ZModMat::scalar(3, 2)});
  OpenSubgroup calG(Ambient::GL2, pm), Gi(Ambient::GL2, G);
  InvariantSubspace is = invariant_subspace(calG, Gi, 3);
  CHECK(is.p0e == 2);
  REQUIRE(is.forms.size() == 1);
  REQUIRE(is.companion.size() == 1);
  CHECK(is.companion[0][0] == Rat(-1));
  // invariant polynomial F = x1^2 lands in M_{6, calG}
  const ModularFormSpace& sp = *is.space;
  std::vector<std::vector<QSeries>> coords{is.forms[0].expansions};
  HPoly F;
  F.nvars = 1;
  F.terms = {{{2}, Rat(1)}};
  auto vals = F.evaluate(coords);
  auto sp6 = std::make_shared<ModularFormSpace>(pm, 6);
  auto basis6 = sp6->basis();
  // F(f1) must lie in the span of M_{6, calG}
  RowSpan span;
  for (auto& f : basis6) span.add(sp6->phi_vector(f.expansions));
  int before = span.rank();
  span.add(sp6->phi_vector(vals));
  CHECK(span.rank() == before);
}

TEST_CASE("invariant subspace with a C4 quotient") {
  // calG = Borel mod 5, Gi = kernel of the order-4 character picking out the
  // upper-left torus coordinate (its kernel has full determinant)
  FinSubgroup calB(5, borel_generators(5));
  std::vector<ZModMat> gens{ZModMat(5, 1, 1, 0, 1), ZModMat(5, 1, 0, 0, 2)};
  FinSubgroup gi(5, gens);
  OpenSubgroup calG(Ambient::GL2, calB), Gi(Ambient::GL2, gi);
  REQUIRE(gi.is_normal_in(calB));
  // -I is not in Gi, so weight 3 carries the faithful action
  InvariantSubspace is = invariant_subspace(calG, Gi, 3);
  CHECK(is.p0e == 4);
  REQUIRE(is.forms.size() == 2);
  // C has order 4
  auto matmulq = [&](const std::vector<std::vector<Rat>>& A, const std::vector<std::vector<Rat>>& B) {
    size_t n = A.size();
    std::vector<std::vector<Rat>> C(n, std::vector<Rat>(n, Rat(0)));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        for (size_t t = 0; t < n; ++t) C[i][j] += A[i][t] * B[t][j];
    return C;
  };
  auto C2 = matmulq(is.companion, is.companion);
  auto C4 = matmulq(C2, C2);
  for (size_t i = 0; i < C4.size(); ++i)
    for (size_t j = 0; j < C4.size(); ++j) CHECK(C4[i][j] == (i == j ? Rat(1) : Rat(0)));
  bool c2_is_id = true;
  for (size_t i = 0; i < C2.size(); ++i)
    for (size_t j = 0; j < C2.size(); ++j)
      if (C2[i][j] != (i == j ? Rat(1) : Rat(0))) c2_is_id = false;
  CHECK(!c2_is_id);
}

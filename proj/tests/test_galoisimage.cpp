#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "openimage/image.hpp"

using namespace openimage;

static EllCurveQ fixture_5180() {
  // y^2 + xy + y = x^3 + x^2 - 8x + 6
  return EllCurveQ(1, 1, 1, -8, 6);
}

static EllCurveQ fixture_1026() {
  // y^2 + y = x^3 + x^2 + x
  return EllCurveQ(0, 1, 1, 1, 0);
}

TEST_CASE("curve invariants") {
  EllCurveQ e = fixture_1026();
  CHECK(e.j == frac(32768, 19));
  EllCurveQ f = fixture_5180();
  CHECK(f.j == Rat(-7 * 11 * 11 * 11));
  CHECK(f.disc == Rat(-125 * 49));
  EllCurveQ g(0, 0, 0, 0, 1);
  CHECK(g.j == 0);
}

TEST_CASE("twists") {
  EllCurveQ e = fixture_5180();
  CHECK(twist_discriminant(e, e) == 1);
  for (Int d : {Int(7), Int(-2), Int(15), Int(-35)}) {
    EllCurveQ t = quadratic_twist(e, d);
    CHECK(twist_discriminant(e, t) == d);
    CHECK(t.j == e.j);
  }
  // round trip on random squarefree d up to 50
  for (int64_t d = 2; d <= 50; ++d) {
    if (squarefree_part(Rat(d)) != d) continue;
    CHECK(twist_discriminant(e, quadratic_twist(e, d)) == d);
  }
}

TEST_CASE("point counting") {
  // y^2 = x^3 + x over F_3: 4 points, a_3 = 0
  EllCurveQ e(0, 0, 0, 1, 0);
  CHECK(ap_count(e, 3) == 0);
  // Hasse bound on a sweep
  EllCurveQ f = fixture_1026();
  for (int64_t p : {2, 3, 5, 7, 11, 13, 101, 997}) {
    if (p == 19) continue;
    int64_t ap = ap_count(f, p);
    CHECK(Int(ap) * ap <= 4 * p);
  }
  // bad reduction reported
  CHECK_THROWS(ap_count(f, 19));
  // known small values for 11a-style curve y^2 + y = x^3 - x^2 - 10x - 20
  EllCurveQ g(0, -1, 1, -10, -20);
  CHECK(ap_count(g, 2) == -2);
  CHECK(ap_count(g, 3) == -1);
  CHECK(ap_count(g, 7) == -2);
  CHECK(ap_count(g, 13) == 4);
}

TEST_CASE("trace-det filter") {
  // full group: always compatible
  FinSubgroup full5(5, gl2_generators(5));
  std::vector<FrobeniusSample> s{{7, 3}, {11, -2}, {13, 1}};
  CHECK(!trace_det_filter(full5, s).excluded);
  // constructed group mod 5 omitting (2, 3): the Borel misses nothing, so use
  // the split Cartan which has only diagonalizable classes
  FinSubgroup cartan(5, {ZModMat(5, 2, 0, 0, 1), ZModMat(5, 1, 0, 0, 2)});
  // element (tr, det) pairs: (u+v, uv); (2,3) needs u+v=2, uv=3: u,v roots of
  // x^2-2x+3: discriminant 4-12 = -8 = 2 mod 5, a nonsquare -> not represented
  std::vector<FrobeniusSample> bad{{13, 2}};  // p=13=3 mod 5, ap=2
  auto rep = trace_det_filter(cartan, bad);
  CHECK(rep.excluded);
  CHECK(rep.witness == 13);
  // fixture: Borel mod 37 is compatible with the 5180 curve for good p <= 500
  FinSubgroup borel(37, borel_generators(37));
  EllCurveQ e = fixture_5180();
  std::vector<FrobeniusSample> sweep;
  for (int64_t p : primes_up_to(500)) {
    if (p == 5 || p == 7 || p == 37) continue;
    sweep.push_back({p, ap_count(e, p)});
  }
  CHECK(!trace_det_filter(borel, sweep).excluded);
}

TEST_CASE("character reconstruction for the 37-isogeny fixture") {
  // gamma_2-bar on (Z/1295)^x with values 6, 26, 36 at 13, 19, 29
  FinSubgroup target(37, {ZModMat(37, 2, 0, 0, 1)});  // torus carrying (Z/37)^x
  FinSubgroup triv(37, {ZModMat::identity(37)});
  AbelianQuotient Q(target, triv);
  REQUIRE(Q.basis_orders() == std::vector<int64_t>{36});
  // label of diag(2^k, 1) is k
  auto lab = [&](int64_t v) {
    int64_t k = 0, x = 1;
    while (x != v) {
      x = mul_mod(x, 2, 37);
      ++k;
    }
    return std::vector<int64_t>{k};
  };
  std::vector<std::pair<int64_t, std::vector<int64_t>>> samples{
      {13, lab(6)}, {19, lab(26)}, {29, lab(36)}};
  CharacterMap gamma = reconstruct_gamma(Q, 1295, 36, samples);
  // factors through (Z/1295)^x by construction; spot check the values
  auto val = [&](int64_t u) { return Q.rep(gamma.eval(u)).a; };
  CHECK(val(13) == 6);
  CHECK(val(19) == 26);
  CHECK(val(29) == 36);
  // independence of the generating subset: held-out consistency at 2 = 13*19*29^-1 ...
  // instead verify multiplicativity on products
  CHECK(val(mod_reduce(13 * 19, 1295)) == mul_mod(6, 26, 37));
  // inconsistent samples are rejected
  std::vector<std::pair<int64_t, std::vector<int64_t>>> badsamples{
      {13, lab(6)}, {19, lab(26)}, {29, lab(36)}, {mod_reduce(13 * 19, 1295), lab(5)}};
  CHECK_THROWS(reconstruct_gamma(Q, 1295, 36, badsamples));
  // insufficient generators are rejected
  std::vector<std::pair<int64_t, std::vector<int64_t>>> few{{13, lab(6)}};
  CHECK_THROWS(reconstruct_gamma(Q, 1295, 36, few));
}

TEST_CASE("serre curve data") {
  EllCurveQ e = fixture_5180();
  SerreData sd = serre_curve_data(e);
  CHECK(sd.d == -5);
  CHECK(sd.candidate.index_in_ambient() == 2);
  CHECK(sd.candidate.det_full());
  // the squarefree part of the discriminant is a twist invariant
  EllCurveQ tw = quadratic_twist(e, 7);
  CHECK(serre_curve_data(tw).d == -5);
  // a square-discriminant curve: the generic fiber at j = 1729
  Rat j(1729);
  EllCurveQ sq = EllCurveQ::short_form(Rat(-27) * j * (j - 1728), Rat(54) * j * (j - 1728) * (j - 1728));
  REQUIRE(sq.j == j);
  SerreData sd2 = serre_curve_data(sq);
  CHECK(sd2.d == 1);
  CHECK(sd2.candidate.level() == 2);
}

TEST_CASE("gamma trivial reproduces the base group") {
  OpenSubgroup calG = OpenSubgroup::full(Ambient::GL2);
  OpenSubgroup G(Ambient::GL2, FinSubgroup(2, {ZModMat(2, 0, 1, 1, 1)}));
  FamilyContext fam(calG, G);
  CharacterMap triv;
  triv.modulus = 1;
  triv.units = unit_group(1);
  triv.q_orders = fam.quotient.basis_orders();
  AssembledImage ai = assemble_image(fam, triv);
  CHECK(ai.image.same_group(G));
  // transpose of the base group is conjugate but here literally equal mod 2
  CHECK(ai.transposed.same_group(G.transpose()));
}

TEST_CASE("rational roots") {
  // (t+1)(t-2)(2t-3) = 2t^3 - 3t^2 - 5t + 6... expand: (t+1)(t-2) = t^2-t-2
  // (t^2-t-2)(2t-3) = 2t^3 -3t^2 -2t^2 +3t -4t +6 = 2t^3 -5t^2 -t +6
  std::vector<Rat> p{Rat(6), Rat(-1), Rat(-5), Rat(2)};
  auto roots = rational_roots(p);
  REQUIRE(roots.size() == 3);
  CHECK(roots[0] == Rat(-1));
  CHECK(roots[1] == frac(3, 2));
  CHECK(roots[2] == Rat(2));
}

TEST_CASE("catalog lookup with the level-27 entry") {
  // pi(t) = (t^3+3)^3 (t^9+9t^6+27t^3+3)^3 / (t^3 (t^6+9t^3+27))
  auto mul_poly = [](const std::vector<Rat>& a, const std::vector<Rat>& b) {
    std::vector<Rat> out(a.size() + b.size() - 1, Rat(0));
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  auto pw = [&](std::vector<Rat> p, int e) {
    std::vector<Rat> out{Rat(1)};
    for (int i = 0; i < e; ++i) out = mul_poly(out, p);
    return out;
  };
  std::vector<Rat> t3p3(4, Rat(0)), inner(10, Rat(0)), den1(7, Rat(0)), t3(4, Rat(0));
  t3p3[0] = 3; t3p3[3] = 1;
  inner[0] = 3; inner[3] = 27; inner[6] = 9; inner[9] = 1;
  den1[0] = 27; den1[3] = 9; den1[6] = 1;
  t3[3] = 1;
  RatFunc pi;
  pi.num = mul_poly(pw(t3p3, 3), pw(inner, 3));
  pi.den = mul_poly(t3, den1);
  CHECK(pi.num.size() == 37);  // degree 36
  CatalogEntry level27;
  level27.name = "27.36.0";
  level27.group = OpenSubgroup(
      Ambient::GL2, FinSubgroup(27, {ZModMat(27, 1, 1, 0, 1), ZModMat(27, 1, 2, 3, 2),
                                     ZModMat(27, 2, 1, 9, 5)}));
  level27.pi = pi;
  CatalogEntry jline;
  jline.name = "1.1.0";
  jline.group = OpenSubgroup::full(Ambient::GL2);
  jline.pi.num = {Rat(0), Rat(1)};
  jline.pi.den = {Rat(1)};
  std::vector<CatalogEntry> catalog{jline, level27};
  // j of the conductor-19 curve hits the level-27 entry at t = -1
  Rat j = frac(32768, 19);
  // direct check: pi(-1) = j
  auto eval_at = [&](const std::vector<Rat>& p, const Rat& x) {
    Rat acc(0);
    for (size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
  };
  CHECK(eval_at(pi.num, Rat(-1)) / eval_at(pi.den, Rat(-1)) == j);
  const CatalogEntry* hit = catalog_locate(j, catalog);
  REQUIRE(hit != nullptr);
  CHECK(hit->name == "27.36.0");
  // a generic j falls back to the j-line
  const CatalogEntry* generic = catalog_locate(frac(20, 3), catalog);
  REQUIRE(generic != nullptr);
  CHECK(generic->name == "1.1.0");
}

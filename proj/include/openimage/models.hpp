// Projective models of the modular curve X_G from spaces of modular forms:
// divisor selection, vanishing subspaces, ideal generators certified by
// pinning bounds, maps to the j-line, hauptmodul recognition, relative
// minimal polynomials, torsion-point expansions and the universal family.
#pragma once

#include <functional>
#include <numeric>

#include "openimage/modforms.hpp"

namespace openimage {

// homogeneous polynomial with rational coefficients
struct HPoly {
  int nvars = 0;
  std::vector<std::pair<std::vector<int>, Rat>> terms;

  int64_t degree() const { return terms.empty() ? 0 : std::accumulate(terms[0].first.begin(), terms[0].first.end(), 0); }
  // evaluate on per-cusp expansions of coordinate forms
  std::vector<QSeries> evaluate(const std::vector<std::vector<QSeries>>& coords) const;
  std::string str() const;
};

std::vector<std::vector<int>> monomial_exponents(int nvars, int deg);

struct ProjectiveModel {
  std::shared_ptr<const ModularFormSpace> space;
  int64_t k = 0;                      // weight of the coordinates
  std::vector<ModForm> coords;
  std::vector<HPoly> ideal;           // generators, degree 2 then 3 (or the quartic)
  int64_t genus = 0;
  bool hyperelliptic = false;
  bool canonical = false;
  std::vector<std::vector<CycNum>> cusp_images;
};

// smallest even weight and Galois-stable cusp divisor with deg F >= 2g+1,
// deg F as small as possible
std::pair<int64_t, std::vector<int64_t>> choose_model_params(const CuspStructure& cs);

// {f in span(basis) : ord_{q_{w_i}}(f at cusp i) >= e_i}
std::vector<ModForm> vanishing_subspace(const std::vector<ModForm>& basis,
                                        const std::vector<int64_t>& e);

// basis of I(C)_n for the coordinate forms, certified by the pinning bound of
// weight n*k; the result is integral, saturated and size-reduced
std::vector<HPoly> relations(const std::vector<ModForm>& coords, int64_t n);

ProjectiveModel curve_model(const FinSubgroup& G);

struct JMap {
  int64_t map_degree = 0;  // degree of the induced map to the j-line
  HPoly F1, F2;            // F1(f)/F2(f) = j
};

// solve F1(f) Delta = F2(f) E4^3 in the smallest degree with a solution
JMap jmap(const ProjectiveModel& model, int64_t degree_cap = 40);

// per-cusp expansions of the degree-1 coordinate ratio on a genus-0 model
std::vector<QSeries> hauptmodul_series(const ProjectiveModel& model);

// express h = F1(t)/F2(t) for a genus-0 hauptmodul t; pole_bound bounds the
// pole count of h on the curve; certified by zero-counting at the cusps
struct RatFunc {
  std::vector<Rat> num, den;  // univariate coefficients, low degree first
  std::string str() const;
};
RatFunc express_in_hauptmodul(const CuspStructure& cs, const std::vector<QSeries>& t,
                              const std::vector<QSeries>& h, int64_t h_pole_bound,
                              int64_t deg_cap);

// minimal polynomial of h over Q(X_{G0}) for G inside G0, coset lifts S;
// h is given as a ratio num/den of weight-k forms on X_G.  Coefficients are
// recognized in the hauptmodul t0 of a genus-0 X_{G0}.
struct RelMinPoly {
  std::vector<RatFunc> coeffs;  // degree |S|, monic: P(x) = x^s + sum coeffs[i] x^i
};
RelMinPoly relative_minpoly(const ModForm& num, const ModForm& den,
                            const ProjectiveModel& base_model,
                            const std::vector<std::array<int64_t, 4>>& coset_lifts);

// torsion-point functions
QSeries torsion_h_qexp(int64_t N, int64_t r, int64_t s, int64_t prec);
QSeries torsion_x_qexp(int64_t N, int64_t r, int64_t s, int64_t prec);

struct UniversalCurve {
  std::shared_ptr<const ModularFormSpace> weight3;  // space carrying f0
  ModForm f0;                       // nonzero element of M_{3,G}
  std::vector<QSeries> delta;       // per-cusp expansions of j f0^2 / E6
  std::vector<QSeries> jseries;     // per-cusp expansions of j
};
UniversalCurve universal_curve(const FinSubgroup& G);

struct InvariantSubspace {
  std::shared_ptr<const ModularFormSpace> space;
  std::vector<ModForm> forms;       // f_1 .. f_m
  std::vector<std::vector<Rat>> companion;  // C with f_j * g0 = sum_i f_i C_{i,j}
  ZModMat g0;
  int64_t p0e = 0;
};
// calG/Gi cyclic of prime-power order; k = 3 when -I is not in Gi
InvariantSubspace invariant_subspace(const OpenSubgroup& calG, const OpenSubgroup& Gi, int64_t k);

}  // namespace openimage

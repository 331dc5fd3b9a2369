// Spaces M_{k,G} of modular forms attached to a subgroup G of GL2(Z/NZ)
// with full determinant: dimension and pinning bounds, the Eisenstein-series
// basis algorithm with q-expansions at every cusp, the star and slash
// actions, and lattice clean-up of bases.
#pragma once

#include "openimage/cusps.hpp"
#include "openimage/eisenstein.hpp"
#include "openimage/linalg.hpp"

namespace openimage {

struct EisMonomial {
  int64_t N = 1;
  int64_t k = 0;
  int64_t j = 0;  // zeta power twisting the determinant
  std::vector<std::pair<int64_t, int64_t>> alphas;  // k nonzero vectors in (Z/N)^2

  EisMonomial acted_by(const ZModMat& A) const;  // right star action on indices
  std::string str() const;
};

struct SturmData {
  Rat B;                        // degree bound B_{k,Gamma}
  int64_t b = 0;                // coefficient pinning bound b_{k,G}
  std::vector<int64_t> m;       // per-cusp coefficient counts m_i
  int64_t total = 0;            // sum of m_i
};

class ModularFormSpace;

struct ModForm {
  std::shared_ptr<const ModularFormSpace> space;
  std::vector<QSeries> expansions;  // per cusp, series in q_N supported on N/w_i
  // provenance: rational combination of symmetrized Eisenstein monomials
  std::vector<std::pair<Rat, EisMonomial>> provenance;

  int64_t weight() const;
  const QSeries& at_cusp(size_t i) const { return expansions[i]; }
  ModForm operator*(const Rat& c) const;
  ModForm operator+(const ModForm& o) const;
};

class ModularFormSpace : public std::enable_shared_from_this<ModularFormSpace> {
 public:
  // -I in G and even k >= 2, or odd k >= 3 with -I not in G.
  ModularFormSpace(FinSubgroup G, int64_t k);

  const FinSubgroup& group() const { return G_; }
  const CuspStructure& cusps() const { return *cs_; }
  int64_t modulus() const { return N_; }
  int64_t weight() const { return k_; }
  int64_t dimension() const { return dim_; }
  SturmData sturm() const { return sturm_; }

  // The basis algorithm; prec is the per-cusp q_N precision of the output
  // expansions (at least the pinning bound; default adds slack N).
  std::vector<ModForm> basis(int64_t prec = 0) const;

  // q-expansions of a symmetrized monomial at every cusp.
  std::vector<QSeries> monomial_expansions(const EisMonomial& mono, int64_t prec) const;
  // width-averaged inner sums per cusp and determinant-coset, shared across
  // the zeta twists j
  std::vector<std::vector<ZetaSeries>> inner_sums(
      const std::vector<std::pair<int64_t, int64_t>>& alphas, int64_t prec) const;
  std::vector<QSeries> assemble_j(const std::vector<std::vector<ZetaSeries>>& inners, int64_t j,
                                  int64_t prec) const;

  // truncated coefficient vector (the phi_k map), flattened over Q
  QVec phi_vector(const std::vector<QSeries>& expansions) const;

 private:
  FinSubgroup G_;
  int64_t N_, k_;
  std::shared_ptr<CuspStructure> cs_;
  int64_t dim_ = 0;
  SturmData sturm_;
  bool minus_in_g_ = false;

  struct EvalPlan;  // per-cusp coset data
  std::shared_ptr<EvalPlan> plan(int64_t prec) const;
  mutable std::shared_ptr<EvalPlan> plan_;
  mutable std::mutex plan_mu_;
  friend struct ModForm;
};

// dim M_{k,G}: even k >= 2 via the standard genus formula; k = 0 gives 1;
// odd k >= 3 supported when -I is not in G.
int64_t mf_dimension(const FinSubgroup& G, int64_t k);
SturmData sturm_bound(const CuspStructure& cs, int64_t k, bool minus_in_g);

// Expansion of f|_k B for an integer matrix B with positive determinant and
// coprime entries.  The result is a series in q_{d w_j}; `scale_sqrt` is set
// when the factor (a/d)^{k/2} required an unresolved square root (odd k).
struct SlashResult {
  QSeries series;      // in the variable q_out = q_M^{M/out_width}
  int64_t out_width;   // d * w_j
  Rat scale;           // rational part of epsilon^k (a/d)^{k/2}
  bool scale_sqrt = false;  // multiply by sqrt(a/d) symbolically
  int64_t sqrt_num = 1, sqrt_den = 1;
};
SlashResult slash_expand(const ModForm& f, const std::array<int64_t, 4>& B);

// Recompute the stored expansions at a higher precision from the Eisenstein
// provenance of the form.
ModForm with_precision(const ModForm& f, int64_t prec);

// Saturated integral basis (optionally LLL size-reduced) spanning the same
// Q-space of phi_k vectors.
std::vector<ModForm> nice_basis(const std::vector<ModForm>& basis, bool lll = false);

// Rank over Q(zeta_N) of the span of the plain Eisenstein monomial products
// of weight k at level N (expansions at the infinity cusp).
int64_t eis_monomial_rank(int64_t N, int64_t k, int64_t stop_at = -1);

}  // namespace openimage

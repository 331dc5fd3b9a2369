// Agreeable subgroups of GL2(Zhat): the defining predicate, agreeable
// closures, family members G_gamma attached to characters, quadratic-twist
// transforms, and the maximal agreeable subgroups M(G) with fixed
// ell-adic projections.
#pragma once

#include "openimage/abelian.hpp"
#include "openimage/gl2.hpp"

namespace openimage {

bool is_agreeable(const OpenSubgroup& G);

// The unique minimal agreeable group containing G (det(G) full required).
OpenSubgroup agreeable_closure(const OpenSubgroup& G);

// Scalar adjunction with an explicitly supplied SL2-part level bound; N0 = 0
// means "use the certified level, padded to kill a 2 mod 4 two-part".
OpenSubgroup adjoin_scalars_with_bound(const OpenSubgroup& H, int64_t N0);

// Ambient group calG with a normal subgroup G (det full, abelian quotient).
struct FamilyContext {
  OpenSubgroup calG;
  OpenSubgroup G;
  int64_t modulus;            // common modulus for the quotient presentation
  AbelianQuotient quotient;   // calG/G at that modulus

  FamilyContext(const OpenSubgroup& calG_, const OpenSubgroup& G_);
};

// G_gamma = {g in calG : g G = gamma(det g)}; gamma lands in the quotient
// via its basis labels.  Level is certified.
OpenSubgroup family_member(const FamilyContext& fam, const CharacterMap& gamma);

// Image group of the quadratic twist by squarefree d.
OpenSubgroup twist_image(const OpenSubgroup& GE, const Int& d);

struct MaximalAgreeableOptions {
  int64_t subgroup_cap = 4000;     // candidate subgroups per quotient
  int64_t iso_cap = 20000;         // isomorphism search nodes
  int64_t coset_cap = 200000;      // coset enumerations
  bool certify_maximality = true;  // verify no agreeable group strictly between
};

// All maximal proper agreeable subgroups G of calG with G_ell = calG_ell
// for every prime ell.  Throws if a search bound is exceeded.
std::vector<OpenSubgroup> maximal_agreeable(const OpenSubgroup& calG,
                                            const MaximalAgreeableOptions& opt = {});

// S3 utilities shared with the 3-adic machinery.
using Perm3 = std::array<int, 3>;
Perm3 perm3_compose(const Perm3& a, const Perm3& b);
bool perm3_is_id(const Perm3& p);
std::vector<Perm3> all_perm3();
// Faithful 2-dimensional representation of S3 over Z/q, q coprime to 6.
ZModMat perm3_matrix(const Perm3& p, int64_t q);

}  // namespace openimage

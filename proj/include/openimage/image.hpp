// Assembling the adelic image of a non-CM elliptic curve from an agreeable
// group, an abelian quotient and Frobenius data: trace/det filtering,
// character reconstruction, the group H_E, Serre-curve data and catalog
// lookup along j-maps.
#pragma once

#include "openimage/agreeable.hpp"
#include "openimage/ellcurve.hpp"
#include "openimage/models.hpp"

namespace openimage {

struct FrobeniusSample {
  int64_t p = 0;
  int64_t ap = 0;
};

struct FilterReport {
  bool excluded = false;
  int64_t witness = 0;  // a prime certifying exclusion
};

// excluded when some sample's (a_p, p) mod N misses every (tr, det) of G
FilterReport trace_det_filter(const FinSubgroup& G, const std::vector<FrobeniusSample>& samples,
                              int64_t element_cap = 2000000);

// gamma-bar from quotient-valued samples: the unique character on
// Z_M^x/(Z_M^x)^e with the stated values, reduced to its conductor
CharacterMap reconstruct_gamma(const AbelianQuotient& Q, int64_t M, int64_t e,
                               const std::vector<std::pair<int64_t, std::vector<int64_t>>>& samples);

struct AssembledImage {
  OpenSubgroup image;      // H_E, level certified
  OpenSubgroup transposed; // image of rho_E rather than its dual
};
AssembledImage assemble_image(const FamilyContext& fam, const CharacterMap& gamma);

struct SerreData {
  Int d = 1;                // squarefree part of the discriminant
  OpenSubgroup candidate;   // G_{gamma_d}
};
SerreData serre_curve_data(const EllCurveQ& e);

struct CatalogEntry {
  std::string name;
  OpenSubgroup group;
  RatFunc pi;  // genus-0 map to the j-line in a hauptmodul
};

// all rational roots of a polynomial with rational coefficients
std::vector<Rat> rational_roots(const std::vector<Rat>& poly);

// entry of maximal index whose j-map hits the given j over Q
const CatalogEntry* catalog_locate(const Rat& j, const std::vector<CatalogEntry>& catalog);

}  // namespace openimage

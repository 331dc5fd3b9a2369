// Combinatorics of the congruence subgroup Gamma_G attached to a subgroup
// G of GL2(Z/NZ) with full determinant: cusps as double cosets with explicit
// SL2(Z) lifts and widths, the Galois action on cusps, elliptic point counts,
// index and genus, and the real-point criterion.
#pragma once

#include <array>

#include "openimage/gl2.hpp"

namespace openimage {

struct CuspData {
  std::array<int64_t, 4> lift;  // matrix in SL2(Z), row-major
  int64_t vx = 1, vy = 0;       // representative column (vx, vy) mod N, up to sign
  int64_t width = 1;            // minimal m with A T^m A^{-1} in Gamma_G
  int64_t h = 1;                // same in +-Gamma_G
  bool regular = true;          // width == h
  int64_t galois_orbit = 0;
};

struct GammaData {
  Int index;      // [SL2(Z) : Gamma_G]
  Int pindex;     // [SL2(Z) : +-Gamma_G]
  int64_t genus = 0;
  int64_t v2 = 0, v3 = 0;
  int64_t cusp_count = 0;
};

class CuspStructure {
 public:
  explicit CuspStructure(const FinSubgroup& G);

  int64_t modulus() const { return N_; }
  const FinSubgroup& group() const { return G_; }
  const FinSubgroup& sl2_part() const { return H_; }
  const std::vector<CuspData>& cusps() const { return cusps_; }
  const GammaData& gamma() const { return data_; }

  // cusp index of the class of a primitive vector mod N
  int64_t cusp_of_vector(int64_t x, int64_t y) const;
  // the (Z/N)^x action m . P on cusps; orbits are the Galois orbits
  int64_t galois_act(int64_t m, int64_t cusp_index) const;
  int64_t galois_orbit_count() const { return orbit_count_; }

 private:
  int64_t N_;
  FinSubgroup G_, H_;
  std::vector<CuspData> cusps_;
  GammaData data_;
  std::vector<int64_t> class_to_cusp_;  // canonical vector class index -> cusp
  int64_t orbit_count_ = 0;

  int64_t canon_class(int64_t x, int64_t y) const;
  void compute_cusps();
  void compute_elliptic_and_genus();
  void compute_galois_orbits();
};

// convenience wrappers
GammaData gamma_data(const FinSubgroup& G);
int64_t genus_of(const FinSubgroup& G);

// X_G(R) != 0 iff G contains a conjugate of [[1,0],[0,-1]] or [[1,1],[0,-1]].
bool has_real_points(const FinSubgroup& G, int64_t class_cap = 2000000);

// Integer matrix in SL2(Z) congruent to A mod N.
std::array<int64_t, 4> sl2z_lift(const ZModMat& A);

}  // namespace openimage

// Subgroups of GL_2(Z/NZ) and open subgroups of GL_2(Zhat) / SL_2(Zhat).
//
// Finite groups are handled through a base-and-strong-generators chain for
// the action on the disjoint union of P^1(Z/q) over the prime-power factors
// q of N.  The kernel of that action is the scalar group, which is tracked
// separately, so membership and order are exact.
#pragma once

#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "openimage/zmod.hpp"

namespace openimage {

class ProjDomain {
 public:
  explicit ProjDomain(int64_t N);
  int64_t modulus() const { return N_; }
  int64_t size() const { return size_; }
  int64_t apply(const ZModMat& A, int64_t point) const;
  static std::shared_ptr<const ProjDomain> get(int64_t N);

 private:
  struct Piece {
    int64_t q, p;      // prime power and its prime
    int64_t offset;
    int64_t count;     // q + q/p
  };
  int64_t N_ = 1, size_ = 0;
  std::vector<Piece> pieces_;
  int64_t canon(const Piece& pc, int64_t x, int64_t y) const;
};

// Base-and-strong-generator chain; immutable from the outside once built.
class StabChain {
 public:
  explicit StabChain(int64_t N);
  void add_generator(const ZModMat& g);  // extends the chain if g is new
  bool contains(const ZModMat& g) const;
  Int order() const;
  const std::vector<ZModMat>& generators() const { return gens_; }
  int64_t modulus() const { return N_; }

 private:
  struct Level {
    int64_t base = -1;
    std::vector<ZModMat> gens;       // strong generators assigned to this level
    std::vector<ZModMat> act_gens;   // snapshot: union of gens at this level and deeper
    std::vector<int32_t> via;        // Schreier vector into act_gens: idx+1, -1 root, 0 outside
    int64_t orbit_size = 0;
  };

  int64_t N_;
  std::shared_ptr<const ProjDomain> dom_;
  std::vector<ZModMat> gens_;        // user-level generators
  std::vector<Level> levels_;
  std::set<int64_t> scalar_kernel_;  // units s with s*I in the group

  void rebuild_orbit(size_t lvl);
  ZModMat transversal(size_t lvl, int64_t point) const;  // maps base -> point
  // Sift through levels >= from; returns residue (fixes bases of passed levels).
  ZModMat sift(ZModMat g, size_t from) const;
  // Check every Schreier generator of the level; place the first failing
  // residue and report the level to reprocess through *redo.
  bool verify_level(size_t lvl, size_t* redo);
  size_t place_residue(const ZModMat& r, size_t at_level);
  void complete_all();
  void insert_scalar(int64_t s);
};

class FinSubgroup {
 public:
  FinSubgroup() : N_(1) {}
  FinSubgroup(int64_t N, std::vector<ZModMat> gens);

  int64_t modulus() const { return N_; }
  const std::vector<ZModMat>& generators() const { return gens_; }
  const Int& order() const;
  bool contains(const ZModMat& g) const;
  bool contains_group(const FinSubgroup& H) const;
  bool same_group(const FinSubgroup& H) const;

  // All elements; throws if the order exceeds cap.
  const std::vector<ZModMat>& elements(int64_t cap = 2000000) const;

  // det(G) as a sorted list of units mod N.
  std::vector<int64_t> det_image() const;
  bool det_full() const;
  bool contains_minus_id() const { return contains(ZModMat::scalar(N_, N_ - 1)); }
  bool contains_all_scalars() const;

  // Generators of G intersect SL2 via Schreier's lemma on the det map.
  FinSubgroup sl2_intersection() const;
  // For each unit d in det(G), some element with that determinant.
  std::vector<std::pair<int64_t, ZModMat>> det_transversal() const;

  FinSubgroup conjugate(const ZModMat& A) const;
  FinSubgroup joined_with(const std::vector<ZModMat>& extra) const;

  // Derived subgroup [G,G] = normal closure of generator commutators.
  FinSubgroup derived_subgroup() const;
  FinSubgroup normal_closure_in(const FinSubgroup& G) const;  // <this^G>

  bool is_normal_in(const FinSubgroup& G) const;

  // Project generators mod m (m | N).
  FinSubgroup project(int64_t m) const;

 private:
  int64_t N_;
  std::vector<ZModMat> gens_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
  StabChain& chain() const;
};

enum class Ambient { GL2, SL2 };

// Open subgroup of GL2(Zhat) or SL2(Zhat), stored as the full preimage of
// its image at a modulus divisible by the level.
class OpenSubgroup {
 public:
  OpenSubgroup() = default;
  OpenSubgroup(Ambient amb, FinSubgroup image, bool minimal = false);
  static OpenSubgroup full(Ambient amb);

  Ambient ambient() const { return amb_; }
  int64_t modulus() const { return img_.modulus(); }
  const FinSubgroup& image() const { return img_; }
  bool level_certified() const { return minimal_; }

  // Image of the preimage group at modulus m.  For p | modulus the p-part
  // of m may exceed the stored one; new primes contribute full factors.
  FinSubgroup image_mod(int64_t m) const;
  OpenSubgroup at_modulus(int64_t m) const { return OpenSubgroup(amb_, image_mod(m)); }

  // Minimal level certification by divisor descent (exact order counts).
  OpenSubgroup certify_level() const;
  int64_t level() const;  // certifies if needed

  Int index_in_ambient() const;
  bool contains(const OpenSubgroup& H) const;
  bool same_group(const OpenSubgroup& H) const;
  Int index_of(const OpenSubgroup& H) const;  // [this : H], H subgroup of this

  bool det_full() const;
  OpenSubgroup sl2_part() const;  // this intersect SL2(Zhat), ambient SL2
  OpenSubgroup transpose() const;

 private:
  Ambient amb_ = Ambient::GL2;
  FinSubgroup img_;
  bool minimal_ = false;
};

Int ambient_order(Ambient amb, int64_t n);

// [H : G] for subgroups at a common modulus (orders must divide).
Int subgroup_index(const OpenSubgroup& H, const OpenSubgroup& G);

// Standard generators.
std::vector<ZModMat> sl2_generators(int64_t n);
std::vector<ZModMat> gl2_generators(int64_t n);
std::vector<ZModMat> borel_generators(int64_t n);  // upper triangular

// Commutator subgroup of an open subgroup, certified:
// returns [G,G] as an open subgroup of SL2(Zhat) with certified level.
OpenSubgroup commutator_open(const OpenSubgroup& G);

// Zhat^x . H for an open H; level bound per the scalar-adjunction lemma,
// then certified minimal.
OpenSubgroup adjoin_scalars(const OpenSubgroup& H);

// Fullness certificates for closed subgroups given mod ell^e.
bool is_full_sl2(int64_t ell, const FinSubgroup& image_mod_elle);
bool is_full_gl2(int64_t ell, const FinSubgroup& image_mod_ell);

// phi3 : GL2(Z/3^k) -> S3 as permutations of {0,1,2}.
std::array<int, 3> phi3(const ZModMat& A);

struct GoursatData {
  FinSubgroup n1, n2;                 // normal subgroups of the two factors
  std::vector<std::pair<ZModMat, ZModMat>> iso;  // coset reps realizing G1/N1 ~ G2/N2
};
// H a subgroup of GL2(Z/n1) x GL2(Z/n2) with surjective projections,
// presented at modulus n1*n2 with gcd(n1,n2)=1.
GoursatData goursat(const FinSubgroup& H, int64_t n1, int64_t n2);

// {h mod keep : h in H, h = I mod drop} for H at modulus keep*drop.
FinSubgroup kernel_of_projection(const FinSubgroup& H, int64_t keep, int64_t drop,
                                 int64_t coset_cap = 3000000);

// Generators of the reduction kernels mod M inside matrices mod M*t, t | M.
std::vector<ZModMat> kernel_generators(Ambient amb, int64_t M, int64_t t);
// Drop generators that do not enlarge the generated group.
std::vector<ZModMat> reduce_generators(int64_t N, const std::vector<ZModMat>& gens);

}  // namespace openimage

// Finite abelian bookkeeping: unit groups (Z/n)^x, Smith normal form,
// abelian quotients G/H of matrix groups, and characters Zhat^x -> Q
// reconstructed from finitely many values.
#pragma once

#include <map>

#include "openimage/gl2.hpp"

namespace openimage {

// (Z/n)^x as a direct product of explicit cyclic factors.
struct UnitGroup {
  int64_t n = 1;
  std::vector<int64_t> gens;    // independent generators
  std::vector<int64_t> orders;  // gens[i] has order orders[i]; product is direct

  int64_t order() const;
  // exponent vector of a unit; throws if not a unit
  std::vector<int64_t> dlog(int64_t u) const;
  int64_t eval(const std::vector<int64_t>& e) const;
};
UnitGroup unit_group(int64_t n);

struct SmithForm {
  std::vector<Int> diag;                   // d1 | d2 | ... (size = cols)
  std::vector<std::vector<Int>> vinv_rows; // row j of V^{-1}: old coords of new basis j
};
// Smith normal form of the lattice spanned by the rows of R inside Z^k.
SmithForm smith_relations(const std::vector<std::vector<Int>>& rows, int k);

// Abelian quotient big/small of matrix groups at a common modulus.
class AbelianQuotient {
 public:
  AbelianQuotient(FinSubgroup big, FinSubgroup small);

  const FinSubgroup& big() const { return big_; }
  const FinSubgroup& small() const { return small_; }
  int64_t order() const { return (int64_t)reps_.size(); }
  int64_t exponent() const;
  const std::vector<int64_t>& basis_orders() const { return basis_orders_; }
  const std::vector<ZModMat>& basis() const { return basis_; }

  // coset label as an exponent vector on the basis
  std::vector<int64_t> label(const ZModMat& x) const;
  ZModMat rep(const std::vector<int64_t>& label) const;
  std::vector<int64_t> add(const std::vector<int64_t>& a, const std::vector<int64_t>& b) const;
  std::vector<int64_t> neg(const std::vector<int64_t>& a) const;
  bool is_zero(const std::vector<int64_t>& a) const;

  // Switch to a caller-specified basis (checked: orders and spanning).
  void relabel(const std::vector<ZModMat>& gens, const std::vector<int64_t>& orders);

 private:
  FinSubgroup big_, small_;
  std::vector<ZModMat> reps_;
  std::vector<ZModMat> basis_;
  std::vector<int64_t> basis_orders_;
  std::map<unsigned __int128, int> coset_of_cache_;
  std::vector<std::vector<int64_t>> label_of_rep_;

  int coset_index(const ZModMat& x) const;
  void build_labels();
};

// Homomorphism gamma: Zhat^x -> Q given by a modulus D and images of the
// generators of (Z/D)^x, Q a finite abelian group via its basis orders.
struct CharacterMap {
  int64_t modulus = 1;
  UnitGroup units;                            // of modulus
  std::vector<std::vector<int64_t>> images;   // per units.gens[i], a Q-label
  std::vector<int64_t> q_orders;

  std::vector<int64_t> eval(int64_t u) const;  // Q-label of gamma(u)
  bool is_trivial() const;
};

// Solve for the unique character on Z_M^x/(Z_M^x)^e with the given values
// (p_i -> label_i); throws if the p_i do not generate or are inconsistent.
// The result is reduced to its conductor.
CharacterMap solve_character(int64_t M, int64_t e, const std::vector<int64_t>& q_orders,
                             const std::vector<std::pair<int64_t, std::vector<int64_t>>>& samples);

// Quadratic character of Q(sqrt(d)) as a CharacterMap onto C2 (orders {2}).
CharacterMap quadratic_character(const Int& d);
int64_t quad_field_disc(const Int& d);  // discriminant of Q(sqrt d)

// Direct product of characters into a product group.
CharacterMap product_character(const std::vector<CharacterMap>& parts);

}  // namespace openimage

// Elliptic curves over Q: Weierstrass invariants, quadratic twists, naive
// point counting over prime fields.
#pragma once

#include "openimage/numutil.hpp"

namespace openimage {

struct EllCurveQ {
  Rat a1, a2, a3, a4, a6;
  Rat b2, b4, b6, b8, c4, c6, disc, j;

  EllCurveQ(Rat a1_, Rat a2_, Rat a3_, Rat a4_, Rat a6_);
  static EllCurveQ short_form(const Rat& A, const Rat& B) {
    return EllCurveQ(0, 0, 0, A, B);
  }
};

// the unique squarefree d with E' isomorphic to the twist of E by d
// (requires equal j-invariants, j not 0 or 1728)
Int twist_discriminant(const EllCurveQ& e, const EllCurveQ& ep);

EllCurveQ quadratic_twist(const EllCurveQ& e, const Int& d);

// trace of Frobenius by enumeration over F_p; throws on bad reduction
int64_t ap_count(const EllCurveQ& e, int64_t p, int64_t bound = 1000000);

// twist within the isomorphism class minimizing (number of bad primes, |d|)
EllCurveQ minimal_twist(const EllCurveQ& e, Int* used_d = nullptr);

// primes of bad reduction of a globally scaled integral model
std::vector<int64_t> bad_primes(const EllCurveQ& e);

}  // namespace openimage

// Dense exact linear algebra: Gaussian elimination over Q and over Q(zeta_N),
// integer lattice utilities (saturation, LLL size reduction).
#pragma once

#include <optional>

#include "openimage/cyclotomic.hpp"

namespace openimage {

using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;

// Reduced row echelon form in place; returns pivot column indices.
std::vector<int> rref(QMat& m);

// Basis of the right kernel {x : M x = 0}.
QMat nullspace(const QMat& m);

// Solve M x = b; empty optional if inconsistent.
std::optional<QVec> solve(const QMat& m, const QVec& b);

int rank(QMat m);

// Incremental independent-row tracker over Q.
class RowSpan {
 public:
  // returns true (and absorbs the row) if it enlarges the span
  bool add(QVec row);
  int rank() const { return (int)rows_.size(); }

 private:
  std::vector<QVec> rows_;  // echelonized
  std::vector<int> pivots_;
};

// Same over the field Q(zeta_N).
class CycRowSpan {
 public:
  bool add(std::vector<CycNum> row);
  int rank() const { return (int)rows_.size(); }

 private:
  std::vector<std::vector<CycNum>> rows_;
  std::vector<int> pivots_;
};

using ZVec = std::vector<Int>;
using ZMat = std::vector<ZVec>;

// Basis of the saturation of the lattice spanned by the rows inside Z^n:
// {x in Z^n : d x in rowspan for some d != 0}.
ZMat saturate_lattice(const ZMat& rows);

// Classical LLL reduction (delta = 3/4) of the lattice spanned by the rows
// (assumed independent); returns the reduced basis.
ZMat lll_reduce(const ZMat& basis);

// Scale rows of a rational matrix to primitive integer vectors.
ZMat scale_to_integer(const QMat& rows);

// Hermite normal form (row style, lower-left zeros) of the row lattice.
ZMat hnf(const ZMat& rows);

bool lattice_equal(const ZMat& a, const ZMat& b);

}  // namespace openimage

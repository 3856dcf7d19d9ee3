#pragma once

#include <limits>
#include <vector>

#include "sisdecay/types.hpp"

namespace sisdecay {

// Sparse square matrix with nonnegative off-diagonal entries (Metzler).
// The property is checked on construction; duplicate triplets are summed
// before the check, so stored entries are unique per (row, col).
class SparseMetzler {
 public:
  SparseMetzler() = default;

  static SparseMetzler from_triplets(Index dim, const std::vector<Triplet>& triplets);
  static SparseMetzler from_sparse(SparseMat m);
  static SparseMetzler from_dense(const Eigen::Ref<const Matrix>& m);

  Index dim() const { return mat_.rows(); }
  Index nonzeros() const { return mat_.nonZeros(); }
  const SparseMat& matrix() const { return mat_; }
  Scalar coeff(Index r, Index c) const { return mat_.coeff(r, c); }

  SparseMetzler transposed() const;
  Matrix dense() const { return Matrix(mat_); }

 private:
  explicit SparseMetzler(SparseMat m);
  SparseMat mat_;  // compressed, pruned of explicit zeros
};

struct EigResult {
  Scalar lambda_max = std::numeric_limits<Scalar>::quiet_NaN();
  Vector eigvec;          // nonnegative, scaled to max entry 1
  Index iterations = 0;   // 0 for the dense direct path
  Scalar residual = std::numeric_limits<Scalar>::infinity();  // ||M v - lambda v||_inf
  bool converged = false;
  bool used_dense = false;
};

struct EigOptions {
  Scalar tol = 1e-10;
  Index max_iter = 1'000'000;
  Index dense_threshold = 256;  // at or below: dense Hessenberg-QR path
};

// Maximum real eigenvalue (spectral abscissa) of a Metzler matrix. Small
// problems go through a dense Hessenberg-QR solve; larger ones use power
// iteration on the nonnegative shift m + sI with s = max|m_ii| + 1, which has
// a strictly positive diagonal and therefore converges from the all-ones
// start even without irreducibility. Non-convergence is reported in the
// result, not thrown.
EigResult lambda_max(const SparseMetzler& m, const EigOptions& opts = {});

/// Power-iteration path, regardless of dimension.
EigResult lambda_max_power(const SparseMetzler& m, Scalar tol = 1e-10,
                           Index max_iter = 1'000'000);

/// Dense path, regardless of dimension.
EigResult lambda_max_dense(const Eigen::Ref<const Matrix>& m);

/// Max real part over the full spectrum of a general (not necessarily
/// Metzler) dense matrix.
Scalar spectral_abscissa(const Eigen::Ref<const Matrix>& m);

/// True iff the directed graph of the off-diagonal sparsity pattern is
/// strongly connected, i.e. the matrix is irreducible.
bool pattern_is_irreducible(const SparseMetzler& m);

// Columns y(t_k) = e^{m t_k} v0 for an increasing grid of times t_k >= 0,
// via uniformization: with s >= max(1, max|m_ii|) the matrix p = m/s + I is
// nonnegative, and e^{m t} v = e^{-s t} sum_k (s t)^k / k! p^k v. Every term
// is nonnegative for v >= 0, so nonnegativity is preserved exactly. Long
// intervals are split so each step sums a short, well-conditioned series.
Matrix expm_action(const SparseMetzler& m, const Vector& v0,
                   const std::vector<Scalar>& grid, Scalar rel_tol = 1e-12);

}  // namespace sisdecay

#pragma once

#include <vector>

#include "sisdecay/graph.hpp"
#include "sisdecay/spectral.hpp"
#include "sisdecay/types.hpp"

namespace sisdecay {

// Per-node infection rates beta_i > 0 and recovery rates delta_i > 0.
struct SisParams {
  Vector beta;
  Vector delta;

  SisParams() = default;
  SisParams(Vector beta_in, Vector delta_in);
  static SisParams homogeneous(int n, Scalar beta, Scalar delta);

  int n() const { return static_cast<int>(beta.size()); }
  Scalar delta_min() const { return delta.minCoeff(); }
};

// Index of the joint-moment state q_ij inside the stacked vector
// r = (p_0..p_{n-1}, q_01, .., q_0,n-1, q_10, q_12, ..): the q block for
// row i lists j in increasing order with j = i skipped.
Index q_index(int i, int j, int n);

/// First-order matrix BA - D: entry (i, j) = beta_i * a_ij off the diagonal,
/// diagonal -delta_i.
SparseMetzler build_first_order(const DiGraph& g, const SisParams& params);

// The n^2-dimensional linear upper-bounding system for the first and second
// moments: state r = (p, q), dr/dt <= matrix * r entrywise.
struct SecondOrder {
  SparseMetzler matrix;
  int n = 0;

  Index p_index(int i) const { return i; }
  Index q_idx(int i, int j) const { return sisdecay::q_index(i, j, n); }
};

inline constexpr Index kDefaultNnzBudget = 50'000'000;

SecondOrder build_second_order(const DiGraph& g, const SisParams& params,
                               Index nnz_budget = kDefaultNnzBudget);

Scalar rho1(const DiGraph& g, const SisParams& params, const EigOptions& opts = {});
Scalar rho2(const DiGraph& g, const SisParams& params, const EigOptions& opts = {});

struct BoundsReport {
  int n = 0;
  Scalar lambda_max_adjacency = 0;
  Scalar rho1 = 0;
  Scalar rho2 = 0;
  Scalar delta_min = 0;
  bool strongly_connected = false;
  EigResult adjacency_solve, first_order_solve, second_order_solve;
};

/// Computes both decay-rate bounds plus diagnostics in one pass. Throws
/// NumericError if any eigensolve fails to converge.
BoundsReport compute_bounds(const DiGraph& g, const SisParams& params,
                            const EigOptions& opts = {});

/// Initial (p, q) pair for a deterministic start: p_i = x_i and
/// q_ij = (1 - x_i) * x_j for the given infected indicator.
std::pair<Vector, Vector> deterministic_initial_state(const std::vector<char>& infected);

/// The p block of e^{matrix * t} (p0, q0) on the grid: per-node upper
/// bounds on the infection probabilities. Rows are nodes, columns grid
/// points.
Matrix propagate_bound(const SecondOrder& so, const Vector& p0, const Vector& q0,
                       const std::vector<Scalar>& grid);

// Splitting matrix = M - N used to certify the gap between the two bounds,
// plus (when rho2_value < delta_min) the reduced comparison matrix
// L = (N22 - rho2 I)^{-1} (-N21 (D - rho2 I)^{-1} M12 + M22).
struct ProofMatrices {
  SparseMat m12, m22, n21;  // blocks of M and N; n21 is nonpositive
  Vector n22_diag;          // entries delta_i + delta_j
  bool applicable = false;  // rho2_value < delta_min
  SparseMetzler reduced;    // L, only when applicable
};

ProofMatrices build_proof_matrices(const DiGraph& g, const SisParams& params,
                                   Scalar rho2_value);

/// True iff 1 - 1e-7 <= lambda_max(L) < max_i (delta_i - rho1)/(delta_i - rho2).
bool verify_L_sandwich(const ProofMatrices& pm, Scalar rho1_value, Scalar rho2_value,
                       const SisParams& params, const EigOptions& opts = {});

/// Auxiliary graph on the n(n-1) pair states v_{i,j}, ordered like the q
/// block: edges (v_{i,j}, v_{j,k}) and (v_{i,j}, v_{i,k}) for every edge
/// (j, k) of g (the latter only when k != i). Strongly connected whenever g
/// is; its adjacency carries the sparsity pattern behind the reduced matrix.
DiGraph build_gpp(const DiGraph& g);

}  // namespace sisdecay

#include "sisdecay/bounds.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace sisdecay {

SisParams::SisParams(Vector beta_in, Vector delta_in)
    : beta(std::move(beta_in)), delta(std::move(delta_in)) {
  if (beta.size() != delta.size())
    throw InputError("beta and delta must have the same length");
  if (beta.size() < 1) throw InputError("rate vectors must be nonempty");
  if (!(beta.minCoeff() > 0.0) || !(delta.minCoeff() > 0.0) || !beta.allFinite() ||
      !delta.allFinite())
    throw InputError("all rates must be finite and strictly positive");
}

SisParams SisParams::homogeneous(int n, Scalar beta, Scalar delta) {
  return SisParams(Vector::Constant(n, beta), Vector::Constant(n, delta));
}

namespace {

void check_sizes(const DiGraph& g, const SisParams& params) {
  if (params.n() != g.node_count())
    throw InputError("rate vectors must match the node count");
}

}  // namespace

Index q_index(int i, int j, int n) {
  if (i == j) throw InputError("q_index requires i != j");
  if (i < 0 || j < 0 || i >= n || j >= n) throw InputError("q_index out of range");
  const int rank = j < i ? j : j - 1;
  return static_cast<Index>(n) + static_cast<Index>(i) * (n - 1) + rank;
}

SparseMetzler build_first_order(const DiGraph& g, const SisParams& params) {
  check_sizes(g, params);
  const int n = g.node_count();
  std::vector<Triplet> trips;
  trips.reserve(n + g.edge_count());
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, -params.delta[i]);
  for (const auto& [u, v] : g.edges())
    trips.emplace_back(v, u, params.beta[v]);  // a_vu = 1
  return SparseMetzler::from_triplets(n, trips);
}

SecondOrder build_second_order(const DiGraph& g, const SisParams& params,
                               Index nnz_budget) {
  check_sizes(g, params);
  const int n = g.node_count();
  const Index dim = static_cast<Index>(n) * n;

  // nnz: n + |E| from the p rows, plus per q row one diagonal, one p-block
  // entry, and the out-degree-style coupling terms.
  Index estimate = static_cast<Index>(n) + g.edge_count() +
                   3 * static_cast<Index>(n) * (n - 1);
  for (int j = 0; j < n; ++j)
    estimate += static_cast<Index>(g.out_neighbors(j).size()) * (n - 1);
  if (estimate > nnz_budget)
    throw ResourceError("second-order matrix would exceed the nonzero budget (" +
                        std::to_string(estimate) + " > " +
                        std::to_string(nnz_budget) + ")");

  std::vector<Triplet> trips;
  trips.reserve(estimate);
  // dp_i/dt = -delta_i p_i + beta_i sum_{k != i} a_ik q_ik
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, -params.delta[i]);
    for (int k : g.in_neighbors(i)) {
      trips.emplace_back(i, q_index(i, k, n), params.beta[i]);
    }
  }
  // dq_ij/dt = -gamma_ij q_ij + delta_i p_j + beta_j sum_{k notin {i,j}} a_jk q_ik
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Index row = q_index(i, j, n);
      const Scalar gamma =
          params.delta[i] + params.delta[j] + g.adjacency(i, j) * params.beta[i];
      trips.emplace_back(row, row, -gamma);
      trips.emplace_back(row, j, params.delta[i]);
      for (int k : g.in_neighbors(j)) {
        if (k == i || k == j) continue;
        trips.emplace_back(row, q_index(i, k, n), params.beta[j]);
      }
    }
  }
  return SecondOrder{SparseMetzler::from_triplets(dim, trips), n};
}

namespace {

Scalar negated_lambda_max(const SparseMetzler& m, const EigOptions& opts,
                          const char* what) {
  const EigResult res = lambda_max(m, opts);
  if (!res.converged)
    throw NumericError(std::string("eigensolve did not converge for ") + what);
  return -res.lambda_max;
}

}  // namespace

Scalar rho1(const DiGraph& g, const SisParams& params, const EigOptions& opts) {
  return negated_lambda_max(build_first_order(g, params), opts, "BA - D");
}

Scalar rho2(const DiGraph& g, const SisParams& params, const EigOptions& opts) {
  return negated_lambda_max(build_second_order(g, params).matrix, opts,
                            "the second-order matrix");
}

BoundsReport compute_bounds(const DiGraph& g, const SisParams& params,
                            const EigOptions& opts) {
  check_sizes(g, params);
  BoundsReport report;
  report.n = g.node_count();
  report.delta_min = params.delta_min();
  report.strongly_connected = is_strongly_connected(g);

  report.adjacency_solve =
      lambda_max(SparseMetzler::from_sparse(g.adjacency_matrix()), opts);
  report.first_order_solve = lambda_max(build_first_order(g, params), opts);
  report.second_order_solve = lambda_max(build_second_order(g, params).matrix, opts);
  if (!report.adjacency_solve.converged || !report.first_order_solve.converged ||
      !report.second_order_solve.converged)
    throw NumericError("an eigensolve did not converge while computing bounds");

  report.lambda_max_adjacency = report.adjacency_solve.lambda_max;
  report.rho1 = -report.first_order_solve.lambda_max;
  report.rho2 = -report.second_order_solve.lambda_max;
  return report;
}

std::pair<Vector, Vector> deterministic_initial_state(
    const std::vector<char>& infected) {
  const int n = static_cast<int>(infected.size());
  if (n < 1) throw InputError("infected indicator must be nonempty");
  Vector p0(n);
  for (int i = 0; i < n; ++i) p0[i] = infected[i] ? 1.0 : 0.0;
  Vector q0(static_cast<Index>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      q0[q_index(i, j, n) - n] = (1.0 - p0[i]) * p0[j];
    }
  return {std::move(p0), std::move(q0)};
}

Matrix propagate_bound(const SecondOrder& so, const Vector& p0, const Vector& q0,
                       const std::vector<Scalar>& grid) {
  const int n = so.n;
  if (p0.size() != n || q0.size() != static_cast<Index>(n) * (n - 1))
    throw InputError("initial state dimensions do not match the system");
  if (p0.minCoeff() < 0.0 || p0.maxCoeff() > 1.0)
    throw InputError("initial probabilities must lie in [0, 1]");
  if (q0.size() > 0 && q0.minCoeff() < 0.0)
    throw InputError("initial joint moments must be nonnegative");
  Vector r0(so.matrix.dim());
  r0.head(n) = p0;
  r0.tail(q0.size()) = q0;
  const Matrix full = expm_action(so.matrix, r0, grid);
  return full.topRows(n);
}

ProofMatrices build_proof_matrices(const DiGraph& g, const SisParams& params,
                                   Scalar rho2_value) {
  check_sizes(g, params);
  const int n = g.node_count();
  const Index qdim = static_cast<Index>(n) * (n - 1);

  ProofMatrices pm;
  std::vector<Triplet> m12, m22, n21;
  // M12 = blkdiag_i(beta_i A_{i, drop i}): rows p_i, columns q block i.
  for (int i = 0; i < n; ++i)
    for (int k : g.in_neighbors(i))
      m12.emplace_back(i, q_index(i, k, n) - n, params.beta[i]);
  // M22 block i = col_{j != i}(beta_j A_{j, drop i}) - diag_{j != i}(a_ij beta_i).
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Index row = q_index(i, j, n) - n;
      for (int k : g.in_neighbors(j)) {
        if (k == i) continue;
        m22.emplace_back(row, q_index(i, k, n) - n, params.beta[j]);
      }
      if (g.adjacency(i, j))
        m22.emplace_back(row, row, -params.beta[i]);
    }
  // N21 = -col_i(delta_i V_i); N22 = diag(delta_i + delta_j).
  pm.n22_diag.resize(qdim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Index row = q_index(i, j, n) - n;
      n21.emplace_back(row, j, -params.delta[i]);
      pm.n22_diag[row] = params.delta[i] + params.delta[j];
    }

  pm.m12.resize(n, qdim);
  pm.m12.setFromTriplets(m12.begin(), m12.end());
  pm.m22.resize(qdim, qdim);
  pm.m22.setFromTriplets(m22.begin(), m22.end());
  pm.n21.resize(qdim, n);
  pm.n21.setFromTriplets(n21.begin(), n21.end());

  pm.applicable = rho2_value < params.delta_min();
  if (!pm.applicable) return pm;

  // L = (N22 - rho2 I)^{-1} (-N21 (D - rho2 I)^{-1} M12 + M22); both inverted
  // matrices are diagonal and positive when rho2 < delta_min.
  Vector d_inv = (params.delta.array() - rho2_value).inverse();
  Vector n22_inv = (pm.n22_diag.array() - rho2_value).inverse();
  SparseMat cross = (-pm.n21) * d_inv.asDiagonal() * pm.m12;
  SparseMat inner = cross + pm.m22;
  pm.reduced = SparseMetzler::from_sparse(n22_inv.asDiagonal() * inner);
  return pm;
}

bool verify_L_sandwich(const ProofMatrices& pm, Scalar rho1_value, Scalar rho2_value,
                       const SisParams& params, const EigOptions& opts) {
  if (!pm.applicable)
    throw InputError("reduced matrix unavailable: rho2 >= delta_min");
  const EigResult res = lambda_max(pm.reduced, opts);
  if (!res.converged)
    throw NumericError("eigensolve did not converge for the reduced matrix");
  const Scalar upper =
      ((params.delta.array() - rho1_value) / (params.delta.array() - rho2_value))
          .maxCoeff();
  return res.lambda_max >= 1.0 - 1e-7 && res.lambda_max < upper;
}

DiGraph build_gpp(const DiGraph& g) {
  const int n = g.node_count();
  if (n < 2) throw InputError("pair graph needs at least two nodes");
  auto node = [n](int i, int j) {
    return static_cast<int>(q_index(i, j, n)) - n;
  };
  std::vector<DiGraph::Edge> edges;
  for (const auto& [j, k] : g.edges()) {
    for (int i = 0; i < n; ++i) {
      if (i != j) edges.emplace_back(node(i, j), node(j, k));
      // Pairs that would point at the missing state v_{i,i} are dropped.
      if (i != j && i != k) edges.emplace_back(node(i, j), node(i, k));
    }
  }
  return DiGraph(n * (n - 1), std::move(edges));
}

}  // namespace sisdecay

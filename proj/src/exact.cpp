#include "sisdecay/exact.hpp"

#include <string>

namespace sisdecay {

namespace {

void check_exact_size(const DiGraph& g, const SisParams& params, int max_exact_n) {
  if (params.n() != g.node_count())
    throw InputError("rate vectors must match the node count");
  if (g.node_count() > max_exact_n)
    throw ResourceError("exact oracle refused: n = " +
                        std::to_string(g.node_count()) + " exceeds the cap of " +
                        std::to_string(max_exact_n) +
                        " (the chain has 2^n - 1 transient states)");
}

}  // namespace

CtmcGenerator build_sub_generator(const DiGraph& g, const SisParams& params,
                                  int max_exact_n) {
  check_exact_size(g, params, max_exact_n);
  const int n = g.node_count();
  const std::uint64_t nstates = std::uint64_t{1} << n;
  const Index dim = static_cast<Index>(nstates - 1);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(dim) * (n + 1));
  for (std::uint64_t x = 1; x < nstates; ++x) {
    const Index row = static_cast<Index>(x - 1);
    Scalar outflow = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (x & bit) {
        // recovery of node i; the target may be the absorbing state
        outflow += params.delta[i];
        const std::uint64_t target = x & ~bit;
        if (target != 0)
          trips.emplace_back(row, static_cast<Index>(target - 1), params.delta[i]);
      } else {
        int pressure = 0;
        for (int j : g.in_neighbors(i))
          if (x >> j & 1) ++pressure;
        if (pressure > 0) {
          const Scalar rate = params.beta[i] * pressure;
          outflow += rate;
          trips.emplace_back(row, static_cast<Index>((x | bit) - 1), rate);
        }
      }
    }
    trips.emplace_back(row, row, -outflow);
  }
  return CtmcGenerator{n, dim, SparseMetzler::from_triplets(dim, trips)};
}

Scalar exact_decay_rate(const DiGraph& g, const SisParams& params, int max_exact_n) {
  const CtmcGenerator gen = build_sub_generator(g, params, max_exact_n);
  return -spectral_abscissa(gen.sub_generator.dense());
}

Matrix exact_marginals(const DiGraph& g, const SisParams& params, std::uint64_t x0,
                       const std::vector<Scalar>& grid, int max_exact_n) {
  const CtmcGenerator gen = build_sub_generator(g, params, max_exact_n);
  const int n = gen.n;
  if (x0 == 0 || x0 >= (std::uint64_t{1} << n))
    throw InputError("initial state must be a nonzero bitmask over the nodes");

  // Row propagation of the distribution: pi(t)^T = pi(0)^T e^{Q t}.
  Vector pi0 = Vector::Zero(gen.dim);
  pi0[static_cast<Index>(x0 - 1)] = 1.0;
  const Matrix pi = expm_action(gen.sub_generator.transposed(), pi0, grid);

  Matrix marginals = Matrix::Zero(n, pi.cols());
  for (Index state = 0; state < gen.dim; ++state) {
    const std::uint64_t mask = static_cast<std::uint64_t>(state) + 1;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) marginals.row(i) += pi.row(state);
  }
  return marginals;
}

}  // namespace sisdecay

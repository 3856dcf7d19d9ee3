#pragma once

#include <cstdint>
#include <vector>

#include "sisdecay/bounds.hpp"
#include "sisdecay/graph.hpp"
#include "sisdecay/spectral.hpp"
#include "sisdecay/types.hpp"

namespace sisdecay {

inline constexpr int kDefaultMaxExactNodes = 14;

// Generator of the full 2^n-state Markov chain restricted to the transient
// states (every state except all-susceptible). States are encoded as
// bitmasks x in {1, .., 2^n - 1} with bit i set iff node i is infected;
// state x lives at index x - 1. Row sums are <= 0, the deficit being the
// flow into the absorbing state.
struct CtmcGenerator {
  int n = 0;
  Index dim = 0;  // 2^n - 1
  SparseMetzler sub_generator;
};

CtmcGenerator build_sub_generator(const DiGraph& g, const SisParams& params,
                                  int max_exact_n = kDefaultMaxExactNodes);

/// Exact decay rate: minus the maximum real part of the sub-generator
/// spectrum, from a dense general eigensolve. Refuses n > max_exact_n.
Scalar exact_decay_rate(const DiGraph& g, const SisParams& params,
                        int max_exact_n = kDefaultMaxExactNodes);

/// Exact per-node infection probabilities p_i(t_k) starting from the state
/// x0 (bitmask, nonzero). Rows are nodes, columns grid points.
Matrix exact_marginals(const DiGraph& g, const SisParams& params, std::uint64_t x0,
                       const std::vector<Scalar>& grid,
                       int max_exact_n = kDefaultMaxExactNodes);

}  // namespace sisdecay

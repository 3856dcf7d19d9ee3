#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sisdecay/bounds.hpp"
#include "sisdecay/graph.hpp"
#include "sisdecay/rng.hpp"
#include "sisdecay/types.hpp"

namespace sisdecay {

struct SimConfig {
  Index paths = 10000;
  Scalar horizon = 100.0;
  Scalar grid_dt = 0.1;
  std::uint64_t seed = 0;
  std::optional<std::vector<int>> initial;  // nullopt: all nodes infected
  std::optional<std::pair<Scalar, Scalar>> fit_window;
  int threads = 1;  // 0: hardware concurrency

  void validate(int n) const;
  std::vector<Scalar> grid() const;
  std::vector<char> initial_indicator(int n) const;
};

// Ensemble-averaged marginals on a fixed time grid. Counts are accumulated
// as integers, so the result is identical for any path execution order.
struct Trajectory {
  std::vector<Scalar> times;
  Matrix marginals;          // n x T, path fraction with node i infected
  Matrix marginal_stderr;    // n x T, binomial standard error
  Vector mean_infected;      // T, m(t) = sum_i marginals(i, t)
  Vector stderr_mean;        // T, from the per-path infected-count variance
  Index paths = 0;

  int n() const { return static_cast<int>(marginals.rows()); }
};

struct PathSample {
  std::vector<Scalar> times;
  std::vector<std::vector<char>> infected;  // per grid point, length n
};

struct Event {
  Scalar time;
  int node;  // toggled node
};

/// One exact event-driven realization, sampled on the grid. The optional
/// event log records every toggle for transition-frequency checks.
PathSample run_single_path(const DiGraph& g, const SisParams& params,
                           const std::vector<char>& initial_infected, Scalar horizon,
                           Scalar grid_dt, RngStream& rng,
                           std::vector<Event>* event_log = nullptr);

/// Averages cfg.paths independent realizations; path i draws from the
/// stream (cfg.seed, i), so the result does not depend on scheduling.
Trajectory run_ensemble(const DiGraph& g, const SisParams& params,
                        const SimConfig& cfg);

struct DecayEstimate {
  Scalar rho_hat = 0;
  Scalar window_lo = 0, window_hi = 0;
  Scalar slope_stderr = 0;
  Index points_used = 0;
  Scalar intercept = 0;  // fitted ln m(0), reported but unused
};

// Least-squares fit of ln m(t) against t. The default window starts at
// 0.2 * horizon and ends at the last time where m(t) clears the noise floor
// max(10/sqrt(paths), 1e-3 * m(0)). Throws NumericError when fewer than
// five usable points remain.
DecayEstimate estimate_decay(const Trajectory& traj,
                             std::optional<std::pair<Scalar, Scalar>> window = {});

/// CSV rendering with header t,m,stderr_m,p_0,..,p_{n-1}.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace sisdecay

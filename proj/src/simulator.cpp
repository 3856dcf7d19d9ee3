#include "sisdecay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace sisdecay {

void SimConfig::validate(int n) const {
  if (paths < 1) throw InputError("paths must be at least 1");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (!(grid_dt > 0.0)) throw InputError("grid_dt must be positive");
  if (initial) {
    if (initial->empty()) throw InputError("initial infected set must be nonempty");
    for (int v : *initial)
      if (v < 0 || v >= n) throw InputError("initial infected node out of range");
  }
}

std::vector<Scalar> SimConfig::grid() const {
  std::vector<Scalar> times;
  const auto count = static_cast<Index>(std::floor(horizon / grid_dt + 1e-9)) + 1;
  times.reserve(count);
  for (Index k = 0; k < count; ++k) times.push_back(static_cast<Scalar>(k) * grid_dt);
  return times;
}

std::vector<char> SimConfig::initial_indicator(int n) const {
  std::vector<char> infected(n, 1);
  if (initial) {
    infected.assign(n, 0);
    for (int v : *initial) infected[v] = 1;
  }
  return infected;
}

PathSample run_single_path(const DiGraph& g, const SisParams& params,
                           const std::vector<char>& initial_infected, Scalar horizon,
                           Scalar grid_dt, RngStream& rng,
                           std::vector<Event>* event_log) {
  const int n = g.node_count();
  if (static_cast<int>(initial_infected.size()) != n)
    throw InputError("initial indicator length mismatch");

  PathSample sample;
  const auto points = static_cast<size_t>(std::floor(horizon / grid_dt + 1e-9)) + 1;
  sample.times.reserve(points);
  for (size_t k = 0; k < points; ++k)
    sample.times.push_back(static_cast<Scalar>(k) * grid_dt);
  sample.infected.resize(points);

  std::vector<char> infected(initial_infected.begin(), initial_infected.end());
  std::vector<int> pressure(n, 0);  // infected in-neighbor count
  int infected_count = 0;
  for (int u = 0; u < n; ++u) {
    if (!infected[u]) continue;
    ++infected_count;
    for (int v : g.out_neighbors(u)) ++pressure[v];
  }

  Scalar t = 0.0;
  size_t grid_idx = 0;
  for (;;) {
    if (infected_count == 0) {
      for (; grid_idx < points; ++grid_idx)
        sample.infected[grid_idx].assign(n, 0);
      break;
    }
    Scalar total = 0.0;
    for (int i = 0; i < n; ++i)
      total += infected[i] ? params.delta[i]
                           : params.beta[i] * static_cast<Scalar>(pressure[i]);
    const Scalar t_next = t + rng.next_exponential(total);
    while (grid_idx < points && sample.times[grid_idx] < t_next) {
      sample.infected[grid_idx].assign(infected.begin(), infected.end());
      ++grid_idx;
    }
    if (grid_idx >= points) break;
    t = t_next;

    // pick the event with probability proportional to its rate
    Scalar target = rng.next_unit() * total;
    int node = -1;
    for (int i = 0; i < n; ++i) {
      const Scalar rate = infected[i]
                              ? params.delta[i]
                              : params.beta[i] * static_cast<Scalar>(pressure[i]);
      if (rate <= 0.0) continue;
      node = i;  // last positive-rate event absorbs roundoff
      target -= rate;
      if (target <= 0.0) break;
    }
    infected[node] ^= 1;
    infected_count += infected[node] ? 1 : -1;
    const int step = infected[node] ? 1 : -1;
    for (int v : g.out_neighbors(node)) pressure[v] += step;
    if (event_log) event_log->push_back({t, node});
  }
  return sample;
}

namespace {

struct CountBuffers {
  std::vector<std::uint64_t> node_counts;  // T x n, infected indicators
  std::vector<std::uint64_t> sum_c;        // T, per-path infected count
  std::vector<std::uint64_t> sum_c2;       // T, squared

  explicit CountBuffers(size_t points, int n)
      : node_counts(points * n, 0), sum_c(points, 0), sum_c2(points, 0) {}

  void merge(const CountBuffers& other) {
    for (size_t i = 0; i < node_counts.size(); ++i)
      node_counts[i] += other.node_counts[i];
    for (size_t k = 0; k < sum_c.size(); ++k) {
      sum_c[k] += other.sum_c[k];
      sum_c2[k] += other.sum_c2[k];
    }
  }
};

void accumulate_paths(const DiGraph& g, const SisParams& params, const SimConfig& cfg,
                      const std::vector<char>& initial, Index path_begin,
                      Index path_end, CountBuffers& buf) {
  const int n = g.node_count();
  for (Index path = path_begin; path < path_end; ++path) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(path));
    const PathSample sample =
        run_single_path(g, params, initial, cfg.horizon, cfg.grid_dt, rng);
    for (size_t k = 0; k < sample.infected.size(); ++k) {
      std::uint64_t c = 0;
      const auto& state = sample.infected[k];
      for (int i = 0; i < n; ++i) {
        if (state[i]) {
          ++buf.node_counts[k * n + i];
          ++c;
        }
      }
      buf.sum_c[k] += c;
      buf.sum_c2[k] += c * c;
    }
  }
}

}  // namespace

Trajectory run_ensemble(const DiGraph& g, const SisParams& params,
                        const SimConfig& cfg) {
  const int n = g.node_count();
  if (params.n() != n) throw InputError("rate vectors must match the node count");
  cfg.validate(n);
  const std::vector<char> initial = cfg.initial_indicator(n);

  Trajectory traj;
  traj.times = cfg.grid();
  traj.paths = cfg.paths;
  const size_t points = traj.times.size();

  int nthreads = cfg.threads > 0
                     ? cfg.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, static_cast<int>(cfg.paths)));

  CountBuffers total(points, n);
  if (nthreads == 1) {
    accumulate_paths(g, params, cfg, initial, 0, cfg.paths, total);
  } else {
    std::vector<CountBuffers> parts(nthreads, CountBuffers(points, n));
    std::vector<std::thread> pool;
    const Index chunk = (cfg.paths + nthreads - 1) / nthreads;
    for (int w = 0; w < nthreads; ++w) {
      const Index lo = w * chunk;
      const Index hi = std::min<Index>(cfg.paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, w, lo, hi] {
        accumulate_paths(g, params, cfg, initial, lo, hi, parts[w]);
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& part : parts) total.merge(part);
  }

  const auto paths = static_cast<Scalar>(cfg.paths);
  traj.marginals.resize(n, static_cast<Index>(points));
  traj.marginal_stderr.resize(n, static_cast<Index>(points));
  traj.mean_infected.resize(static_cast<Index>(points));
  traj.stderr_mean.resize(static_cast<Index>(points));
  for (size_t k = 0; k < points; ++k) {
    for (int i = 0; i < n; ++i) {
      const Scalar p = static_cast<Scalar>(total.node_counts[k * n + i]) / paths;
      traj.marginals(i, static_cast<Index>(k)) = p;
      traj.marginal_stderr(i, static_cast<Index>(k)) =
          std::sqrt(std::max(Scalar(0), p * (1.0 - p) / paths));
    }
    const Scalar mean = static_cast<Scalar>(total.sum_c[k]) / paths;
    traj.mean_infected[static_cast<Index>(k)] = mean;
    Scalar var = 0.0;
    if (cfg.paths > 1) {
      var = (static_cast<Scalar>(total.sum_c2[k]) - paths * mean * mean) /
            (paths - 1.0);
      var = std::max(Scalar(0), var);
    }
    traj.stderr_mean[static_cast<Index>(k)] = std::sqrt(var / paths);
  }
  return traj;
}

DecayEstimate estimate_decay(const Trajectory& traj,
                             std::optional<std::pair<Scalar, Scalar>> window) {
  if (traj.times.empty()) throw NumericError("empty trajectory");
  Scalar lo, hi;
  if (window) {
    lo = window->first;
    hi = window->second;
    if (!(lo <= hi)) throw InputError("fit window must satisfy lo <= hi");
  } else {
    const Scalar horizon = traj.times.back();
    lo = 0.2 * horizon;
    const Scalar floor =
        std::max(10.0 / std::sqrt(static_cast<Scalar>(traj.paths)),
                 1e-3 * traj.mean_infected[0]);
    hi = -1.0;
    for (size_t k = 0; k < traj.times.size(); ++k)
      if (traj.mean_infected[static_cast<Index>(k)] >= floor) hi = traj.times[k];
  }

  std::vector<Scalar> ts, ys;
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const Scalar t = traj.times[k];
    const Scalar m = traj.mean_infected[static_cast<Index>(k)];
    if (t < lo || t > hi || m <= 0.0) continue;
    ts.push_back(t);
    ys.push_back(std::log(m));
  }
  const auto k = static_cast<Index>(ts.size());
  if (k < 5)
    throw NumericError("decay fit needs at least 5 usable grid points in the window "
                       "(got " + std::to_string(k) + ")");

  Scalar t_mean = 0.0, y_mean = 0.0;
  for (Index i = 0; i < k; ++i) {
    t_mean += ts[i];
    y_mean += ys[i];
  }
  t_mean /= static_cast<Scalar>(k);
  y_mean /= static_cast<Scalar>(k);
  Scalar stt = 0.0, sty = 0.0;
  for (Index i = 0; i < k; ++i) {
    stt += (ts[i] - t_mean) * (ts[i] - t_mean);
    sty += (ts[i] - t_mean) * (ys[i] - y_mean);
  }
  if (stt <= 0.0) throw NumericError("degenerate fit window");
  const Scalar slope = sty / stt;
  const Scalar intercept = y_mean - slope * t_mean;
  Scalar rss = 0.0;
  for (Index i = 0; i < k; ++i) {
    const Scalar r = ys[i] - (intercept + slope * ts[i]);
    rss += r * r;
  }
  DecayEstimate est;
  est.rho_hat = -slope;
  est.window_lo = lo;
  est.window_hi = hi;
  est.points_used = k;
  est.intercept = intercept;
  est.slope_stderr = k > 2 ? std::sqrt(rss / (static_cast<Scalar>(k) - 2.0) / stt) : 0.0;
  return est;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,m,stderr_m";
  for (int i = 0; i < traj.n(); ++i) out << ",p_" << i;
  out << "\n";
  char buf[64];
  auto put = [&out, &buf](Scalar x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const auto col = static_cast<Index>(k);
    put(traj.times[k]);
    out << ",";
    put(traj.mean_infected[col]);
    out << ",";
    put(traj.stderr_mean[col]);
    for (int i = 0; i < traj.n(); ++i) {
      out << ",";
      put(traj.marginals(i, col));
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace sisdecay

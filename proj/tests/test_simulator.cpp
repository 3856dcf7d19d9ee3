#include <doctest.h>

#include <cmath>
#include <map>

#include "sisdecay/exact.hpp"
#include "sisdecay/simulator.hpp"
#include "test_support.hpp"

using namespace sisdecay;

namespace {

DiGraph two_complete() { return parse_edge_list("0 1\n1 0"); }

}  // namespace

TEST_CASE("single path: one node recovers once and stays susceptible") {
  RngStream rng(0xABCD, 0);
  const PathSample sample = run_single_path(
      DiGraph(1), SisParams::homogeneous(1, 1.0, 1.0), {1}, 20.0, 0.5, rng);
  bool recovered = false;
  for (const auto& state : sample.infected) {
    if (recovered) CHECK(state[0] == 0);  // no reinfection without neighbors
    if (!state[0]) recovered = true;
  }
  CHECK(recovered);  // horizon 20 with rate 1: extinction virtually certain
}

TEST_CASE("single path: no infected start stays at zero") {
  RngStream rng(1, 0);
  const PathSample sample = run_single_path(
      two_complete(), SisParams::homogeneous(2, 1, 1), {0, 0}, 1.0, 0.1, rng);
  for (const auto& state : sample.infected) {
    CHECK(state[0] == 0);
    CHECK(state[1] == 0);
  }
}

TEST_CASE("ensemble with one path reproduces that single path") {
  SimConfig cfg;
  cfg.paths = 1;
  cfg.horizon = 5.0;
  cfg.grid_dt = 0.25;
  cfg.seed = 77;
  const DiGraph g = two_complete();
  const SisParams params = SisParams::homogeneous(2, 1, 1);
  const Trajectory traj = run_ensemble(g, params, cfg);

  RngStream rng(cfg.seed, 0);
  const PathSample sample =
      run_single_path(g, params, {1, 1}, cfg.horizon, cfg.grid_dt, rng);
  REQUIRE(traj.times.size() == sample.times.size());
  for (size_t k = 0; k < sample.times.size(); ++k) {
    CHECK(traj.marginals(0, static_cast<Index>(k)) == Scalar(sample.infected[k][0]));
    CHECK(traj.marginals(1, static_cast<Index>(k)) == Scalar(sample.infected[k][1]));
  }
}

TEST_CASE("one-node marginal matches e^{-t} within 3 standard errors") {
  SimConfig cfg;
  cfg.paths = 50000;
  cfg.horizon = 5.0;
  cfg.grid_dt = 0.25;
  cfg.seed = 123;
  const Trajectory traj =
      run_ensemble(DiGraph(1), SisParams::homogeneous(1, 1.0, 1.0), cfg);
  CHECK(traj.mean_infected[0] == 1.0);  // m(0) exact
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const Scalar expected = std::exp(-traj.times[k]);
    const Scalar err = traj.marginal_stderr(0, static_cast<Index>(k));
    CHECK(std::abs(traj.marginals(0, static_cast<Index>(k)) - expected) <=
          3.0 * std::max(err, 1e-3));
  }
}

TEST_CASE("identical configuration gives identical trajectory bytes") {
  SimConfig cfg;
  cfg.paths = 50;
  cfg.horizon = 3.0;
  cfg.grid_dt = 0.1;
  cfg.seed = 2025;
  const DiGraph g = two_complete();
  const SisParams params = SisParams::homogeneous(2, 1.3, 0.9);
  const std::string a = trajectory_csv(run_ensemble(g, params, cfg));
  const std::string b = trajectory_csv(run_ensemble(g, params, cfg));
  CHECK(a == b);
  cfg.threads = 2;  // integer count reduction is schedule-independent
  CHECK(trajectory_csv(run_ensemble(g, params, cfg)) == a);
}

TEST_CASE("event-log transition frequencies match the jump chain") {
  // For state x, the next transition goes to y with probability
  // q_xy / |q_xx|. Compare empirical frequencies over many events against
  // the sub-generator rows within 3 binomial standard errors.
  const DiGraph g = two_complete();
  const SisParams params = SisParams::homogeneous(2, 1, 1);
  const Matrix q = build_sub_generator(g, params).sub_generator.dense();

  std::map<std::pair<int, int>, int> counts;
  std::map<int, int> visits;
  RngStream rng(555, 0);
  for (int path = 0; path < 4000; ++path) {
    std::vector<Event> events;
    RngStream path_rng(555, static_cast<std::uint64_t>(path));
    run_single_path(g, params, {1, 1}, 8.0, 1.0, path_rng, &events);
    int state = 0b11;
    for (const Event& ev : events) {
      const int next = state ^ (1 << ev.node);
      ++visits[state];
      ++counts[{state, next}];
      state = next;
      if (state == 0) break;
    }
  }
  for (const auto& [key, cnt] : counts) {
    const auto [from, to] = key;
    if (to == 0) continue;  // absorbing state is outside the sub-generator
    const Scalar expected = q(from - 1, to - 1) / -q(from - 1, from - 1);
    const Scalar n_from = static_cast<Scalar>(visits[from]);
    const Scalar freq = static_cast<Scalar>(cnt) / n_from;
    const Scalar stderr_freq = std::sqrt(expected * (1 - expected) / n_from);
    CHECK(std::abs(freq - expected) <= 3.0 * stderr_freq + 1e-12);
  }
}

TEST_CASE("two-node marginals match the exact oracle within 3 standard errors") {
  SimConfig cfg;
  cfg.paths = 20000;
  cfg.horizon = 6.0;
  cfg.grid_dt = 0.25;
  cfg.seed = 31337;
  const DiGraph g = two_complete();
  const SisParams params = SisParams::homogeneous(2, 1, 1);
  const Trajectory traj = run_ensemble(g, params, cfg);
  const Matrix exact = exact_marginals(g, params, 0b11, traj.times);

  int inside = 0, total = 0;
  for (size_t k = 0; k < traj.times.size(); ++k)
    for (int i = 0; i < 2; ++i) {
      const Scalar err = traj.marginal_stderr(i, static_cast<Index>(k));
      const Scalar gap =
          std::abs(traj.marginals(i, static_cast<Index>(k)) - exact(i, static_cast<Index>(k)));
      ++total;
      if (gap <= 3.0 * std::max(err, 1e-4)) ++inside;
    }
  CHECK(static_cast<Scalar>(inside) >= 0.95 * static_cast<Scalar>(total));
}

TEST_CASE("marginals never exceed the propagated moment bound") {
  SimConfig cfg;
  cfg.paths = 5000;
  cfg.horizon = 5.0;
  cfg.grid_dt = 0.25;
  cfg.seed = 99;
  const DiGraph g = two_complete();
  const SisParams params = SisParams::homogeneous(2, 1, 1);
  const Trajectory traj = run_ensemble(g, params, cfg);

  const SecondOrder so = build_second_order(g, params);
  const auto [p0, q0] = deterministic_initial_state({1, 1});
  const Matrix bound = propagate_bound(so, p0, q0, traj.times);
  for (size_t k = 0; k < traj.times.size(); ++k)
    for (int i = 0; i < 2; ++i)
      CHECK(traj.marginals(i, static_cast<Index>(k)) <=
            bound(i, static_cast<Index>(k)) +
                3.0 * traj.marginal_stderr(i, static_cast<Index>(k)) + 1e-12);
}

TEST_CASE("decay fit on noiseless exponential data") {
  Trajectory traj;
  traj.paths = 1000000;  // noise floor low enough to keep every point
  const int points = 100;
  traj.times.resize(points);
  traj.mean_infected.resize(points);
  traj.stderr_mean = Vector::Zero(points);
  traj.marginals = Matrix::Zero(1, points);
  traj.marginal_stderr = Matrix::Zero(1, points);
  for (int k = 0; k < points; ++k) {
    traj.times[k] = 0.1 * k;
    traj.mean_infected[k] = 5.0 * std::exp(-0.3 * traj.times[k]);
  }
  const DecayEstimate est = estimate_decay(traj);
  CHECK(std::abs(est.rho_hat - 0.3) <= 1e-10);
  CHECK(est.slope_stderr <= 1e-10);
  CHECK(est.points_used >= 5);
  CHECK(std::abs(est.intercept - std::log(5.0)) <= 1e-8);
}

TEST_CASE("decay fit recovers a noisy slope within 3 standard errors") {
  RngStream rng(7777, 0);
  Trajectory traj;
  traj.paths = 10000;
  const int points = 200;
  traj.times.resize(points);
  traj.mean_infected.resize(points);
  traj.stderr_mean = Vector::Zero(points);
  traj.marginals = Matrix::Zero(1, points);
  traj.marginal_stderr = Matrix::Zero(1, points);
  for (int k = 0; k < points; ++k) {
    traj.times[k] = 0.05 * k;
    const Scalar noise = 1.0 + 0.01 * (2.0 * rng.next_unit() - 1.0);
    traj.mean_infected[k] = 4.0 * std::exp(-0.45 * traj.times[k]) * noise;
  }
  const DecayEstimate est = estimate_decay(traj);
  CHECK(std::abs(est.rho_hat - 0.45) <= 3.0 * est.slope_stderr);
}

TEST_CASE("decay fit error cases") {
  Trajectory traj;
  traj.paths = 100;
  traj.times = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  traj.mean_infected = Vector::Zero(6);
  traj.stderr_mean = Vector::Zero(6);
  traj.marginals = Matrix::Zero(1, 6);
  traj.marginal_stderr = Matrix::Zero(1, 6);
  CHECK_THROWS_AS(estimate_decay(traj), NumericError);  // all-zero m(t)

  for (int k = 0; k < 6; ++k) traj.mean_infected[k] = std::exp(-0.2 * k);
  CHECK_THROWS_AS(estimate_decay(traj, {{  4.0, 5.0 }}), NumericError);  // 2 points
  CHECK_NOTHROW(estimate_decay(traj, {{ 0.0, 5.0 }}));
}

TEST_CASE("trajectory csv shape") {
  SimConfig cfg;
  cfg.paths = 10;
  cfg.horizon = 1.0;
  cfg.grid_dt = 0.5;
  cfg.seed = 4;
  const Trajectory traj =
      run_ensemble(two_complete(), SisParams::homogeneous(2, 1, 1), cfg);
  const std::string csv = trajectory_csv(traj);
  CHECK(csv.rfind("t,m,stderr_m,p_0,p_1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 grid rows
}

TEST_CASE("sim config validation") {
  SimConfig cfg;
  cfg.paths = 0;
  CHECK_THROWS_AS(cfg.validate(2), InputError);
  cfg.paths = 1;
  cfg.initial = std::vector<int>{};
  CHECK_THROWS_AS(cfg.validate(2), InputError);
  cfg.initial = std::vector<int>{5};
  CHECK_THROWS_AS(cfg.validate(2), InputError);
  cfg.initial = std::vector<int>{1};
  CHECK_NOTHROW(cfg.validate(2));
}

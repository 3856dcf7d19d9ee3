// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "karate_fixture.hpp"
#include "sisdecay/bounds.hpp"
#include "sisdecay/exact.hpp"
#include "sisdecay/graph.hpp"
#include "sisdecay/simulator.hpp"
#include "test_support.hpp"

using namespace sisdecay;
using sisdecay::testing::random_positive_vector;
using sisdecay::testing::random_strongly_connected;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

DiGraph complete_graph(int n) {
  std::vector<DiGraph::Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) edges.emplace_back(u, v);
  return DiGraph(n, std::move(edges));
}

DiGraph directed_cycle(int n) {
  std::vector<DiGraph::Edge> edges;
  for (int u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
  return DiGraph(n, std::move(edges));
}

SisParams normalized_params(const DiGraph& g, Scalar frac) {
  const EigResult adj = lambda_max(SparseMetzler::from_sparse(g.adjacency_matrix()));
  if (!adj.converged) throw NumericError("adjacency eigensolve failed");
  return SisParams::homogeneous(g.node_count(), frac / adj.lambda_max, 1.0);
}

// ---- criterion 1: rho1 = 0.1 under the beta = 0.9/lambda_max(A) protocol

Outcome criterion1() {
  Outcome out;
  std::vector<std::pair<std::string, DiGraph>> graphs;
  graphs.emplace_back("2-cycle", directed_cycle(2));
  graphs.emplace_back("3-cycle", directed_cycle(3));
  graphs.emplace_back("K4", complete_graph(4));
  graphs.emplace_back(
      "ER(34)", restrict_to_largest_scc(gen_random({GraphFamily::ER, 34, 0.2, 1, 1, 91}))
                    .graph);
  graphs.emplace_back(
      "NWS(50)",
      restrict_to_largest_scc(gen_random({GraphFamily::NWS, 50, 0.1, 1, 2, 92})).graph);
  for (const auto& [name, g] : graphs) {
    if (!is_strongly_connected(g)) {
      out.pass = false;
      out.detail << name << " not strongly connected; ";
      continue;
    }
    const Scalar r1 = rho1(g, normalized_params(g, 0.9));
    const Scalar err = std::abs(r1 - 0.1);
    out.detail << name << " rho1=" << r1 << " ";
    if (err > 1e-8) out.pass = false;
  }
  return out;
}

// ---- criterion 2: closed forms of the two-node cycle

Outcome criterion2() {
  Outcome out;
  const DiGraph g = directed_cycle(2);
  const SisParams params = SisParams::homogeneous(2, 1, 1);
  const Scalar target = 2.0 - std::sqrt(2.0);

  const Scalar r1 = rho1(g, params);
  const Scalar r2 = rho2(g, params);
  const Scalar exact = exact_decay_rate(g, params);
  const ProofMatrices pm = build_proof_matrices(g, params, r2);
  Scalar lam_l = std::numeric_limits<Scalar>::quiet_NaN();
  if (pm.applicable) lam_l = lambda_max(pm.reduced).lambda_max;

  out.detail << "rho1=" << r1 << " rho2=" << r2 << " exact=" << exact
             << " lambda(L)=" << lam_l;
  out.pass = std::abs(r2 - target) <= 1e-9 && std::abs(exact - target) <= 1e-9 &&
             std::abs(r1) <= 1e-9 && pm.applicable && std::abs(lam_l - 1.0) <= 1e-7;
  return out;
}

// ---- criteria 3, 4, 6: sandwich properties over 200 random instances

struct SandwichResult {
  Outcome theorem;      // exact >= rho2 - 1e-9 and rho2 > rho1 + 1e-9
  Outcome strict_gap;   // rho1 < delta_min - 1e-9
  Outcome reduced;      // 1 - 1e-7 <= lambda_max(L) < max_i (...)
};

SandwichResult sandwich_criteria() {
  SandwichResult res;
  RngStream rng(20260810, 3);
  int applicable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(6));
    const DiGraph g = random_strongly_connected(n, rng, 0.3);
    const SisParams params(random_positive_vector(n, rng, 0.5, 2.0),
                           random_positive_vector(n, rng, 0.5, 2.0));
    const Scalar r1 = rho1(g, params);
    const Scalar r2 = rho2(g, params);
    const Scalar exact = exact_decay_rate(g, params);
    if (!(exact >= r2 - 1e-9) || !(r2 > r1 + 1e-9)) {
      res.theorem.pass = false;
      res.theorem.detail << "violation at trial " << trial << " (n=" << n
                         << " rho1=" << r1 << " rho2=" << r2 << " exact=" << exact
                         << "); ";
    }
    if (!(r1 < params.delta_min() - 1e-9)) {
      res.strict_gap.pass = false;
      res.strict_gap.detail << "violation at trial " << trial << "; ";
    }
    if (r2 < params.delta_min()) {
      ++applicable;
      const ProofMatrices pm = build_proof_matrices(g, params, r2);
      const EigResult lr = lambda_max(pm.reduced);
      const Scalar upper =
          ((params.delta.array() - r1) / (params.delta.array() - r2)).maxCoeff();
      if (!lr.converged || !(lr.lambda_max >= 1.0 - 1e-7) ||
          !(lr.lambda_max < upper)) {
        res.reduced.pass = false;
        res.reduced.detail << "violation at trial " << trial << " (lambda="
                           << lr.lambda_max << " upper=" << upper << "); ";
      }
    }
  }
  res.theorem.detail << "200 instances checked";
  res.strict_gap.detail << "200 instances checked";
  res.reduced.detail << applicable << " applicable instances checked";
  if (applicable == 0) res.reduced.pass = false;
  return res;
}

// ---- criterion 5: pair-graph strong connectivity

Outcome criterion5() {
  Outcome out;
  RngStream rng(20260810, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(13));
    const DiGraph g = random_strongly_connected(n, rng, 0.25);
    if (!is_strongly_connected(build_gpp(g))) {
      out.pass = false;
      out.detail << "violation at trial " << trial << " (n=" << n << "); ";
    }
  }
  out.detail << "100 pair graphs checked";
  return out;
}

// ---- criteria 7, 8: simulator fidelity and bound dominance

struct SimInstance {
  std::string name;
  DiGraph graph;
  SisParams params;
  Scalar horizon;
};

std::vector<SimInstance> sim_instances() {
  RngStream rng(20260810, 7);
  std::vector<SimInstance> instances;
  instances.push_back(
      {"2-cycle", directed_cycle(2), SisParams::homogeneous(2, 1, 1), 6.0});
  instances.push_back(
      {"K3", complete_graph(3), normalized_params(complete_graph(3), 0.9), 6.0});
  instances.push_back(
      {"3-cycle", directed_cycle(3), SisParams::homogeneous(3, 1.2, 1.0), 6.0});
  instances.push_back(
      {"K5", complete_graph(5), normalized_params(complete_graph(5), 0.9), 6.0});
  const DiGraph g6 = random_strongly_connected(6, rng, 0.3);
  instances.push_back({"random-6", g6, normalized_params(g6, 0.9), 6.0});
  return instances;
}

void sim_criteria(Outcome& fidelity, Outcome& dominance) {
  for (const auto& inst : sim_instances()) {
    const int n = inst.graph.node_count();
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.horizon = inst.horizon;
    cfg.grid_dt = 0.25;
    cfg.seed = 424242;
    cfg.threads = 0;
    const Trajectory traj = run_ensemble(inst.graph, inst.params, cfg);

    std::uint64_t all = (std::uint64_t{1} << n) - 1;
    const Matrix exact = exact_marginals(inst.graph, inst.params, all, traj.times);
    int inside = 0, total = 0;
    for (size_t k = 0; k < traj.times.size(); ++k)
      for (int i = 0; i < n; ++i) {
        const Scalar gap = std::abs(traj.marginals(i, static_cast<Index>(k)) -
                                    exact(i, static_cast<Index>(k)));
        ++total;
        if (gap <= 3.0 * traj.marginal_stderr(i, static_cast<Index>(k))) ++inside;
      }
    const Scalar frac = static_cast<Scalar>(inside) / static_cast<Scalar>(total);

    const Scalar rho_exact = exact_decay_rate(inst.graph, inst.params);
    const DecayEstimate est = estimate_decay(traj);
    const Scalar rel = std::abs(est.rho_hat - rho_exact) / rho_exact;
    fidelity.detail << inst.name << " inside=" << 100.0 * frac << "% rel=" << rel
                    << "; ";
    if (frac < 0.95 || rel > 0.1) fidelity.pass = false;

    const SecondOrder so = build_second_order(inst.graph, inst.params);
    const auto [p0, q0] = deterministic_initial_state(std::vector<char>(n, 1));
    const Matrix bound = propagate_bound(so, p0, q0, traj.times);
    int violations = 0;
    for (size_t k = 0; k < traj.times.size(); ++k)
      for (int i = 0; i < n; ++i) {
        if (traj.marginals(i, static_cast<Index>(k)) >
            bound(i, static_cast<Index>(k)) +
                3.0 * traj.marginal_stderr(i, static_cast<Index>(k)))
          ++violations;
      }
    dominance.detail << inst.name << " violations=" << violations << "; ";
    if (violations > 0) dominance.pass = false;
  }
}

// ---- criterion 9: eigensolver obligations

Outcome criterion9() {
  Outcome out;
  RngStream rng(20260810, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const Index dim = 2 + static_cast<Index>(rng.next_below(99));
    const SparseMetzler a = testing::random_metzler(dim, rng, 0.15, true);
    const SparseMetzler b = testing::bump_metzler(a, rng);
    const Scalar la = lambda_max(a).lambda_max;
    const Scalar lb = lambda_max(b).lambda_max;
    if (!(la <= lb + 1e-10)) {
      out.pass = false;
      out.detail << "monotonicity violation at trial " << trial << "; ";
    }
    const Vector u = random_positive_vector(dim, rng, 0.5, 2.0);
    const Vector au = a.matrix() * u;
    const Scalar rho = (au.array() / u.array()).maxCoeff() + 0.01 + rng.next_unit();
    if (!(la < rho)) {
      out.pass = false;
      out.detail << "subinvariance violation at trial " << trial << "; ";
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Index dim = 5 + static_cast<Index>(rng.next_below(196));
    const SparseMetzler m = testing::random_metzler(dim, rng, 0.1, true);
    const EigResult dense = lambda_max_dense(m.dense());
    const EigResult power = lambda_max_power(m);
    const Scalar gap = std::abs(dense.lambda_max - power.lambda_max);
    if (!dense.converged || !power.converged ||
        gap > 1e-8 * std::max(1.0, std::abs(dense.lambda_max))) {
      out.pass = false;
      out.detail << "power/dense mismatch at dim " << dim << " (gap=" << gap
                 << "); ";
    }
  }
  out.detail << "100 order instances + 10 power/dense comparisons";
  return out;
}

// ---- criterion 10: karate-club trend, optional user-supplied network

Outcome criterion10() {
  Outcome out;
  const DiGraph karate = testing::karate_graph();
  const SisParams params = normalized_params(karate, 0.9);
  const BoundsReport report = compute_bounds(karate, params);

  SimConfig cfg;
  cfg.paths = 10000;
  cfg.horizon = 30.0;
  cfg.grid_dt = 0.1;
  cfg.seed = 1908;
  cfg.threads = 0;
  const Trajectory traj = run_ensemble(karate, params, cfg);
  const DecayEstimate est = estimate_decay(traj);
  const Scalar e1 = (est.rho_hat - report.rho1) / est.rho_hat;
  const Scalar e2 = (est.rho_hat - report.rho2) / est.rho_hat;
  out.detail << "karate rho1=" << report.rho1 << " rho2=" << report.rho2
             << " rho_hat=" << est.rho_hat << " e1=" << e1 << " e2=" << e2;
  out.pass = std::abs(report.rho1 - 0.1) <= 1e-8 && est.rho_hat > 0.0 && e2 < e1;

  if (const char* path = std::getenv("SISDECAY_JEFFERSON")) {
    const DiGraph jeff = load_edge_list(path, {.bidirect = true});
    const SisParams jparams = normalized_params(jeff, 0.9);
    const Scalar jr1 = rho1(jeff, jparams);
    SimConfig jcfg;
    jcfg.paths = 10000;
    jcfg.horizon = 100.0;
    jcfg.grid_dt = 0.1;
    jcfg.seed = 1908;
    jcfg.threads = 0;
    jcfg.fit_window = {{2.0, 15.0}};
    const Trajectory jtraj = run_ensemble(jeff, jparams, jcfg);
    const DecayEstimate jest = estimate_decay(jtraj, jcfg.fit_window);
    out.detail << " | jefferson rho1=" << jr1 << " rho_hat=" << jest.rho_hat;
    if (std::abs(jr1 - 0.1) > 1e-8 || jest.rho_hat < 0.40 || jest.rho_hat > 0.51)
      out.pass = false;
  } else {
    out.detail << " | user-network check skipped (set SISDECAY_JEFFERSON to run)";
  }
  return out;
}

int report(int id, const std::string& label, const Outcome& out, double seconds) {
  std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
            << label << " — " << out.detail.str() << " (" << seconds << " s)\n";
  return out.pass ? 0 : 1;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto timed = [&failures](int id, const std::string& label, auto&& fn) {
    const auto start = clock::now();
    const Outcome out = fn();
    const double secs =
        std::chrono::duration<double>(clock::now() - start).count();
    failures += report(id, label, out, secs);
  };

  std::cout.precision(10);
  timed(1, "first-order normalization identity", criterion1);
  timed(2, "two-node closed forms", criterion2);

  const auto t3 = clock::now();
  const SandwichResult sandwich = sandwich_criteria();
  const double secs3 = std::chrono::duration<double>(clock::now() - t3).count();
  failures += report(3, "decay-rate sandwich on 200 random instances",
                     sandwich.theorem, secs3);
  failures += report(4, "strict first-order gap below delta_min",
                     sandwich.strict_gap, 0.0);
  timed(5, "pair-graph strong connectivity", criterion5);
  failures += report(6, "reduced-matrix eigenvalue sandwich", sandwich.reduced, 0.0);

  const auto t7 = clock::now();
  Outcome fidelity, dominance;
  sim_criteria(fidelity, dominance);
  const double secs7 = std::chrono::duration<double>(clock::now() - t7).count();
  failures += report(7, "simulator fidelity against the exact oracle", fidelity,
                     secs7);
  failures += report(8, "moment bound dominates the simulation", dominance, 0.0);
  timed(9, "eigensolver order and agreement obligations", criterion9);
  timed(10, "karate-club error ordering", criterion10);

  if (failures == 0)
    std::cout << "all acceptance criteria passed\n";
  else
    std::cout << failures << " acceptance criteria failed\n";
  return failures == 0 ? 0 : 1;
}

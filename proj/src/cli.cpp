#include "sisdecay/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sisdecay/bounds.hpp"
#include "sisdecay/exact.hpp"
#include "sisdecay/graph.hpp"
#include "sisdecay/simulator.hpp"

namespace sisdecay {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitResource = 4;

void write_file_atomic(const std::string& path, const std::string& content) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_file_atomic(out_path, content);
}

Vector read_rate_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rate file: " + path);
  std::vector<Scalar> values;
  Scalar x;
  while (in >> x) values.push_back(x);
  if (!in.eof()) throw InputError("non-numeric token in rate file: " + path);
  if (static_cast<int>(values.size()) != n)
    throw InputError("rate file " + path + " has " + std::to_string(values.size()) +
                     " values, expected " + std::to_string(n));
  return Eigen::Map<Vector>(values.data(), n);
}

struct GraphOpts {
  std::string path;
  bool bidirect = false;
};

struct RateOpts {
  std::optional<Scalar> beta, delta, beta_frac;
  std::string beta_file, delta_file;
};

void add_graph_options(CLI::App* cmd, GraphOpts& opts) {
  cmd->add_option("--graph", opts.path, "edge-list file")->required();
  cmd->add_flag("--bidirect", opts.bidirect,
                "insert the reverse of every listed edge");
}

void add_rate_options(CLI::App* cmd, RateOpts& opts) {
  auto* beta = cmd->add_option("--beta", opts.beta, "homogeneous infection rate");
  auto* beta_file =
      cmd->add_option("--beta-file", opts.beta_file, "per-node infection rates");
  auto* beta_frac = cmd->add_option(
      "--beta-frac", opts.beta_frac,
      "set beta_i = C / lambda_max(A) and delta_i = 1");
  auto* delta = cmd->add_option("--delta", opts.delta,
                                "homogeneous recovery rate (default 1)");
  auto* delta_file =
      cmd->add_option("--delta-file", opts.delta_file, "per-node recovery rates");
  beta->excludes(beta_file)->excludes(beta_frac);
  beta_file->excludes(beta_frac);
  beta_frac->excludes(delta)->excludes(delta_file);
  delta->excludes(delta_file);
}

// Resolves the rate vectors; lambda_adj is filled with lambda_max(A) when it
// had to be computed (beta-frac mode), otherwise left untouched.
SisParams resolve_rates(const DiGraph& g, const RateOpts& opts,
                        std::optional<Scalar>& lambda_adj) {
  const int n = g.node_count();
  if (!opts.beta && opts.beta_file.empty() && !opts.beta_frac)
    throw InputError("one of --beta, --beta-file, --beta-frac is required");
  if (opts.beta_frac) {
    if (!(*opts.beta_frac > 0.0)) throw InputError("--beta-frac must be positive");
    const EigResult adj = lambda_max(SparseMetzler::from_sparse(g.adjacency_matrix()));
    if (!adj.converged)
      throw NumericError("adjacency eigensolve did not converge");
    if (!(adj.lambda_max > 0.0))
      throw NumericError("beta-frac normalization needs lambda_max(A) > 0");
    lambda_adj = adj.lambda_max;
    return SisParams::homogeneous(n, *opts.beta_frac / adj.lambda_max, 1.0);
  }
  Vector beta = opts.beta_file.empty() ? Vector::Constant(n, opts.beta.value())
                                       : read_rate_file(opts.beta_file, n);
  Vector delta = Vector::Constant(n, opts.delta.value_or(1.0));
  if (!opts.delta_file.empty()) delta = read_rate_file(opts.delta_file, n);
  return SisParams(beta, delta);
}

json bounds_json(const BoundsReport& report) {
  const Index iterations = report.adjacency_solve.iterations +
                           report.first_order_solve.iterations +
                           report.second_order_solve.iterations;
  const Scalar residual =
      std::max({report.adjacency_solve.residual, report.first_order_solve.residual,
                report.second_order_solve.residual});
  return json{{"n", report.n},
              {"lambda_max_adjacency", report.lambda_max_adjacency},
              {"rho1", report.rho1},
              {"rho2", report.rho2},
              {"delta_min", report.delta_min},
              {"strongly_connected", report.strongly_connected},
              {"solver", json{{"iterations", iterations}, {"residual", residual}}}};
}

int cmd_bounds(const GraphOpts& graph_opts, const RateOpts& rate_opts,
               const std::string& out) {
  const DiGraph g = load_edge_list(graph_opts.path, {graph_opts.bidirect});
  std::optional<Scalar> lambda_adj;
  const SisParams params = resolve_rates(g, rate_opts, lambda_adj);
  const BoundsReport report = compute_bounds(g, params);
  if (!report.strongly_connected)
    std::cerr << "warning: graph is not strongly connected; the strict ordering "
                 "rho2 > rho1 is not guaranteed\n";
  emit(out, bounds_json(report).dump(2) + "\n");
  return kExitOk;
}

int cmd_exact(const GraphOpts& graph_opts, const RateOpts& rate_opts,
              const std::string& out, int max_exact_n) {
  const DiGraph g = load_edge_list(graph_opts.path, {graph_opts.bidirect});
  std::optional<Scalar> lambda_adj;
  const SisParams params = resolve_rates(g, rate_opts, lambda_adj);
  if (max_exact_n > kDefaultMaxExactNodes)
    std::cerr << "warning: raising the exact-size cap to " << max_exact_n
              << " allocates a dense " << ((1LL << max_exact_n) - 1) << "^2 matrix\n";
  const Scalar rho = exact_decay_rate(g, params, max_exact_n);
  emit(out, json{{"n", g.node_count()}, {"rho_exact", rho}}.dump(2) + "\n");
  return kExitOk;
}

struct SimOpts {
  Index paths = 10000;
  Scalar horizon = 100.0;
  Scalar grid_dt = 0.1;
  std::string init = "all";
  std::string fit_window;
  int threads = 1;
};

void add_sim_options(CLI::App* cmd, SimOpts& opts) {
  cmd->add_option("--paths", opts.paths, "sample paths");
  cmd->add_option("--horizon", opts.horizon, "simulated time span");
  cmd->add_option("--grid-dt", opts.grid_dt, "sampling interval");
  cmd->add_option("--init", opts.init, "'all' or a file of initially infected ids");
  cmd->add_option("--fit-window", opts.fit_window, "decay fit window as A,B");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

SimConfig make_sim_config(const SimOpts& opts, std::uint64_t seed) {
  SimConfig cfg;
  cfg.paths = opts.paths;
  cfg.horizon = opts.horizon;
  cfg.grid_dt = opts.grid_dt;
  cfg.seed = seed;
  cfg.threads = opts.threads;
  if (opts.init != "all") {
    std::ifstream in(opts.init);
    if (!in) throw InputError("cannot open initial-set file: " + opts.init);
    std::vector<int> nodes;
    int v;
    while (in >> v) nodes.push_back(v);
    if (!in.eof()) throw InputError("non-integer token in initial-set file");
    cfg.initial = std::move(nodes);
  }
  if (!opts.fit_window.empty()) {
    Scalar a, b;
    if (std::sscanf(opts.fit_window.c_str(), "%lf,%lf", &a, &b) != 2)
      throw InputError("--fit-window expects A,B");
    cfg.fit_window = {a, b};
  }
  return cfg;
}

json decay_json(const DecayEstimate& est) {
  return json{{"rho_hat", est.rho_hat},
              {"window", {est.window_lo, est.window_hi}},
              {"slope_stderr", est.slope_stderr},
              {"points_used", est.points_used},
              {"intercept", est.intercept}};
}

int cmd_simulate(const GraphOpts& graph_opts, const RateOpts& rate_opts,
                 const SimOpts& sim_opts, std::uint64_t seed,
                 const std::string& out) {
  const DiGraph g = load_edge_list(graph_opts.path, {graph_opts.bidirect});
  std::optional<Scalar> lambda_adj;
  const SisParams params = resolve_rates(g, rate_opts, lambda_adj);
  const SimConfig cfg = make_sim_config(sim_opts, seed);
  const Trajectory traj = run_ensemble(g, params, cfg);
  write_file_atomic(out, trajectory_csv(traj));
  const DecayEstimate est = estimate_decay(traj, cfg.fit_window);
  fs::path decay_path(out);
  decay_path.replace_extension(".decay.json");
  write_file_atomic(decay_path.string(), decay_json(est).dump(2) + "\n");
  return kExitOk;
}

struct GenOpts {
  std::string family;
  int n = 0;
  double p = 0.0;
  int m = 1;
  int k = 1;
  bool scc_restrict = false;
};

GraphFamily parse_family(const std::string& name) {
  if (name == "er") return GraphFamily::ER;
  if (name == "ba") return GraphFamily::BA;
  if (name == "nws") return GraphFamily::NWS;
  throw InputError("unknown graph family: " + name + " (expected er|ba|nws)");
}

int cmd_gen(const GenOpts& opts, std::uint64_t seed, const std::string& out) {
  GraphGenSpec spec;
  spec.family = parse_family(opts.family);
  spec.n = opts.n;
  spec.p = opts.p;
  spec.m = opts.m;
  spec.k = opts.k;
  spec.seed = seed;
  DiGraph g = gen_random(spec);
  if (opts.scc_restrict) g = restrict_to_largest_scc(g).graph;
  emit(out, write_edge_list(g));
  return kExitOk;
}

struct ExperimentOpts {
  std::vector<std::string> families;
  std::vector<int> sizes;
  std::vector<double> beta_fracs;
  int realizations = 20;
  double er_p = 0.2;
  int ba_m = 2;
  int nws_k = 2;
  double nws_p = 0.1;
};

std::string plot_script(const std::string& csv_name) {
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
    << "# Plots mean relative errors of the two decay-rate bounds from\n"
    << "# " << csv_name << " (one marker pair per family/size cell).\n"
    << "import csv, collections\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "cells = collections.defaultdict(list)\n"
    << "with open(" << std::quoted(csv_name) << ") as f:\n"
    << "    for row in csv.DictReader(r for r in f if not r.startswith('#')):\n"
    << "        if row['status'] != 'ok':\n"
    << "            continue\n"
    << "        key = (row['family'], float(row['beta_frac']), int(row['n']))\n"
    << "        cells[key].append((float(row['e1']), float(row['e2'])))\n\n"
    << "fracs = sorted({k[1] for k in cells})\n"
    << "fig, axes = plt.subplots(1, len(fracs), figsize=(5 * len(fracs), 4),\n"
    << "                         squeeze=False)\n"
    << "for ax, frac in zip(axes[0], fracs):\n"
    << "    for family in sorted({k[0] for k in cells}):\n"
    << "        ns = sorted(k[2] for k in cells if k[:2] == (family, frac))\n"
    << "        if not ns:\n"
    << "            continue\n"
    << "        m1 = [sum(v[0] for v in cells[(family, frac, n)]) /\n"
    << "              len(cells[(family, frac, n)]) for n in ns]\n"
    << "        m2 = [sum(v[1] for v in cells[(family, frac, n)]) /\n"
    << "              len(cells[(family, frac, n)]) for n in ns]\n"
    << "        ax.plot(ns, m1, 'o--', fillstyle='none', label=family + ' e1')\n"
    << "        ax.plot(ns, m2, 'o-', label=family + ' e2')\n"
    << "    ax.set_xlabel('n')\n"
    << "    ax.set_ylabel('mean relative error')\n"
    << "    ax.set_title(f'beta = {frac} / lambda_max(A)')\n"
    << "    ax.legend()\n"
    << "plt.tight_layout()\n"
    << "plt.savefig('relative_errors.png', dpi=150)\n"
    << "print('wrote relative_errors.png')\n";
  return s.str();
}

int cmd_experiment(const ExperimentOpts& opts, const SimOpts& sim_opts,
                   std::uint64_t seed, const std::string& out) {
  if (opts.families.empty() || opts.sizes.empty() || opts.beta_fracs.empty())
    throw CLI::ValidationError("experiment",
                               "families, sizes and beta-fracs must be nonempty");
  if (opts.realizations < 1)
    throw CLI::ValidationError("experiment", "realizations must be at least 1");

  std::ostringstream csv;
  csv << "family,n,beta_frac,seed,rho1,rho2,rho_hat,e1,e2,status\n";
  char buf[64];
  auto num = [&buf](Scalar x) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
  };

  struct CellStats {
    int ok = 0;
    Scalar e1 = 0, e2 = 0, rho1 = 0, rho2 = 0, rho_hat = 0;
  };
  std::vector<std::pair<std::string, CellStats>> summary;
  RngStream seeder(seed, 0x5eedULL);

  for (const auto& family_name : opts.families) {
    const GraphFamily family = parse_family(family_name);
    for (int n : opts.sizes) {
      for (double frac : opts.beta_fracs) {
        CellStats stats;
        for (int rep = 0; rep < opts.realizations; ++rep) {
          const std::uint64_t r_seed = seeder.next_u64();
          std::string status = "ok";
          Scalar v_rho1 = NAN, v_rho2 = NAN, v_rho_hat = NAN, e1 = NAN, e2 = NAN;
          try {
            GraphGenSpec spec;
            spec.family = family;
            spec.n = n;
            spec.seed = r_seed;
            spec.p = family == GraphFamily::ER ? opts.er_p : opts.nws_p;
            spec.m = opts.ba_m;
            spec.k = opts.nws_k;
            const DiGraph g = restrict_to_largest_scc(gen_random(spec)).graph;

            RateOpts rates;
            rates.beta_frac = frac;
            std::optional<Scalar> lambda_adj;
            const SisParams params = resolve_rates(g, rates, lambda_adj);
            const BoundsReport report = compute_bounds(g, params);
            v_rho1 = report.rho1;
            v_rho2 = report.rho2;

            SimConfig cfg = make_sim_config(sim_opts, r_seed);
            const Trajectory traj = run_ensemble(g, params, cfg);
            const DecayEstimate est = estimate_decay(traj, cfg.fit_window);
            v_rho_hat = est.rho_hat;
            e1 = (v_rho_hat - v_rho1) / v_rho_hat;
            e2 = (v_rho_hat - v_rho2) / v_rho_hat;
            stats.ok += 1;
            stats.e1 += e1;
            stats.e2 += e2;
            stats.rho1 += v_rho1;
            stats.rho2 += v_rho2;
            stats.rho_hat += v_rho_hat;
          } catch (const std::exception& err) {
            status = std::string("failed: ") + err.what();
            for (char& c : status)
              if (c == ',' || c == '\n') c = ';';
          }
          csv << family_name << "," << n << "," << num(frac) << "," << r_seed << ","
              << num(v_rho1) << "," << num(v_rho2) << "," << num(v_rho_hat) << ","
              << num(e1) << "," << num(e2) << "," << status << "\n";
        }
        std::ostringstream line;
        line << "# cell family=" << family_name << " n=" << n
             << " beta_frac=" << num(frac) << " ok=" << stats.ok << "/"
             << opts.realizations;
        if (stats.ok > 0) {
          const auto den = static_cast<Scalar>(stats.ok);
          line << " mean_rho1=" << num(stats.rho1 / den)
               << " mean_rho2=" << num(stats.rho2 / den)
               << " mean_rho_hat=" << num(stats.rho_hat / den)
               << " mean_e1=" << num(stats.e1 / den)
               << " mean_e2=" << num(stats.e2 / den);
        }
        summary.emplace_back(line.str(), stats);
      }
    }
  }
  for (const auto& [line, stats] : summary) csv << line << "\n";

  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file_atomic(out, csv.str());
    fs::path script_path(out);
    script_path.replace_extension(".plot.py");
    write_file_atomic(script_path.string(),
                      plot_script(fs::path(out).filename().string()));
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Decay-rate bounds and simulation for stochastic SIS epidemics "
               "on directed networks"};
  app.require_subcommand(1);

  GraphOpts graph_opts;
  RateOpts rate_opts;
  SimOpts sim_opts;
  GenOpts gen_opts;
  ExperimentOpts exp_opts;
  std::uint64_t seed = 0;
  std::string out;
  int max_exact_n = kDefaultMaxExactNodes;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--out", out, "output path");
    cmd->set_config("--config", "", "config file with key=value lines");
  };

  auto* bounds = app.add_subcommand(
      "bounds", "first- and second-order lower bounds on the decay rate");
  add_graph_options(bounds, graph_opts);
  add_rate_options(bounds, rate_opts);
  add_common(bounds);

  auto* simulate =
      app.add_subcommand("simulate", "Monte Carlo ensemble and decay-rate fit");
  add_graph_options(simulate, graph_opts);
  add_rate_options(simulate, rate_opts);
  add_sim_options(simulate, sim_opts);
  add_common(simulate);
  simulate->get_option("--out")->required();

  auto* exact = app.add_subcommand(
      "exact", "exact decay rate from the full transient generator");
  add_graph_options(exact, graph_opts);
  add_rate_options(exact, rate_opts);
  exact->add_option("--max-exact-n", max_exact_n,
                    "node-count cap for the dense eigensolve");
  add_common(exact);

  auto* gen = app.add_subcommand("gen", "write a seeded random graph");
  gen->add_option("--family", gen_opts.family, "er|ba|nws")->required();
  gen->add_option("--n", gen_opts.n, "node count")->required();
  gen->add_option("--p", gen_opts.p, "ER edge / NWS shortcut probability");
  gen->add_option("--m", gen_opts.m, "BA attachment count");
  gen->add_option("--k", gen_opts.k, "NWS ring half-degree");
  gen->add_flag("--scc-restrict", gen_opts.scc_restrict,
                "keep only the largest strongly connected component");
  add_common(gen);

  auto* experiment = app.add_subcommand(
      "experiment", "bound-vs-simulation sweep over random graph families");
  experiment->add_option("--families", exp_opts.families, "er|ba|nws list")
      ->required()
      ->delimiter(',');
  experiment->add_option("--sizes", exp_opts.sizes, "node counts")
      ->required()
      ->delimiter(',');
  experiment->add_option("--beta-fracs", exp_opts.beta_fracs, "beta-frac values")
      ->required()
      ->delimiter(',');
  experiment->add_option("--realizations", exp_opts.realizations,
                         "graphs per (family, n, beta-frac) cell");
  experiment->add_option("--er-p", exp_opts.er_p, "ER edge probability");
  experiment->add_option("--ba-m", exp_opts.ba_m, "BA attachment count");
  experiment->add_option("--nws-k", exp_opts.nws_k, "NWS ring half-degree");
  experiment->add_option("--nws-p", exp_opts.nws_p, "NWS shortcut probability");
  add_sim_options(experiment, sim_opts);
  add_common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (bounds->parsed()) return cmd_bounds(graph_opts, rate_opts, out);
    if (simulate->parsed())
      return cmd_simulate(graph_opts, rate_opts, sim_opts, seed, out);
    if (exact->parsed()) return cmd_exact(graph_opts, rate_opts, out, max_exact_n);
    if (gen->parsed()) return cmd_gen(gen_opts, seed, out);
    if (experiment->parsed()) return cmd_experiment(exp_opts, sim_opts, seed, out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("sisdecay");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace sisdecay

// Command-line front end: instance generation, single-instance method runs,
// phase-diagram grids, and fast brute-force oracle cross-checks.
//
// Exit codes: 0 success, 1 check failure, 2 invalid arguments or config,
// 3 numerical failure, 4 file I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfphase/mfphase.hpp"

namespace {

using namespace mfphase;

AngleMode parse_mode(const std::string& s) {
  if (s == "discrete") return AngleMode::Discrete;
  if (s == "continuous") return AngleMode::Continuous;
  throw std::invalid_argument("mode must be 'discrete' or 'continuous', got '" + s + "'");
}

struct GenerateArgs {
  ModelParams params;
  std::string mode_name = "discrete";
  std::string out;
  bool no_truth = false;
};

int cmd_generate(GenerateArgs& args) {
  args.params.mode = parse_mode(args.mode_name);
  args.params.validate();
  const auto [truth, obs] = generate(args.params);
  save_instance(args.out, args.params, obs, args.no_truth ? nullptr : &truth);
  std::cout << "wrote " << args.out << ": n=" << args.params.n << " m=" << args.params.m
            << " k_max=" << args.params.k_max << " mode=" << args.mode_name
            << " edges=" << obs.edge_count() << (args.no_truth ? " (truth omitted)" : "")
            << "\n";
  return 0;
}

struct RunArgs {
  std::string in;
  GenerateArgs gen;  // used when no input file is given
  std::string method_name = "all";
  MethodConfig cfg;
  bool no_early_stop = false;
  bool trace = false;
  std::string est_out;
};

void write_estimate(const std::string& path, const Estimate& est) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  out << "# node cluster phase_rad\n";
  for (std::size_t i = 0; i < est.assignment.size(); ++i)
    out << i << " " << est.assignment[i] << " " << est.phase_rad[i] << "\n";
  if (!out) throw io_error("estimate write failed");
}

int cmd_run(RunArgs& args) {
  LoadedInstance inst;
  if (!args.in.empty()) {
    inst = load_instance(args.in);
  } else {
    args.gen.params.mode = parse_mode(args.gen.mode_name);
    args.gen.params.validate();
    auto [truth, obs] = generate(args.gen.params);
    inst.params = args.gen.params;
    inst.obs = std::move(obs);
    inst.truth = std::move(truth);
    inst.has_truth = true;
  }
  args.cfg.gpm_early_stop = !args.no_early_stop;

  std::vector<Method> methods;
  if (args.method_name == "all")
    methods = all_methods();
  else
    methods.push_back(method_from_name(args.method_name));

  const FrequencyStack stack = frequency_stack(inst.obs, inst.params.k_max);
  std::cout << "instance: n=" << inst.params.n << " m=" << inst.params.m
            << " k_max=" << inst.params.k_max << " mode=" << to_string(inst.params.mode)
            << " p=" << inst.params.p << " q=" << inst.params.q
            << " edges=" << inst.obs.edge_count() << "\n";

  for (Method method : methods) {
    const auto t0 = std::chrono::steady_clock::now();
    const MethodRun run = run_method(method, stack, inst.params.m, args.cfg);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    std::cout << "method " << method_name(method) << ":";
    if (inst.has_truth) {
      const bool exact = exact_recovery(run.estimate.assignment, inst.truth.assignment);
      const double eps = eps_error(run.estimate, inst.truth, inst.params.m);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6e", eps);
      std::cout << " exact=" << (exact ? 1 : 0) << " eps=" << buf;
    }
    char tbuf[64];
    std::snprintf(tbuf, sizeof tbuf, "%.3f", ms);
    std::cout << " time_ms=" << tbuf;
    if (uses_gpm(method))
      std::cout << " iterations=" << run.gpm_iterations
                << " fixed_point=" << (run.gpm_fixed_point ? 1 : 0);
    std::cout << "\n";

    if (args.trace) {
      std::cout << "  pivots:";
      for (int c : run.pivots) std::cout << " " << c;
      std::cout << "\n";
      for (std::size_t t = 0; t < run.gpm_trace.size(); ++t) {
        const GpmIterRecord& rec = run.gpm_trace[t];
        char line[160];
        std::snprintf(line, sizeof line, "  iter %3zu: objective=%.6f changes=%d ms=%.3f",
                      t + 1, rec.objective, rec.assignment_changes, rec.wall_ms);
        std::cout << line << "\n";
      }
    }
    if (!args.est_out.empty() && methods.size() == 1) write_estimate(args.est_out, run.estimate);
  }
  if (!args.est_out.empty() && methods.size() != 1)
    throw std::invalid_argument("--est-out needs a single --method, not 'all'");
  return 0;
}

struct GridArgs {
  ExperimentGrid grid;
  std::string mode_name = "discrete";
  std::string methods_csv;
  bool no_early_stop = false;
  bool no_timing = false;
  std::string config_path;
  std::string out_dir = "results";
};

int cmd_grid(GridArgs& args) {
  args.grid.mode = parse_mode(args.mode_name);
  if (!args.methods_csv.empty()) apply_config_entry(args.grid, "methods", args.methods_csv);
  args.grid.gpm_early_stop = !args.no_early_stop;
  args.grid.record_timing = !args.no_timing;
  // Config file entries take precedence over command-line flags.
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) throw io_error("cannot open config '" + args.config_path + "' for reading");
    apply_config_stream(args.grid, in);
  }
  args.grid.validate();

  std::cout << "grid: " << args.grid.alpha_count << "x" << args.grid.beta_count << " cells, "
            << args.grid.trials << " trials, " << args.grid.methods.size() << " methods, n="
            << args.grid.n << " m=" << args.grid.m << " k_max=" << args.grid.k_max
            << " mode=" << to_string(args.grid.mode) << " threads=" << args.grid.threads
            << "\n";

  const GridResult result = run_grid(args.grid);
  emit_results(args.out_dir, result);
  std::cout << "wrote " << args.out_dir << "/results.csv, per-method matrices, manifest.txt\n";

  const int cells = args.grid.alpha_count * args.grid.beta_count;
  for (std::size_t mi = 0; mi < args.grid.methods.size(); ++mi) {
    int pooled_exact = 0;
    double srer_sum = 0.0;
    double eps_sum = 0.0;
    for (const CellResult& cr : result.cells) {
      pooled_exact += cr.per_method[mi].exact;
      srer_sum += cr.per_method[mi].srer;
      eps_sum += cr.per_method[mi].eps_mean;
    }
    const int pooled_trials = cells * args.grid.trials;
    const auto [lo, hi] = wilson_interval(pooled_exact, pooled_trials);
    char line[240];
    std::snprintf(line, sizeof line,
                  "method %-8s grid SRER mean=%.4f pooled=%d/%d (95%% CI %.4f..%.4f) "
                  "eps mean=%.4f",
                  method_name(args.grid.methods[mi]).c_str(), srer_sum / cells, pooled_exact,
                  pooled_trials, lo, hi, eps_sum / cells);
    std::cout << line << "\n";
  }
  return 0;
}

// Fast cross-checks of the fast paths against brute force, small enough to
// run on every build. The acceptance suite repeats them at full scale.
int cmd_oracle_check() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  {  // balanced projection against exhaustive enumeration
    bool ok = true;
    SplitMix64 rng(101);
    for (int t = 0; t < 200 && ok; ++t) {
      const int m = 2 + static_cast<int>(rng.below(2));
      const int s = 1 + static_cast<int>(rng.below(m == 2 ? 5 : 3));
      const int n = m * s;
      Eigen::MatrixXd x(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          x(i, j) = static_cast<double>(static_cast<int>(rng.below(19)) - 9);
      const ProjectionResult fast = project_onto_H(x);
      const BruteForceProjection brute = brute_force_project(x);
      double fast_value = 0.0;
      for (int i = 0; i < n; ++i) fast_value += x(i, fast.assignment[static_cast<std::size_t>(i)]);
      ok = std::abs(fast_value - brute.value) < 1e-9;
    }
    report("projection matches brute force on integer scores", ok);
  }

  {  // grid argmax against direct evaluation
    bool ok = true;
    SplitMix64 rng(202);
    for (int t = 0; t < 300 && ok; ++t) {
      const int k_max = static_cast<int>(rng.below(9));
      const PhaseGrid grid{AngleMode::Discrete, k_max, 16};
      Eigen::VectorXcd coeffs(2 * k_max + 1);
      for (int k = -k_max; k <= k_max; ++k)
        coeffs(k + k_max) = cd{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
      const GridArgmax fast = argmax_over_grid(grid, coeffs);
      int best_idx = 0;
      double best = -1e300;
      for (int idx = 0; idx < grid.size(); ++idx) {
        double v = 0.0;
        for (int k = -k_max; k <= k_max; ++k) {
          const cd c = coeffs(k + k_max);
          v += (c * std::polar(1.0, -k * grid.angle(idx))).real();
        }
        if (v > best + 1e-9) {
          best = v;
          best_idx = idx;
        }
      }
      ok = fast.index == best_idx && std::abs(fast.score - best) < 1e-8;
    }
    report("grid argmax matches direct trigonometric scan", ok);
  }

  {  // pivoted QR at a single frequency against the reference factorization
    bool ok = true;
    SplitMix64 rng(303);
    for (int t = 0; t < 50 && ok; ++t) {
      const int m = 2 + static_cast<int>(rng.below(4));
      const int n = m + 2 + static_cast<int>(rng.below(8));
      EigBasis basis;
      basis.k_max = 0;
      basis.m = m;
      basis.phi.resize(1);
      basis.values.resize(1);
      Eigen::MatrixXcd phi(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) phi(i, j) = cd{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
      basis.phi[0] = phi;
      basis.values[0] = Eigen::VectorXd::Ones(m);
      const MfCpqrResult fact = mf_cpqr(basis);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> ref(phi.transpose());
      std::vector<int> ref_pivots(ref.colsPermutation().indices().data(),
                                  ref.colsPermutation().indices().data() + n);
      bool same = true;
      for (int r = 0; r < m; ++r) same = same && fact.pivots[static_cast<std::size_t>(r)] ==
                                                     ref_pivots[static_cast<std::size_t>(r)];
      ok = same;
    }
    report("single-frequency pivot sequence matches reference QR", ok);
  }

  {  // iterative eigensolver against the dense one
    bool ok = true;
    SplitMix64 rng(404);
    for (int t = 0; t < 10 && ok; ++t) {
      ModelParams params;
      params.n = 48;
      params.m = 2 + static_cast<int>(rng.below(2));
      while (params.n % params.m != 0) params.n += 1;
      params.k_max = 2;
      params.mode = AngleMode::Discrete;
      params.p = 0.9;
      params.q = 0.1;
      params.seed = rng.next();
      const auto [truth, obs] = generate(params);
      const FrequencyStack stack = frequency_stack(obs, params.k_max);
      EigOptions dense_opt;
      dense_opt.force_dense = true;
      EigOptions iter_opt;
      iter_opt.force_iterative = true;
      const EigBasis a = top_m_eigvecs(stack, params.m, dense_opt);
      const EigBasis b = top_m_eigvecs(stack, params.m, iter_opt);
      for (int k = -params.k_max; k <= params.k_max && ok; ++k) {
        // Compare spanned subspaces: singular values of A^H B must all be 1.
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.basis(k).adjoint() * b.basis(k));
        ok = (svd.singularValues().array() > 1.0 - 1e-8).all();
      }
    }
    report("iterative eigenbasis spans the dense eigenbasis", ok);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-frequency joint community detection and phase synchronization"};
  app.set_version_flag("--version", std::string(mfphase::kVersion));
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "sample an instance and write it to a file");
  gen->add_option("--n", gen_args.params.n, "number of nodes")->required();
  gen->add_option("--m", gen_args.params.m, "number of clusters")->required();
  gen->add_option("--k-max", gen_args.params.k_max, "frequency cutoff");
  gen->add_option("--mode", gen_args.mode_name, "discrete or continuous");
  gen->add_option("--p", gen_args.params.p, "within-cluster edge probability")->required();
  gen->add_option("--q", gen_args.params.q, "cross-cluster edge probability")->required();
  gen->add_option("--seed", gen_args.params.seed, "rng seed");
  gen->add_option("--out", gen_args.out, "output path")->required();
  gen->add_flag("--no-truth", gen_args.no_truth, "omit ground truth from the file");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run methods on one instance");
  run->add_option("--in", run_args.in, "instance file (omit to generate)");
  run->add_option("--n", run_args.gen.params.n, "nodes (generation)");
  run->add_option("--m", run_args.gen.params.m, "clusters (generation)");
  run->add_option("--k-max", run_args.gen.params.k_max, "frequency cutoff (generation)");
  run->add_option("--mode", run_args.gen.mode_name, "discrete or continuous (generation)");
  run->add_option("--p", run_args.gen.params.p, "within-cluster probability (generation)");
  run->add_option("--q", run_args.gen.params.q, "cross-cluster probability (generation)");
  run->add_option("--seed", run_args.gen.params.seed, "rng seed (generation)");
  run->add_option("--method", run_args.method_name,
                  "MF-CPQR, CPQR-SF, MF-GPM, GPM-SF, or all");
  run->add_option("--gpm-iterations", run_args.cfg.gpm_iterations, "iteration cap");
  run->add_flag("--no-early-stop", run_args.no_early_stop, "always run the full cap");
  run->add_option("--zero-pad", run_args.cfg.zero_pad_factor,
                  "continuous-mode grid refinement factor");
  run->add_flag("--exclude-zero", run_args.cfg.exclude_zero_freq,
                "drop frequency 0 from multi-frequency selections");
  run->add_flag("--trace", run_args.trace, "print pivots and per-iteration records");
  run->add_option("--est-out", run_args.est_out, "write the estimate to this path");

  GridArgs grid_args;
  CLI::App* grid = app.add_subcommand("grid", "run a phase-diagram grid and emit tables");
  grid->add_option("--n", grid_args.grid.n, "number of nodes");
  grid->add_option("--m", grid_args.grid.m, "number of clusters");
  grid->add_option("--k-max", grid_args.grid.k_max, "frequency cutoff");
  grid->add_option("--mode", grid_args.mode_name, "discrete or continuous");
  grid->add_option("--alpha-min", grid_args.grid.alpha_min, "smallest within-density multiplier");
  grid->add_option("--alpha-max", grid_args.grid.alpha_max, "largest within-density multiplier");
  grid->add_option("--alpha-count", grid_args.grid.alpha_count, "alpha grid size");
  grid->add_option("--beta-min", grid_args.grid.beta_min, "smallest cross-density multiplier");
  grid->add_option("--beta-max", grid_args.grid.beta_max, "largest cross-density multiplier");
  grid->add_option("--beta-count", grid_args.grid.beta_count, "beta grid size");
  grid->add_option("--trials", grid_args.grid.trials, "trials per cell");
  grid->add_option("--methods", grid_args.methods_csv, "comma-separated method list");
  grid->add_option("--gpm-iterations", grid_args.grid.gpm_iterations, "iteration cap");
  grid->add_flag("--no-early-stop", grid_args.no_early_stop, "always run the full cap");
  grid->add_option("--zero-pad", grid_args.grid.zero_pad_factor,
                   "continuous-mode grid refinement factor");
  grid->add_flag("--exclude-zero", grid_args.grid.exclude_zero_freq,
                 "drop frequency 0 from multi-frequency selections");
  grid->add_option("--seed", grid_args.grid.base_seed, "base seed");
  grid->add_option("--threads", grid_args.grid.threads, "worker threads");
  grid->add_flag("--no-timing", grid_args.no_timing, "pin time_ms columns to zero");
  grid->add_flag("--eps-max-matrix", grid_args.grid.eps_matrix_max,
                 "eps matrices report per-cell max instead of mean");
  grid->add_option("--config", grid_args.config_path,
                   "key=value file applied after flags (a manifest.txt reruns its grid)");
  grid->add_option("--out", grid_args.out_dir, "output directory");

  CLI::App* oracle = app.add_subcommand("oracle-check", "cross-check fast paths vs brute force");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (run->parsed()) return cmd_run(run_args);
    if (grid->parsed()) return cmd_grid(grid_args);
    if (oracle->parsed()) return cmd_oracle_check();
  } catch (const mfphase::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const mfphase::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

// Experiment driver: named method pipelines, a (alpha, beta) phase-diagram
// grid runner with paired instances across methods, and the table/manifest
// formats it emits. Output bytes are deterministic for a fixed config: trials
// are scheduled over a small thread pool but aggregated in trial order, and
// timing columns can be pinned to zero to keep reruns byte identical.

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mfphase/core.hpp"
#include "mfphase/cpqr.hpp"
#include "mfphase/eigensolve.hpp"
#include "mfphase/gpm.hpp"
#include "mfphase/instance_io.hpp"
#include "mfphase/metrics.hpp"
#include "mfphase/model.hpp"
#include "mfphase/rng.hpp"
#include "mfphase/spectral.hpp"

namespace mfphase {

enum class Method { MfCpqr, CpqrSf, MfGpm, GpmSf };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> v{Method::MfCpqr, Method::CpqrSf, Method::MfGpm,
                                     Method::GpmSf};
  return v;
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::MfCpqr: return "MF-CPQR";
    case Method::CpqrSf: return "CPQR-SF";
    case Method::MfGpm: return "MF-GPM";
    case Method::GpmSf: return "GPM-SF";
  }
  throw std::invalid_argument("method_name: unknown method");
}

inline Method method_from_name(const std::string& name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected MF-CPQR, CPQR-SF, MF-GPM, or GPM-SF)");
}

// File-name slug: lower case, '-' to '_'.
inline std::string method_slug(Method m) {
  std::string s = method_name(m);
  for (char& c : s) c = c == '-' ? '_' : static_cast<char>(std::tolower(c));
  return s;
}

inline bool uses_single_frequency(Method m) {
  return m == Method::CpqrSf || m == Method::GpmSf;
}

inline bool uses_gpm(Method m) { return m == Method::MfGpm || m == Method::GpmSf; }

struct MethodConfig {
  int gpm_iterations = 50;
  bool gpm_early_stop = true;
  int zero_pad_factor = 16;
  bool exclude_zero_freq = false;  // ablation: drop k = 0 from MF selections
  EigOptions eig;
};

struct MethodRun {
  Estimate estimate;
  std::vector<int> pivots;  // spectral-stage CPQR pivot columns
  std::vector<GpmIterRecord> gpm_trace;
  int gpm_iterations = 0;
  bool gpm_fixed_point = false;
};

// Full pipeline for one named method on a prebuilt frequency stack. The
// iterative methods warm start from the spectral output restricted to the
// same frequency selection they iterate with.
inline MethodRun run_method(Method method, const FrequencyStack& stack, int m,
                            const MethodConfig& cfg = {}) {
  const std::vector<int> freqs = frequency_selection(
      stack.k_max, uses_single_frequency(method), cfg.exclude_zero_freq);
  const EigBasis basis = top_m_eigvecs(stack, m, cfg.eig, freqs);
  SpectralOptions sopt;
  sopt.freqs = freqs;
  sopt.zero_pad_factor = cfg.zero_pad_factor;
  const SpectralResult spectral = recover_spectral(basis, stack.mode, sopt);

  MethodRun out;
  out.pivots = spectral.factorization.pivots;
  if (!uses_gpm(method)) {
    out.estimate = spectral.estimate;
    return out;
  }
  GpmOptions gopt;
  gopt.freqs = freqs;
  gopt.iterations = cfg.gpm_iterations;
  gopt.early_stop = cfg.gpm_early_stop;
  gopt.zero_pad_factor = cfg.zero_pad_factor;
  GpmRun run = run_gpm(stack, m, init_from_spectral(spectral), gopt);
  out.estimate = std::move(run.estimate);
  out.gpm_trace = std::move(run.trace);
  out.gpm_iterations = run.iterations;
  out.gpm_fixed_point = run.reached_fixed_point;
  return out;
}

// Phase-diagram grid over edge densities p = alpha log(n)/n, q = beta log(n)/n.
struct ExperimentGrid {
  int n = 300;
  int m = 2;
  int k_max = 8;
  AngleMode mode = AngleMode::Discrete;
  double alpha_min = 2.0;
  double alpha_max = 20.0;
  int alpha_count = 6;
  double beta_min = 0.0;
  double beta_max = 10.0;
  int beta_count = 6;
  int trials = 20;
  std::vector<Method> methods = all_methods();
  int gpm_iterations = 50;
  bool gpm_early_stop = true;
  int zero_pad_factor = 16;
  bool exclude_zero_freq = false;
  std::uint64_t base_seed = 1;
  int threads = 1;
  bool record_timing = true;   // false pins every time_ms to exactly 0
  bool eps_matrix_max = false; // matrix files report per-cell max instead of mean

  double density_scale() const { return std::log(static_cast<double>(n)) / n; }

  double alpha_at(int a) const {
    require(a >= 0 && a < alpha_count, "alpha index out of range");
    if (alpha_count == 1) return alpha_min;
    return alpha_min + (alpha_max - alpha_min) * a / static_cast<double>(alpha_count - 1);
  }
  double beta_at(int b) const {
    require(b >= 0 && b < beta_count, "beta index out of range");
    if (beta_count == 1) return beta_min;
    return beta_min + (beta_max - beta_min) * b / static_cast<double>(beta_count - 1);
  }
  double p_at(int a) const { return alpha_at(a) * density_scale(); }
  double q_at(int b) const { return beta_at(b) * density_scale(); }

  void validate() const {
    require(alpha_count >= 1 && beta_count >= 1, "grid: cell counts must be >= 1");
    require(alpha_min <= alpha_max && beta_min <= beta_max, "grid: min must not exceed max");
    require(trials >= 1, "grid: trials must be >= 1");
    require(threads >= 1, "grid: threads must be >= 1");
    require(gpm_iterations >= 0, "grid: gpm_iterations must be >= 0");
    require(!methods.empty(), "grid: at least one method");
    // Probabilities are monotone along the grid, so the corners settle it.
    ModelParams probe;
    probe.n = n;
    probe.m = m;
    probe.k_max = k_max;
    probe.mode = mode;
    probe.p = p_at(alpha_count - 1);
    probe.q = q_at(beta_count - 1);
    probe.validate();
    require(p_at(0) >= 0.0 && q_at(0) >= 0.0, "grid: negative edge probability");
  }
};

struct MethodCell {
  int trials = 0;
  int exact = 0;
  double srer = 0.0;
  double eps_mean = 0.0;
  double eps_max = 0.0;
  double time_ms = 0.0;  // mean per-trial wall time; exactly 0 when timing is off
};

struct CellResult {
  int alpha_index = 0;
  int beta_index = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::vector<MethodCell> per_method;  // parallel to config.methods
};

struct GridResult {
  ExperimentGrid config;
  std::vector<CellResult> cells;  // alpha-major: index a * beta_count + b
};

namespace detail {

// Runs fn(0..count-1) on a pool; rethrows the first task exception after join.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= count) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int width = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(width));
  for (int w = 0; w < width; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// Seed for one trial: cell index and trial index folded into the base seed,
// so every method inside a trial sees the same instance and cells/trials are
// independent of scheduling.
inline std::uint64_t trial_seed(const ExperimentGrid& grid, int cell, int trial) {
  return mix_seed(mix_seed(grid.base_seed, static_cast<std::uint64_t>(cell)),
                  static_cast<std::uint64_t>(trial));
}

inline GridResult run_grid(const ExperimentGrid& grid) {
  grid.validate();
  const int cell_count = grid.alpha_count * grid.beta_count;
  const int task_count = cell_count * grid.trials;
  const int method_count = static_cast<int>(grid.methods.size());

  std::vector<std::vector<TrialOutcome>> slots(
      static_cast<std::size_t>(task_count),
      std::vector<TrialOutcome>(static_cast<std::size_t>(method_count)));

  MethodConfig mcfg;
  mcfg.gpm_iterations = grid.gpm_iterations;
  mcfg.gpm_early_stop = grid.gpm_early_stop;
  mcfg.zero_pad_factor = grid.zero_pad_factor;
  mcfg.exclude_zero_freq = grid.exclude_zero_freq;

  detail::parallel_for(task_count, grid.threads, [&](int task) {
    const int cell = task / grid.trials;
    const int trial = task % grid.trials;
    const int a = cell / grid.beta_count;
    const int b = cell % grid.beta_count;

    ModelParams params;
    params.n = grid.n;
    params.m = grid.m;
    params.k_max = grid.k_max;
    params.mode = grid.mode;
    params.p = grid.p_at(a);
    params.q = grid.q_at(b);
    params.seed = trial_seed(grid, cell, trial);

    const auto [truth, obs] = generate(params);
    const FrequencyStack stack = frequency_stack(obs, grid.k_max);

    for (int mi = 0; mi < method_count; ++mi) {
      const auto t0 = std::chrono::steady_clock::now();
      const MethodRun run = run_method(grid.methods[static_cast<std::size_t>(mi)], stack,
                                       grid.m, mcfg);
      const auto t1 = std::chrono::steady_clock::now();
      TrialOutcome& out =
          slots[static_cast<std::size_t>(task)][static_cast<std::size_t>(mi)];
      out.exact = exact_recovery(run.estimate.assignment, truth.assignment);
      out.eps = eps_error(run.estimate, truth, grid.m);
      out.time_ms = grid.record_timing
                        ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                        : 0.0;
    }
  });

  // Aggregate strictly in (cell, trial) order so results never depend on how
  // tasks were interleaved across threads.
  GridResult result;
  result.config = grid;
  result.cells.resize(static_cast<std::size_t>(cell_count));
  for (int cell = 0; cell < cell_count; ++cell) {
    CellResult& cr = result.cells[static_cast<std::size_t>(cell)];
    cr.alpha_index = cell / grid.beta_count;
    cr.beta_index = cell % grid.beta_count;
    cr.alpha = grid.alpha_at(cr.alpha_index);
    cr.beta = grid.beta_at(cr.beta_index);
    cr.p = grid.p_at(cr.alpha_index);
    cr.q = grid.q_at(cr.beta_index);
    cr.per_method.resize(static_cast<std::size_t>(method_count));
    for (int mi = 0; mi < method_count; ++mi) {
      MethodCell& mc = cr.per_method[static_cast<std::size_t>(mi)];
      mc.trials = grid.trials;
      double eps_sum = 0.0;
      double ms_sum = 0.0;
      for (int trial = 0; trial < grid.trials; ++trial) {
        const TrialOutcome& out = slots[static_cast<std::size_t>(cell * grid.trials + trial)]
                                       [static_cast<std::size_t>(mi)];
        if (out.exact) ++mc.exact;
        eps_sum += out.eps;
        mc.eps_max = std::max(mc.eps_max, out.eps);
        ms_sum += out.time_ms;
      }
      mc.srer = static_cast<double>(mc.exact) / grid.trials;
      mc.eps_mean = eps_sum / grid.trials;
      mc.time_ms = ms_sum / grid.trials;
    }
  }
  return result;
}

// --- emitted tables -------------------------------------------------------

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string exact17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

struct ResultRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::string method;
  double srer = 0.0;
  double eps_mean = 0.0;
  double eps_max = 0.0;
  double time_ms = 0.0;
  int trials = 0;
};

// Long-format table: one row per (alpha, beta, method), alpha outermost,
// method innermost, all rates and angles at six decimals.
inline void write_results_csv(std::ostream& out, const GridResult& result) {
  out << "alpha,beta,method,srer,eps_mean,eps_max,time_ms,trials\n";
  const auto& grid = result.config;
  for (const CellResult& cr : result.cells) {
    for (std::size_t mi = 0; mi < grid.methods.size(); ++mi) {
      const MethodCell& mc = cr.per_method[mi];
      out << detail::fixed6(cr.alpha) << ',' << detail::fixed6(cr.beta) << ','
          << method_name(grid.methods[mi]) << ',' << detail::fixed6(mc.srer) << ','
          << detail::fixed6(mc.eps_mean) << ',' << detail::fixed6(mc.eps_max) << ','
          << detail::fixed6(mc.time_ms) << ',' << mc.trials << "\n";
    }
  }
  if (!out) throw io_error("results table: write failed");
}

inline std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "alpha,beta,method,srer,eps_mean,eps_max,time_ms,trials")
    throw io_error("results table: bad header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ResultRow row;
    auto next = [&](const char* what) {
      if (!std::getline(ss, field, ',')) throw io_error(std::string("results table: missing ") + what);
      return field;
    };
    row.alpha = std::stod(next("alpha"));
    row.beta = std::stod(next("beta"));
    row.method = next("method");
    row.srer = std::stod(next("srer"));
    row.eps_mean = std::stod(next("eps_mean"));
    row.eps_max = std::stod(next("eps_max"));
    row.time_ms = std::stod(next("time_ms"));
    row.trials = std::stoi(next("trials"));
    rows.push_back(row);
  }
  return rows;
}

// Per-method matrix view: one row per beta (ascending), one column per alpha
// (ascending), space separated, six decimals.
inline void write_matrix(std::ostream& out, const GridResult& result, Method method,
                         bool eps_matrix) {
  const auto& grid = result.config;
  std::size_t mi = 0;
  for (; mi < grid.methods.size(); ++mi)
    if (grid.methods[mi] == method) break;
  require(mi < grid.methods.size(), "write_matrix: method not in result");
  for (int b = 0; b < grid.beta_count; ++b) {
    for (int a = 0; a < grid.alpha_count; ++a) {
      const CellResult& cr = result.cells[static_cast<std::size_t>(a * grid.beta_count + b)];
      const MethodCell& mc = cr.per_method[mi];
      double v;
      if (eps_matrix)
        v = grid.eps_matrix_max ? mc.eps_max : mc.eps_mean;
      else
        v = mc.srer;
      if (a > 0) out << ' ';
      out << detail::fixed6(v);
    }
    out << "\n";
  }
  if (!out) throw io_error("matrix table: write failed");
}

// --- manifest (key=value, reloadable as a config) --------------------------

inline void write_manifest(std::ostream& out, const ExperimentGrid& grid) {
  out << "format=mfphase-manifest-1\n";
  out << "version=" << kVersion << "\n";
  out << "rng=splitmix64\n";
  out << "n=" << grid.n << "\n";
  out << "m=" << grid.m << "\n";
  out << "k_max=" << grid.k_max << "\n";
  out << "mode=" << to_string(grid.mode) << "\n";
  out << "alpha_min=" << detail::exact17(grid.alpha_min) << "\n";
  out << "alpha_max=" << detail::exact17(grid.alpha_max) << "\n";
  out << "alpha_count=" << grid.alpha_count << "\n";
  out << "beta_min=" << detail::exact17(grid.beta_min) << "\n";
  out << "beta_max=" << detail::exact17(grid.beta_max) << "\n";
  out << "beta_count=" << grid.beta_count << "\n";
  out << "trials=" << grid.trials << "\n";
  out << "methods=";
  for (std::size_t mi = 0; mi < grid.methods.size(); ++mi) {
    if (mi > 0) out << ',';
    out << method_name(grid.methods[mi]);
  }
  out << "\n";
  out << "gpm_iterations=" << grid.gpm_iterations << "\n";
  out << "gpm_early_stop=" << (grid.gpm_early_stop ? 1 : 0) << "\n";
  out << "zero_pad_factor=" << grid.zero_pad_factor << "\n";
  out << "exclude_zero_freq=" << (grid.exclude_zero_freq ? 1 : 0) << "\n";
  out << "base_seed=" << grid.base_seed << "\n";
  out << "threads=" << grid.threads << "\n";
  out << "record_timing=" << (grid.record_timing ? 1 : 0) << "\n";
  if (!out) throw io_error("manifest: write failed");
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("config key '" + key + "': expected boolean, got '" + v + "'");
}

}  // namespace detail

// Applies one key=value entry. Shared by manifest reloading and CLI config
// files, so a manifest written by one run configures the next verbatim.
inline void apply_config_entry(ExperimentGrid& grid, const std::string& key,
                               const std::string& value) {
  try {
    if (key == "format") {
      if (value != "mfphase-manifest-1")
        throw std::invalid_argument("unsupported manifest format '" + value + "'");
    } else if (key == "version") {
      // informational only
    } else if (key == "rng") {
      if (value != "splitmix64")
        throw std::invalid_argument("unsupported rng '" + value + "'");
    } else if (key == "n") {
      grid.n = std::stoi(value);
    } else if (key == "m") {
      grid.m = std::stoi(value);
    } else if (key == "k_max") {
      grid.k_max = std::stoi(value);
    } else if (key == "mode") {
      if (value == "discrete")
        grid.mode = AngleMode::Discrete;
      else if (value == "continuous")
        grid.mode = AngleMode::Continuous;
      else
        throw std::invalid_argument("unknown mode '" + value + "'");
    } else if (key == "alpha_min") {
      grid.alpha_min = std::stod(value);
    } else if (key == "alpha_max") {
      grid.alpha_max = std::stod(value);
    } else if (key == "alpha_count") {
      grid.alpha_count = std::stoi(value);
    } else if (key == "beta_min") {
      grid.beta_min = std::stod(value);
    } else if (key == "beta_max") {
      grid.beta_max = std::stod(value);
    } else if (key == "beta_count") {
      grid.beta_count = std::stoi(value);
    } else if (key == "trials") {
      grid.trials = std::stoi(value);
    } else if (key == "methods") {
      std::vector<Method> methods;
      std::stringstream ss(value);
      std::string name;
      while (std::getline(ss, name, ',')) methods.push_back(method_from_name(name));
      if (methods.empty()) throw std::invalid_argument("empty method list");
      grid.methods = methods;
    } else if (key == "gpm_iterations") {
      grid.gpm_iterations = std::stoi(value);
    } else if (key == "gpm_early_stop") {
      grid.gpm_early_stop = detail::parse_bool(value, key);
    } else if (key == "zero_pad_factor") {
      grid.zero_pad_factor = std::stoi(value);
    } else if (key == "exclude_zero_freq") {
      grid.exclude_zero_freq = detail::parse_bool(value, key);
    } else if (key == "base_seed") {
      grid.base_seed = std::stoull(value);
    } else if (key == "threads") {
      grid.threads = std::stoi(value);
    } else if (key == "record_timing") {
      grid.record_timing = detail::parse_bool(value, key);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("config key '" + key + "': value '" + value + "' out of range");
  }
}

// Reads key=value lines (blank lines and '#' comments skipped) into grid.
inline void apply_config_stream(ExperimentGrid& grid, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    apply_config_entry(grid, line.substr(start, eq - start), line.substr(eq + 1));
  }
}

inline ExperimentGrid load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("manifest: cannot open '" + path + "' for reading");
  ExperimentGrid grid;
  apply_config_stream(grid, in);
  return grid;
}

// Writes results.csv, per-method srer_*/eps_* matrices, and manifest.txt.
inline void emit_results(const std::string& dir, const GridResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir + "': " + ec.message());

  auto open = [&](const std::string& name) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw io_error("cannot open '" + dir + "/" + name + "' for writing");
    return out;
  };

  {
    std::ofstream out = open("results.csv");
    write_results_csv(out, result);
  }
  for (Method m : result.config.methods) {
    {
      std::ofstream out = open("srer_" + method_slug(m) + ".txt");
      write_matrix(out, result, m, /*eps_matrix=*/false);
    }
    {
      std::ofstream out = open("eps_" + method_slug(m) + ".txt");
      write_matrix(out, result, m, /*eps_matrix=*/true);
    }
  }
  {
    std::ofstream out = open("manifest.txt");
    write_manifest(out, result.config);
  }
}

}  // namespace mfphase

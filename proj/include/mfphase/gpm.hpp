#pragma once

// Generalized power method on the frequency stack. Each iteration multiplies
// every A^(k) against the current factored iterate (one nonzero per row, so
// the product is an O(nnz) scatter per frequency), scores each node/cluster
// pair by the grid maximum of its frequency-summed polynomial, rebalances by
// projection, reads off phases for the chosen clusters, and rebuilds the
// iterate from the rounded estimate.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <vector>

#include "mfphase/angle_grid.hpp"
#include "mfphase/assignment.hpp"
#include "mfphase/core.hpp"
#include "mfphase/cpqr.hpp"
#include "mfphase/model.hpp"
#include "mfphase/rng.hpp"
#include "mfphase/spectral.hpp"

namespace mfphase {

struct GpmOptions {
  std::vector<int> freqs;  // empty = all frequencies of the stack
  int iterations = 50;
  bool early_stop = true;  // stop once assignment and phase indices repeat
  int zero_pad_factor = 16;
};

struct GpmIterRecord {
  double objective = 0.0;      // MLE objective of the post-step state
  int assignment_changes = 0;  // nodes whose cluster changed this step
  double wall_ms = 0.0;        // diagnostic only, never drives decisions
};

struct GpmRun {
  Estimate estimate;
  std::vector<GpmIterRecord> trace;
  int iterations = 0;
  bool reached_fixed_point = false;
};

namespace detail {

inline void check_gpm_state(const FrequencyStack& stack, int m, const Estimate& state,
                            const PhaseGrid& grid) {
  const int n = stack.n;
  require(m >= 2, "gpm: m must be >= 2");
  require(n % m == 0, "gpm: n must be divisible by m");
  require(static_cast<int>(state.assignment.size()) == n &&
              static_cast<int>(state.phase_idx.size()) == n,
          "gpm: state size mismatch");
  require(state.grid_size == grid.size(),
          "gpm: state phases live on a different grid than the options imply");
  std::vector<int> count(static_cast<std::size_t>(m), 0);
  for (int a : state.assignment) {
    require(a >= 0 && a < m, "gpm: cluster id out of range");
    ++count[static_cast<std::size_t>(a)];
  }
  for (int c : count) require(c == n / m, "gpm: initialization must be balanced");
}

}  // namespace detail

// MLE objective: sum over ordered same-cluster pairs (i, j) and selected k of
// Re[conj(A^(k)_ij) e^{ik(theta_i - theta_j)}]. Closed Dirichlet forms cover
// the canonical selections; anything else falls back to the direct sum.
inline double gpm_objective(const FrequencyStack& stack, const Estimate& state,
                            std::vector<int> freqs) {
  require(!freqs.empty(), "gpm_objective: empty frequency selection");
  std::sort(freqs.begin(), freqs.end());
  const int n = stack.n;
  require(static_cast<int>(state.assignment.size()) == n, "gpm_objective: size mismatch");

  const int kmin = freqs.front();
  const int kmax = freqs.back();
  const bool full = kmin == -kmax && static_cast<int>(freqs.size()) == 2 * kmax + 1;
  const bool full_no_zero =
      kmin == -kmax && kmax >= 1 && static_cast<int>(freqs.size()) == 2 * kmax;
  const bool single = freqs.size() == 1 && freqs[0] == 1;

  // All selections with some k != 0 need the edge phases, read off A^(1).
  if (kmax == 0) {
    double count = 0.0;
    const SpMat& a = stack(0);
    for (int j = 0; j < a.outerSize(); ++j)
      for (SpMat::InnerIterator it(a, j); it; ++it)
        if (state.assignment[static_cast<std::size_t>(it.row())] ==
            state.assignment[static_cast<std::size_t>(j)])
          count += 1.0;
    return count;
  }

  require(stack.k_max >= 1, "gpm_objective: selection needs k_max >= 1");
  const SpMat& a1 = stack(1);
  double total = 0.0;
  for (int j = 0; j < a1.outerSize(); ++j) {
    const int cj = state.assignment[static_cast<std::size_t>(j)];
    for (SpMat::InnerIterator it(a1, j); it; ++it) {
      if (state.assignment[static_cast<std::size_t>(it.row())] != cj) continue;
      const double delta = state.phase_rad[static_cast<std::size_t>(it.row())] -
                           state.phase_rad[static_cast<std::size_t>(j)] -
                           std::arg(it.value());
      if (single) {
        total += std::cos(delta);
      } else if (full || full_no_zero) {
        const double half = std::sin(0.5 * delta);
        double dirichlet;
        if (std::abs(half) < 1e-9) {
          dirichlet = static_cast<double>(2 * kmax + 1);
        } else {
          dirichlet = std::sin((kmax + 0.5) * delta) / half;
        }
        total += full ? dirichlet : dirichlet - 1.0;
      } else {
        for (int k : freqs) total += std::cos(k * delta);
      }
    }
  }
  return total;
}

// One iteration: multiply, score, rebalance, synchronize, rebuild.
inline Estimate gpm_step(const FrequencyStack& stack, int m, const Estimate& state,
                         const GpmOptions& opts = {}) {
  const std::vector<int> freqs =
      opts.freqs.empty() ? frequency_selection(stack.k_max) : opts.freqs;
  const PhaseGrid grid{stack.mode, stack.k_max, opts.zero_pad_factor};
  detail::check_gpm_state(stack, m, state, grid);
  const int n = stack.n;
  const int s = n / m;
  const int k_max = stack.k_max;
  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(s));

  std::vector<bool> needed(static_cast<std::size_t>(k_max) + 1, false);
  int max_abs = 0;
  for (int k : freqs) {
    require(k >= -k_max && k <= k_max, "gpm: |k| exceeds k_max");
    needed[static_cast<std::size_t>(std::abs(k))] = true;
    max_abs = std::max(max_abs, std::abs(k));
  }

  Eigen::VectorXcd z(n);
  for (int i = 0; i < n; ++i)
    z(i) = std::polar(1.0, state.phase_rad[static_cast<std::size_t>(i)]);

  // W^(k) = A^(k) V^(k); V^(k) has (1/sqrt s) z_j^k in column assignment[j].
  std::vector<Eigen::MatrixXcd> w(static_cast<std::size_t>(k_max) + 1);
  Eigen::VectorXcd zpow = Eigen::VectorXcd::Ones(n);
  for (int k = 0; k <= max_abs; ++k) {
    if (k > 0) zpow = zpow.cwiseProduct(z);
    if (!needed[static_cast<std::size_t>(k)]) continue;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, m);
    const SpMat& a = stack(k);
    for (int j = 0; j < a.outerSize(); ++j) {
      const cd vj = inv_sqrt_s * zpow(j);
      const int cj = state.assignment[static_cast<std::size_t>(j)];
      for (SpMat::InnerIterator it(a, j); it; ++it) acc(it.row(), cj) += it.value() * vj;
    }
    w[static_cast<std::size_t>(k)] = std::move(acc);
  }

  GridEvaluator ev(grid);
  Eigen::VectorXcd coeffs(2 * k_max + 1);
  Eigen::MatrixXd smax(n, m);
  Eigen::MatrixXi thidx(n, m);
  for (int i = 0; i < n; ++i) {
    for (int col = 0; col < m; ++col) {
      coeffs.setZero();
      for (int k : freqs) {
        const cd v = k >= 0 ? w[static_cast<std::size_t>(k)](i, col)
                            : std::conj(w[static_cast<std::size_t>(-k)](i, col));
        coeffs(k + k_max) = v;
      }
      const GridArgmax ga = ev.argmax(coeffs);
      smax(i, col) = ga.score;
      thidx(i, col) = ga.index;
    }
  }

  const ProjectionResult proj = project_onto_H(smax);

  Estimate next;
  next.mode = state.mode;
  next.grid_size = grid.size();
  next.assignment = proj.assignment;
  next.phase_idx.assign(static_cast<std::size_t>(n), 0);
  next.phase_rad.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const int idx = thidx(i, proj.assignment[static_cast<std::size_t>(i)]);
    next.phase_idx[static_cast<std::size_t>(i)] = idx;
    next.phase_rad[static_cast<std::size_t>(i)] = grid.angle(idx);
  }
  return next;
}

inline GpmRun run_gpm(const FrequencyStack& stack, int m, const Estimate& init,
                      const GpmOptions& opts = {}) {
  require(opts.iterations >= 0, "gpm: iterations must be >= 0");
  const std::vector<int> freqs =
      opts.freqs.empty() ? frequency_selection(stack.k_max) : opts.freqs;
  GpmOptions fwd = opts;
  fwd.freqs = freqs;

  GpmRun run;
  run.estimate = init;
  for (int t = 0; t < opts.iterations; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    Estimate next = gpm_step(stack, m, run.estimate, fwd);
    const auto t1 = std::chrono::steady_clock::now();

    GpmIterRecord rec;
    rec.objective = gpm_objective(stack, next, freqs);
    rec.assignment_changes = 0;
    for (std::size_t i = 0; i < next.assignment.size(); ++i)
      if (next.assignment[i] != run.estimate.assignment[i]) ++rec.assignment_changes;
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    const bool fixed = next.assignment == run.estimate.assignment &&
                       next.phase_idx == run.estimate.phase_idx;
    run.estimate = std::move(next);
    run.trace.push_back(rec);
    run.iterations = t + 1;
    if (fixed) {
      run.reached_fixed_point = true;
      if (opts.early_stop) break;
    }
  }
  return run;
}

// Balanced warm start from a spectral run: project the node-by-cluster score
// matrix, then take each node's phase from its assigned row.
inline Estimate init_from_spectral(const SpectralResult& spectral) {
  const int n = static_cast<int>(spectral.scores.rows());
  const ProjectionResult proj = project_onto_H(spectral.scores);
  Estimate init;
  init.mode = spectral.estimate.mode;
  init.grid_size = spectral.estimate.grid_size;
  init.assignment = proj.assignment;
  init.phase_idx.assign(static_cast<std::size_t>(n), 0);
  init.phase_rad.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const int idx = spectral.theta_idx(i, proj.assignment[static_cast<std::size_t>(i)]);
    init.phase_idx[static_cast<std::size_t>(i)] = idx;
    init.phase_rad[static_cast<std::size_t>(i)] =
        kTwoPi * idx / static_cast<double>(init.grid_size);
  }
  return init;
}

// Ablation start: balanced random assignment, uniform random grid phases.
inline Estimate random_init(const FrequencyStack& stack, int m, int zero_pad_factor,
                            std::uint64_t seed) {
  const int n = stack.n;
  require(m >= 1 && n % m == 0, "random_init: n must be divisible by m");
  const PhaseGrid grid{stack.mode, stack.k_max, zero_pad_factor};
  const int l = grid.size();
  SplitMix64 rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);

  Estimate init;
  init.mode = stack.mode;
  init.grid_size = l;
  init.assignment.assign(static_cast<std::size_t>(n), 0);
  init.phase_idx.assign(static_cast<std::size_t>(n), 0);
  init.phase_rad.assign(static_cast<std::size_t>(n), 0.0);
  const int s = n / m;
  for (int pos = 0; pos < n; ++pos)
    init.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = pos / s;
  for (int i = 0; i < n; ++i) {
    const int idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(l)));
    init.phase_idx[static_cast<std::size_t>(i)] = idx;
    init.phase_rad[static_cast<std::size_t>(i)] = grid.angle(idx);
  }
  return init;
}

}  // namespace mfphase

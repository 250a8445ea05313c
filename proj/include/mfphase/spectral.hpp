#pragma once

// Spectral recovery: eigenbasis -> shared-pivot factorization -> per-node
// cluster and phase read-off. For node i and candidate cluster row m, the
// score is the grid maximum of the trigonometric polynomial whose k-th
// coefficient is R^(k)(m, i); the assigned cluster is the row of largest
// score and the phase is that row's maximizing grid angle. Estimates are not
// rebalanced here.

#include <Eigen/Dense>
#include <vector>

#include "mfphase/angle_grid.hpp"
#include "mfphase/core.hpp"
#include "mfphase/cpqr.hpp"
#include "mfphase/eigensolve.hpp"
#include "mfphase/model.hpp"

namespace mfphase {

struct Estimate {
  AngleMode mode = AngleMode::Discrete;
  int grid_size = 0;            // size of the estimation grid the phases live on
  std::vector<int> assignment;  // cluster ids in [0, m)
  std::vector<int> phase_idx;   // indices on the estimation grid
  std::vector<double> phase_rad;
};

struct SpectralOptions {
  std::vector<int> freqs;  // empty = all frequencies of the basis
  int zero_pad_factor = 16;
};

struct SpectralResult {
  Estimate estimate;
  Eigen::MatrixXd scores;      // n x m: per node, per cluster row, max score
  Eigen::MatrixXi theta_idx;   // n x m: grid index attaining each score
  MfCpqrResult factorization;  // carries the shared pivots for tracing
};

inline SpectralResult recover_spectral(const EigBasis& basis, AngleMode mode,
                                       const SpectralOptions& opt = {}) {
  const int m = basis.m;
  require(m >= 2, "recover_spectral: m must be >= 2");
  const int k_max = basis.k_max;
  const std::vector<int> freqs =
      opt.freqs.empty() ? frequency_selection(k_max) : opt.freqs;

  SpectralResult out;
  out.factorization = mf_cpqr(basis, freqs);
  const int n = out.factorization.n;

  const PhaseGrid grid{mode, k_max, opt.zero_pad_factor};
  GridEvaluator ev(grid);
  const int l = grid.size();

  out.scores.resize(n, m);
  out.theta_idx.resize(n, m);
  out.estimate.mode = mode;
  out.estimate.grid_size = l;
  out.estimate.assignment.assign(static_cast<std::size_t>(n), 0);
  out.estimate.phase_idx.assign(static_cast<std::size_t>(n), 0);
  out.estimate.phase_rad.assign(static_cast<std::size_t>(n), 0.0);

  Eigen::VectorXcd coeffs(2 * k_max + 1);
  for (int i = 0; i < n; ++i) {
    for (int row = 0; row < m; ++row) {
      coeffs.setZero();
      for (std::size_t f = 0; f < freqs.size(); ++f) {
        const int k = freqs[f];
        coeffs(k + k_max) = out.factorization.r[f](row, i);
      }
      const GridArgmax ga = ev.argmax(coeffs);
      out.scores(i, row) = ga.score;
      out.theta_idx(i, row) = ga.index;
    }
    int best_row = 0;
    for (int row = 1; row < m; ++row)
      if (out.scores(i, row) > out.scores(i, best_row)) best_row = row;
    out.estimate.assignment[static_cast<std::size_t>(i)] = best_row;
    const int idx = out.theta_idx(i, best_row);
    out.estimate.phase_idx[static_cast<std::size_t>(i)] = idx;
    out.estimate.phase_rad[static_cast<std::size_t>(i)] = grid.angle(idx);
  }
  return out;
}

// Convenience: solve the eigenproblem for exactly the frequencies the
// selection needs, then recover.
inline SpectralResult recover_spectral(const FrequencyStack& stack, int m,
                                       const SpectralOptions& opt = {},
                                       const EigOptions& eig_opt = {}) {
  require(m >= 2, "recover_spectral: m must be >= 2");
  const std::vector<int> freqs =
      opt.freqs.empty() ? frequency_selection(stack.k_max) : opt.freqs;
  const EigBasis basis = top_m_eigvecs(stack, m, eig_opt, freqs);
  SpectralOptions fwd = opt;
  fwd.freqs = freqs;
  return recover_spectral(basis, stack.mode, fwd);
}

}  // namespace mfphase

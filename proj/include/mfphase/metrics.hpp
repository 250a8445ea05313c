#pragma once

// Recovery metrics: exact partition equality, worst-case phase error after
// per-cluster global alignment, and a Wilson interval for success rates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "mfphase/core.hpp"
#include "mfphase/model.hpp"
#include "mfphase/spectral.hpp"

namespace mfphase {

namespace detail {

// Canonical labelling: each node maps to the smallest node index sharing its
// cluster. Two assignments induce the same partition iff the maps coincide.
inline std::vector<int> partition_signature(const std::vector<int>& assignment) {
  int max_id = -1;
  for (int a : assignment) {
    require(a >= 0, "partition: negative cluster id");
    max_id = std::max(max_id, a);
  }
  std::vector<int> first(static_cast<std::size_t>(max_id) + 1, -1);
  const int n = static_cast<int>(assignment.size());
  for (int i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)]);
    if (first[c] < 0) first[c] = i;
  }
  std::vector<int> sig(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    sig[static_cast<std::size_t>(i)] =
        first[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
  return sig;
}

inline double wrap_to_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a > kPi) a -= kTwoPi;
  if (a < -kPi) a += kTwoPi;
  return a;
}

}  // namespace detail

// True iff the two assignments induce identical partitions (labels may differ).
inline bool exact_recovery(const std::vector<int>& estimated, const std::vector<int>& truth) {
  require(estimated.size() == truth.size(), "exact_recovery: size mismatch");
  require(!truth.empty(), "exact_recovery: empty assignment");
  return detail::partition_signature(estimated) == detail::partition_signature(truth);
}

// Worst wrapped angular error over all nodes after one global alignment shift
// per TRUE cluster. The shift maximizes the cluster's aligned resultant
// (discrete: exhaustive over the shared grid in integer index arithmetic, so
// perfect recovery reports exactly zero; continuous: closed form arg of the
// resultant). Estimated assignments play no role: grouping follows the truth.
inline double eps_error(const Estimate& estimate, const GroundTruth& truth, int m) {
  const int n = static_cast<int>(truth.assignment.size());
  require(static_cast<int>(estimate.phase_rad.size()) == n, "eps_error: size mismatch");
  require(m >= 1, "eps_error: m must be >= 1");

  const bool discrete = estimate.mode == AngleMode::Discrete;
  if (discrete) {
    require(!truth.phase_idx.empty(), "eps_error: discrete estimate vs continuous truth");
    require(estimate.grid_size >= 1, "eps_error: missing grid size");
  }

  std::vector<std::vector<int>> members(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    const int c = truth.assignment[static_cast<std::size_t>(i)];
    require(c >= 0 && c < m, "eps_error: truth cluster id out of range");
    members[static_cast<std::size_t>(c)].push_back(i);
  }

  double worst = 0.0;
  for (int c = 0; c < m; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;

    if (discrete) {
      // All phases live on the same grid, so the alignment shift can be
      // searched exhaustively in integer arithmetic: gamma in {0..K-1},
      // residual index (est + gamma - true) mod K.
      const int k = estimate.grid_size;
      const double step = kTwoPi / static_cast<double>(k);
      std::vector<int> hist(static_cast<std::size_t>(k), 0);
      for (int i : idx) {
        const int d = truth.phase_idx[static_cast<std::size_t>(i)] -
                      estimate.phase_idx[static_cast<std::size_t>(i)];
        ++hist[static_cast<std::size_t>(((d % k) + k) % k)];
      }
      int best_gamma = 0;
      double best_score = -1e300;
      for (int g = 0; g < k; ++g) {
        double score = 0.0;
        for (int d = 0; d < k; ++d) {
          if (hist[static_cast<std::size_t>(d)] == 0) continue;
          score += hist[static_cast<std::size_t>(d)] * std::cos(step * (g - d));
        }
        if (score > best_score) {
          best_score = score;
          best_gamma = g;
        }
      }
      int worst_steps = 0;
      for (int d = 0; d < k; ++d) {
        if (hist[static_cast<std::size_t>(d)] == 0) continue;
        const int r = ((best_gamma - d) % k + k) % k;
        worst_steps = std::max(worst_steps, std::min(r, k - r));
      }
      worst = std::max(worst, step * worst_steps);
    } else {
      cd resultant{0.0, 0.0};
      for (int i : idx)
        resultant += std::polar(1.0, truth.phase_rad[static_cast<std::size_t>(i)] -
                                         estimate.phase_rad[static_cast<std::size_t>(i)]);
      const double gamma = std::abs(resultant) > 0.0 ? std::arg(resultant) : 0.0;
      for (int i : idx) {
        const double err =
            std::abs(detail::wrap_to_pi(estimate.phase_rad[static_cast<std::size_t>(i)] +
                                        gamma - truth.phase_rad[static_cast<std::size_t>(i)]));
        worst = std::max(worst, err);
      }
    }
  }
  return worst;
}

// Wilson score interval for a binomial proportion, default 95% coverage.
inline std::pair<double, double> wilson_interval(int successes, int trials,
                                                 double z = 1.959963984540054) {
  require(trials >= 1, "wilson_interval: trials must be >= 1");
  require(successes >= 0 && successes <= trials, "wilson_interval: successes out of range");
  const double nd = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (phat + z2 / (2.0 * nd)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nd + z2 / (4.0 * nd * nd)) / denom;
  // At the boundaries the square root collapses to z^2/2n and the endpoint
  // is exactly 0 resp. 1; spare it the floating-point detour.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct TrialOutcome {
  bool exact = false;
  double eps = 0.0;
  double time_ms = 0.0;
};

}  // namespace mfphase

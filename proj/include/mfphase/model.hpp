#pragma once

// Block model with relative phase observations. A graph on n nodes with m
// equal-size planted clusters; each within-cluster edge (present w.p. p)
// carries the exact phase difference of its endpoints, each cross-cluster
// edge (present w.p. q) carries a uniform noise phase. The frequency stack
// holds the entry-wise powers A^(k) used by every solver.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mfphase/core.hpp"
#include "mfphase/rng.hpp"

namespace mfphase {

using SpMat = Eigen::SparseMatrix<cd>;

struct ModelParams {
  int n = 0;
  int m = 1;
  int k_max = 0;
  AngleMode mode = AngleMode::Discrete;
  double p = 1.0;
  double q = 0.0;
  std::uint64_t seed = 0;

  int cluster_size() const { return m > 0 ? n / m : 0; }

  void validate() const {
    require(n >= 1, "model: n must be >= 1");
    require(m >= 1, "model: m must be >= 1");
    require(n % m == 0, "model: n must be divisible by m (balanced clusters)");
    require(k_max >= 0, "model: k_max must be >= 0");
    require(p >= 0.0 && p <= 1.0, "model: p must lie in [0, 1]");
    require(q >= 0.0 && q <= 1.0, "model: q must lie in [0, 1]");
  }
};

struct GroundTruth {
  // assignment[i] in [0, m); clusters are balanced by construction.
  std::vector<int> assignment;
  // Discrete mode: phase_idx[i] in [0, 2*k_max+1), angle = idx * 2pi/K.
  // Continuous mode: phase_idx is empty.
  std::vector<int> phase_idx;
  // Radians in [0, 2pi), valid in both modes.
  std::vector<double> phase_rad;
};

// Undirected edge list with i < j; the Hermitian completion A_ji = conj(A_ij)
// is implied. grid holds phase indices in Discrete mode and is empty in
// Continuous mode; angle is always populated.
struct ObservationMatrix {
  int n = 0;
  AngleMode mode = AngleMode::Discrete;
  int grid_size = 0;  // K = 2*k_max+1 in Discrete mode, 0 in Continuous
  std::vector<std::int32_t> rows;
  std::vector<std::int32_t> cols;
  std::vector<std::int32_t> grid;
  std::vector<double> angle;

  std::size_t edge_count() const { return rows.size(); }
};

namespace detail {

// K-th roots of unity; entry g is e^{i * 2pi * g / K}. Discrete-mode entries
// of every A^(k) are drawn from this table so grid closure is exact.
inline std::vector<cd> unit_roots(int k) {
  std::vector<cd> w(static_cast<std::size_t>(k));
  for (int g = 0; g < k; ++g) {
    const double a = kTwoPi * static_cast<double>(g) / static_cast<double>(k);
    w[static_cast<std::size_t>(g)] = cd(std::cos(a), std::sin(a));
  }
  return w;
}

}  // namespace detail

// Draws one instance. RNG order is pinned: the node shuffle, then n phase
// draws, then one presence draw per ordered pair i < j (plus one extra draw
// per realized cross-cluster edge for its noise phase).
inline std::pair<GroundTruth, ObservationMatrix> generate(const ModelParams& params) {
  params.validate();
  const int n = params.n;
  const int s = params.cluster_size();
  const int k = grid_points(params.k_max);
  SplitMix64 rng(params.seed);

  GroundTruth truth;
  truth.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng.shuffle(perm);
  for (int pos = 0; pos < n; ++pos)
    truth.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = pos / s;

  truth.phase_rad.assign(static_cast<std::size_t>(n), 0.0);
  if (params.mode == AngleMode::Discrete) {
    truth.phase_idx.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const int g = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      truth.phase_idx[static_cast<std::size_t>(i)] = g;
      truth.phase_rad[static_cast<std::size_t>(i)] = kTwoPi * g / k;
    }
  } else {
    for (int i = 0; i < n; ++i) truth.phase_rad[static_cast<std::size_t>(i)] = kTwoPi * rng.uniform();
  }

  ObservationMatrix obs;
  obs.n = n;
  obs.mode = params.mode;
  obs.grid_size = params.mode == AngleMode::Discrete ? k : 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = truth.assignment[static_cast<std::size_t>(i)] ==
                        truth.assignment[static_cast<std::size_t>(j)];
      const double u = rng.uniform();
      if (same) {
        if (u >= params.p) continue;
        obs.rows.push_back(i);
        obs.cols.push_back(j);
        if (params.mode == AngleMode::Discrete) {
          const int g = ((truth.phase_idx[static_cast<std::size_t>(i)] -
                          truth.phase_idx[static_cast<std::size_t>(j)]) %
                             k +
                         k) %
                        k;
          obs.grid.push_back(g);
          obs.angle.push_back(kTwoPi * g / k);
        } else {
          double a = truth.phase_rad[static_cast<std::size_t>(i)] -
                     truth.phase_rad[static_cast<std::size_t>(j)];
          a = std::fmod(a, kTwoPi);
          if (a < 0.0) a += kTwoPi;
          obs.angle.push_back(a);
        }
      } else {
        if (u >= params.q) continue;
        obs.rows.push_back(i);
        obs.cols.push_back(j);
        if (params.mode == AngleMode::Discrete) {
          const int g = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
          obs.grid.push_back(g);
          obs.angle.push_back(kTwoPi * g / k);
        } else {
          obs.angle.push_back(kTwoPi * rng.uniform());
        }
      }
    }
  }
  return {std::move(truth), std::move(obs)};
}

// The p = 1, q = 0 observation: every within-cluster pair present with the
// exact relative phase, no cross-cluster edges, zero diagonal.
inline ObservationMatrix clean_matrix(const GroundTruth& truth, AngleMode mode, int k_max) {
  const int n = static_cast<int>(truth.assignment.size());
  require(n >= 1, "clean_matrix: empty ground truth");
  const int k = grid_points(k_max);
  ObservationMatrix obs;
  obs.n = n;
  obs.mode = mode;
  obs.grid_size = mode == AngleMode::Discrete ? k : 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (truth.assignment[static_cast<std::size_t>(i)] !=
          truth.assignment[static_cast<std::size_t>(j)])
        continue;
      obs.rows.push_back(i);
      obs.cols.push_back(j);
      if (mode == AngleMode::Discrete) {
        require(truth.phase_idx.size() == static_cast<std::size_t>(n),
                "clean_matrix: discrete truth must carry grid indices");
        const int g = ((truth.phase_idx[static_cast<std::size_t>(i)] -
                        truth.phase_idx[static_cast<std::size_t>(j)]) %
                           k +
                       k) %
                      k;
        obs.grid.push_back(g);
        obs.angle.push_back(kTwoPi * g / k);
      } else {
        double a = truth.phase_rad[static_cast<std::size_t>(i)] -
                   truth.phase_rad[static_cast<std::size_t>(j)];
        a = std::fmod(a, kTwoPi);
        if (a < 0.0) a += kTwoPi;
        obs.angle.push_back(a);
      }
    }
  }
  return obs;
}

// Entry-wise powers A^(k) for k = 0..k_max, stored sparse with both triangles.
// Negative frequencies are not stored: A^(-k) = conj(A^(k)) exactly.
struct FrequencyStack {
  int n = 0;
  int k_max = 0;
  AngleMode mode = AngleMode::Discrete;
  std::vector<SpMat> freq;  // freq[k], k = 0..k_max

  const SpMat& operator()(int k) const { return freq.at(static_cast<std::size_t>(k)); }

  // Dense view of A^(k) for any k in [-k_max, k_max]; test/diagnostic path.
  Eigen::MatrixXcd dense(int k) const {
    require(k >= -k_max && k <= k_max, "frequency stack: |k| exceeds k_max");
    Eigen::MatrixXcd d = freq.at(static_cast<std::size_t>(std::abs(k)));
    return k < 0 ? d.conjugate() : d;
  }
};

inline FrequencyStack frequency_stack(const ObservationMatrix& obs, int k_max) {
  require(k_max >= 0, "frequency_stack: k_max must be >= 0");
  if (obs.mode == AngleMode::Discrete) {
    require(obs.grid_size == grid_points(k_max),
            "frequency_stack: k_max must match the discrete grid of the observation");
  }
  FrequencyStack stack;
  stack.n = obs.n;
  stack.k_max = k_max;
  stack.mode = obs.mode;
  stack.freq.reserve(static_cast<std::size_t>(k_max) + 1);

  const std::size_t e = obs.edge_count();
  std::vector<cd> roots;
  if (obs.mode == AngleMode::Discrete) roots = detail::unit_roots(obs.grid_size);

  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(2 * e);
  for (int k = 0; k <= k_max; ++k) {
    trips.clear();
    for (std::size_t t = 0; t < e; ++t) {
      cd v;
      if (obs.mode == AngleMode::Discrete) {
        const long long g =
            (static_cast<long long>(k) * obs.grid[t]) % obs.grid_size;
        v = roots[static_cast<std::size_t>(g)];
      } else {
        v = std::polar(1.0, static_cast<double>(k) * obs.angle[t]);
      }
      trips.emplace_back(obs.rows[t], obs.cols[t], v);
      trips.emplace_back(obs.cols[t], obs.rows[t], std::conj(v));
    }
    SpMat a(obs.n, obs.n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    stack.freq.push_back(std::move(a));
  }
  return stack;
}

// Diagnostic split A^(k) = p * A_clean^(k) + noise: returns the Frobenius
// norm of the residual. Not used by any solver.
inline double expectation_residual_fro(const ObservationMatrix& obs, const GroundTruth& truth,
                                       double p, int k, int k_max) {
  const FrequencyStack sa = frequency_stack(obs, k_max);
  const FrequencyStack sc = frequency_stack(
      clean_matrix(truth, obs.mode, k_max), k_max);
  const Eigen::MatrixXcd r = sa.dense(k) - p * sc.dense(k);
  return r.norm();
}

}  // namespace mfphase

#pragma once

// Projection onto the set of balanced assignments: maximize sum_i X(i, a(i))
// subject to every cluster receiving exactly s = n/m nodes. Solved as a
// minimum-cost transportation problem by successive shortest paths. Nodes are
// inserted one at a time; each insertion runs a Dijkstra over the m cluster
// vertices, where the arc u -> v is realized by the cheapest currently
// assigned node moving from u to v. Cluster potentials keep reduced move
// costs nonnegative; a defensive 1e-12 epsilon guards comparisons against
// floating-point cycling. Ties (targets, movers) resolve lexicographically.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mfphase/core.hpp"

namespace mfphase {

struct ProjectionResult {
  std::vector<int> assignment;  // n entries in [0, m)
  // Heuristic signal: an equal-cost alternative was seen during target or
  // mover selection. Absence of a tie is not certified.
  bool tie_detected = false;
};

inline ProjectionResult project_onto_H(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  require(n >= 1 && m >= 1, "project_onto_H: empty score matrix");
  require(n % m == 0, "project_onto_H: n must be divisible by m");
  const int s = n / m;
  constexpr double kEps = 1e-12;
  const double inf = std::numeric_limits<double>::infinity();

  ProjectionResult out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(m));
  std::vector<int> count(static_cast<std::size_t>(m), 0);
  std::vector<double> y(static_cast<std::size_t>(m), 0.0);  // cluster potentials

  const auto cost = [&](int i, int c) { return -x(i, c); };

  std::vector<double> dist(static_cast<std::size_t>(m));
  std::vector<int> parent(static_cast<std::size_t>(m));  // -1 = direct arc
  std::vector<int> mover(static_cast<std::size_t>(m));
  std::vector<bool> settled(static_cast<std::size_t>(m));

  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < m; ++v) {
      dist[static_cast<std::size_t>(v)] = cost(i, v) - y[static_cast<std::size_t>(v)];
      parent[static_cast<std::size_t>(v)] = -1;
      mover[static_cast<std::size_t>(v)] = i;
      settled[static_cast<std::size_t>(v)] = false;
    }
    // Settle every cluster so the potential update below sees true distances.
    for (int round = 0; round < m; ++round) {
      int u = -1;
      for (int v = 0; v < m; ++v) {
        if (settled[static_cast<std::size_t>(v)]) continue;
        if (u == -1 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(u)])
          u = v;
      }
      settled[static_cast<std::size_t>(u)] = true;
      // Relax u -> v through the cheapest assigned node of u.
      for (int v = 0; v < m; ++v) {
        if (v == u || settled[static_cast<std::size_t>(v)]) continue;
        double best_delta = inf;
        int best_j = -1;
        for (int j : members[static_cast<std::size_t>(u)]) {
          const double delta = (cost(j, v) - y[static_cast<std::size_t>(v)]) -
                               (cost(j, u) - y[static_cast<std::size_t>(u)]);
          if (delta < best_delta || (delta == best_delta && j < best_j)) {
            best_delta = delta;
            best_j = j;
          }
        }
        if (best_j < 0) continue;
        const double rc = std::max(best_delta, 0.0);  // invariant holds up to fp noise
        const double cand = dist[static_cast<std::size_t>(u)] + rc;
        if (cand < dist[static_cast<std::size_t>(v)] - kEps) {
          dist[static_cast<std::size_t>(v)] = cand;
          parent[static_cast<std::size_t>(v)] = u;
          mover[static_cast<std::size_t>(v)] = best_j;
        }
      }
    }
    // Target: free cluster of minimum true cost (reduced dist + potential).
    int target = -1;
    double target_cost = inf;
    for (int v = 0; v < m; ++v) {
      if (count[static_cast<std::size_t>(v)] >= s) continue;
      const double c = dist[static_cast<std::size_t>(v)] + y[static_cast<std::size_t>(v)];
      if (target == -1 || c < target_cost) {
        target = v;
        target_cost = c;
      }
    }
    for (int v = 0; v < m; ++v) {
      if (v == target || count[static_cast<std::size_t>(v)] >= s) continue;
      const double c = dist[static_cast<std::size_t>(v)] + y[static_cast<std::size_t>(v)];
      if (std::abs(c - target_cost) <= kEps) out.tie_detected = true;
    }
    // Augment: walk parents back to the direct arc, shifting movers forward.
    {
      int v = target;
      while (parent[static_cast<std::size_t>(v)] != -1) {
        const int u = parent[static_cast<std::size_t>(v)];
        const int j = mover[static_cast<std::size_t>(v)];
        auto& mu = members[static_cast<std::size_t>(u)];
        mu.erase(std::find(mu.begin(), mu.end(), j));
        members[static_cast<std::size_t>(v)].push_back(j);
        out.assignment[static_cast<std::size_t>(j)] = v;
        --count[static_cast<std::size_t>(u)];
        ++count[static_cast<std::size_t>(v)];
        v = u;
      }
      out.assignment[static_cast<std::size_t>(i)] = v;
      members[static_cast<std::size_t>(v)].push_back(i);
      ++count[static_cast<std::size_t>(v)];
    }
    // Potential update: tight arcs on shortest paths become zero reduced cost.
    const double d_target = dist[static_cast<std::size_t>(target)];
    for (int v = 0; v < m; ++v)
      y[static_cast<std::size_t>(v)] += dist[static_cast<std::size_t>(v)] - d_target;
  }
  return out;
}

// Exhaustive reference. Enumerates every balanced assignment (guarded to at
// most 10^6 of them), returning the optimum value and all maximizers whose
// value is within value_tol of it, in lexicographic order.
struct BruteForceProjection {
  double value = 0.0;
  std::vector<std::vector<int>> maximizers;
};

inline BruteForceProjection brute_force_project(const Eigen::MatrixXd& x,
                                                double value_tol = 0.0) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  require(n >= 1 && m >= 1, "brute_force_project: empty score matrix");
  require(n % m == 0, "brute_force_project: n must be divisible by m");
  const int s = n / m;

  // Multinomial count n! / (s!)^m, refused above 10^6.
  double total = 1.0;
  {
    int remaining = n;
    for (int c = 0; c < m; ++c) {
      for (int t = 0; t < s; ++t) {
        total = total * static_cast<double>(remaining - t) / static_cast<double>(s - t);
      }
      remaining -= s;
      require(total <= 1e6, "brute_force_project: more than 10^6 balanced assignments");
    }
  }

  BruteForceProjection out;
  out.value = -std::numeric_limits<double>::infinity();
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> count(static_cast<std::size_t>(m), 0);

  // Two passes: find the optimum, then collect everything within tolerance.
  bool collecting = false;
  const auto recurse = [&](auto&& self, int i, double acc) -> void {
    if (i == n) {
      if (!collecting) {
        if (acc > out.value) out.value = acc;
      } else if (acc >= out.value - value_tol) {
        out.maximizers.push_back(assign);
      }
      return;
    }
    for (int c = 0; c < m; ++c) {
      if (count[static_cast<std::size_t>(c)] == s) continue;
      assign[static_cast<std::size_t>(i)] = c;
      ++count[static_cast<std::size_t>(c)];
      self(self, i + 1, acc + x(i, c));
      --count[static_cast<std::size_t>(c)];
      assign[static_cast<std::size_t>(i)] = -1;
    }
  };
  recurse(recurse, 0, 0.0);
  collecting = true;
  recurse(recurse, 0, 0.0);
  return out;
}

}  // namespace mfphase

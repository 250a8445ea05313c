#pragma once

// Top-M eigenpairs (largest algebraic) of each Hermitian frequency matrix.
// Sparse path: Lanczos with full reorthogonalization, deflation locking and
// restarts. Dense path (Eigen SelfAdjointEigenSolver): small matrices and
// the fallback when the iteration stalls, allowed up to n <= 2000.
// Negative frequencies reuse the k >= 0 solves: Phi^(-k) = conj(Phi^(k)) is a
// top-M eigenbasis of A^(-k) = conj(A^(k)).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mfphase/core.hpp"
#include "mfphase/model.hpp"
#include "mfphase/rng.hpp"

namespace mfphase {

struct EigOptions {
  double tol = 1e-10;        // residual tolerance, scaled by max(1, |lambda_1|)
  int dense_threshold = 128; // direct dense solve at or below this dimension
  int dense_fallback_limit = 2000;
  bool force_iterative = false;  // test hooks
  bool force_dense = false;
};

// Per-frequency orthonormal eigenvector blocks Phi^(k) (n x m, columns by
// descending eigenvalue), k = -k_max..k_max stored at index k + k_max.
struct EigBasis {
  int k_max = 0;
  int m = 0;
  std::vector<Eigen::MatrixXcd> phi;
  std::vector<Eigen::VectorXd> values;

  const Eigen::MatrixXcd& basis(int k) const {
    return phi.at(static_cast<std::size_t>(k + k_max));
  }
  const Eigen::VectorXd& eigenvalues(int k) const {
    return values.at(static_cast<std::size_t>(k + k_max));
  }
};

namespace detail {

inline void project_out(const Eigen::MatrixXcd& basis, int cols, Eigen::VectorXcd& w) {
  if (cols == 0) return;
  const auto b = basis.leftCols(cols);
  w.noalias() -= b * (b.adjoint() * w);
}

inline std::pair<Eigen::VectorXd, Eigen::MatrixXcd> dense_top_m(const Eigen::MatrixXcd& a,
                                                                int m) {
  const int n = static_cast<int>(a.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  double sigma = 0.0;
  if (es.info() != Eigen::Success) {
    // The QL sweep can stall on highly degenerate spectra (disjoint-clique
    // adjacencies hit this). Shifting by sigma*I keeps the eigenvectors,
    // changes the shift trajectory, and is undone exactly on the way out.
    for (double try_sigma : {1.0, kPi}) {
      es.compute(a + try_sigma * Eigen::MatrixXcd::Identity(n, n));
      if (es.info() == Eigen::Success) {
        sigma = try_sigma;
        break;
      }
    }
    if (es.info() != Eigen::Success) throw numerical_error("dense eigensolver failed");
  }
  Eigen::VectorXd vals(m);
  Eigen::MatrixXcd vecs(n, m);
  for (int t = 0; t < m; ++t) {
    vals(t) = es.eigenvalues()(n - 1 - t) - sigma;
    vecs.col(t) = es.eigenvectors().col(n - 1 - t);
  }
  return {std::move(vals), std::move(vecs)};
}

// One Lanczos run per restart; converged top Ritz pairs are locked and
// deflated so eigenvalue multiplicity is resolved across restarts.
inline bool lanczos_top_m(const SpMat& a, int m, double tol, std::uint64_t seed,
                          Eigen::VectorXd& out_vals, Eigen::MatrixXcd& out_vecs) {
  const int n = static_cast<int>(a.rows());
  SplitMix64 rng(seed);

  Eigen::MatrixXcd locked(n, m);
  std::vector<double> locked_vals;
  int nlocked = 0;

  const int cap = std::min(n, std::max(72, 12 * m));
  Eigen::MatrixXcd v(n, cap + 1);
  Eigen::VectorXd alpha(cap), beta(cap);
  Eigen::VectorXcd w(n), start(n);

  Eigen::VectorXcd restart_vec;
  bool have_restart = false;

  // Locks the leading `take` Ritz vectors of the current Krylov space.
  const auto lock_ritz = [&](int dim, const Eigen::VectorXd& mu, const Eigen::MatrixXd& s,
                             const std::vector<int>& order, int take) {
    for (int t = 0; t < take && nlocked < m; ++t) {
      Eigen::VectorXcd y =
          v.leftCols(dim) * s.col(order[static_cast<std::size_t>(t)]).cast<cd>();
      project_out(locked, nlocked, y);
      project_out(locked, nlocked, y);
      const double nrm = y.norm();
      if (nrm < 0.5) continue;  // numerically swallowed by earlier locks
      locked.col(nlocked) = y / nrm;
      locked_vals.push_back(mu(order[static_cast<std::size_t>(t)]));
      ++nlocked;
    }
  };

  const int max_attempts = 2 * m + 8;
  for (int attempt = 0; attempt < max_attempts && nlocked < m; ++attempt) {
    if (have_restart) {
      start = restart_vec;
      have_restart = false;
    } else {
      for (int i = 0; i < n; ++i) start(i) = cd(rng.uniform() - 0.5, rng.uniform() - 0.5);
    }
    project_out(locked, nlocked, start);
    project_out(locked, nlocked, start);
    const double snorm = start.norm();
    if (snorm < 1e-14) continue;
    v.col(0) = start / snorm;

    const int dim_cap = std::min(cap, n - nlocked);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolver;
    int dim = 0;
    bool exhausted_exact = false;  // Krylov space became A-invariant

    for (int j = 0; j < dim_cap; ++j) {
      w.noalias() = a * v.col(j);
      project_out(locked, nlocked, w);
      alpha(j) = std::real(v.col(j).dot(w));
      w.noalias() -= alpha(j) * v.col(j);
      if (j > 0) w.noalias() -= beta(j - 1) * v.col(j - 1);
      {
        const auto basis = v.leftCols(j + 1);
        w.noalias() -= basis * (basis.adjoint() * w);
        project_out(locked, nlocked, w);
        w.noalias() -= basis * (basis.adjoint() * w);
      }
      dim = j + 1;
      double scale = 1.0;
      for (int t = 0; t < dim; ++t) scale = std::max(scale, std::abs(alpha(t)));
      for (int t = 0; t + 1 < dim; ++t) scale = std::max(scale, beta(t));
      const double bnorm = w.norm();
      if (bnorm <= 1e-12 * scale) {
        exhausted_exact = true;
        break;
      }
      beta(j) = bnorm;

      const int need = m - nlocked;
      if (dim >= need) {
        tsolver.computeFromTridiagonal(alpha.head(dim), beta.head(dim - 1));
        if (tsolver.info() != Eigen::Success)
          throw numerical_error("tridiagonal eigensolver failed inside Lanczos");
        const Eigen::VectorXd& mu = tsolver.eigenvalues();  // ascending
        const Eigen::MatrixXd& s = tsolver.eigenvectors();
        std::vector<int> order(static_cast<std::size_t>(dim));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) { return mu(x) > mu(y); });
        const double lscale = std::max(1.0, std::abs(mu(order[0])));
        int converged_prefix = 0;
        for (int t = 0; t < std::min(need, dim); ++t) {
          const double resid = bnorm * std::abs(s(dim - 1, order[static_cast<std::size_t>(t)]));
          if (resid <= tol * lscale)
            ++converged_prefix;
          else
            break;
        }
        if (converged_prefix >= need) {
          lock_ritz(dim, mu, s, order, need);
          break;
        }
        if (j + 1 == dim_cap) {
          // Out of room: keep what converged, restart from the best
          // unconverged Ritz vector.
          if (converged_prefix > 0) lock_ritz(dim, mu, s, order, converged_prefix);
          if (nlocked < m && converged_prefix < dim) {
            restart_vec =
                v.leftCols(dim) *
                s.col(order[static_cast<std::size_t>(converged_prefix)]).cast<cd>();
            have_restart = true;
          }
          break;
        }
      }
      if (j + 1 < dim_cap) v.col(j + 1) = w / bnorm;
    }

    if (exhausted_exact && nlocked < m) {
      // Every Ritz pair of the invariant subspace is exact, but a Krylov
      // space grown from one start vector holds at most one copy of each
      // eigenvalue it reached, so values below its top can still be beaten
      // by copies of larger eigenvalues hiding in the complement. Lock the
      // whole prefix only when the subspace exhausts the deflated operator;
      // otherwise lock just the top pair and let the next restart dig.
      tsolver.computeFromTridiagonal(alpha.head(dim), beta.head(std::max(0, dim - 1)));
      if (tsolver.info() != Eigen::Success)
        throw numerical_error("tridiagonal eigensolver failed inside Lanczos");
      const Eigen::VectorXd& mu = tsolver.eigenvalues();
      const Eigen::MatrixXd& s = tsolver.eigenvectors();
      std::vector<int> order(static_cast<std::size_t>(dim));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) { return mu(x) > mu(y); });
      const int take = dim >= n - nlocked ? std::min(m - nlocked, dim) : 1;
      lock_ritz(dim, mu, s, order, take);
    }
  }

  if (nlocked < m) return false;

  // Restart order can interleave degenerate eigenvalues; emit descending.
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return locked_vals[static_cast<std::size_t>(x)] > locked_vals[static_cast<std::size_t>(y)];
  });
  out_vals.resize(m);
  out_vecs.resize(n, m);
  for (int t = 0; t < m; ++t) {
    out_vals(t) = locked_vals[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])];
    out_vecs.col(t) = locked.col(order[static_cast<std::size_t>(t)]);
  }
  return true;
}

}  // namespace detail

namespace detail {

inline void solve_frequency(const FrequencyStack& stack, int k, int m, const EigOptions& opt,
                            EigBasis& out) {
  const SpMat& a = stack(k);
  Eigen::VectorXd vals;
  Eigen::MatrixXcd vecs;
  const bool want_dense =
      opt.force_dense || (!opt.force_iterative && stack.n <= opt.dense_threshold);
  bool done = false;
  if (!want_dense) {
    const std::uint64_t seed = mix_seed(0xE16E5EEDULL, static_cast<std::uint64_t>(k),
                                        static_cast<std::uint64_t>(stack.n));
    done = lanczos_top_m(a, m, opt.tol, seed, vals, vecs);
    if (!done && (opt.force_iterative || stack.n > opt.dense_fallback_limit))
      throw numerical_error("eigensolver failed to converge at frequency k=" +
                            std::to_string(k));
  }
  if (!done) {
    auto dv = dense_top_m(Eigen::MatrixXcd(a), m);
    vals = std::move(dv.first);
    vecs = std::move(dv.second);
  }
  out.values[static_cast<std::size_t>(stack.k_max + k)] = vals;
  out.phi[static_cast<std::size_t>(stack.k_max + k)] = vecs;
  if (k > 0) {
    out.values[static_cast<std::size_t>(stack.k_max - k)] = vals;
    out.phi[static_cast<std::size_t>(stack.k_max - k)] = vecs.conjugate();
  }
}

}  // namespace detail

// Eigenbasis of the whole stack. Throws numerical_error naming the frequency
// when the iteration fails and the dense fallback is out of reach.
inline EigBasis top_m_eigvecs(const FrequencyStack& stack, int m, const EigOptions& opt = {}) {
  require(m >= 1, "top_m_eigvecs: m must be >= 1");
  require(m <= stack.n, "top_m_eigvecs: m exceeds the matrix dimension");
  EigBasis out;
  out.k_max = stack.k_max;
  out.m = m;
  out.phi.resize(static_cast<std::size_t>(2 * stack.k_max + 1));
  out.values.resize(static_cast<std::size_t>(2 * stack.k_max + 1));
  for (int k = 0; k <= stack.k_max; ++k) detail::solve_frequency(stack, k, m, opt, out);
  return out;
}

// Restricted variant: solves only the |k| values a frequency selection needs
// (the single-frequency baselines touch just A^(1)). Unselected slots stay
// empty and must not be read.
inline EigBasis top_m_eigvecs(const FrequencyStack& stack, int m, const EigOptions& opt,
                              const std::vector<int>& freqs) {
  require(m >= 1, "top_m_eigvecs: m must be >= 1");
  require(m <= stack.n, "top_m_eigvecs: m exceeds the matrix dimension");
  require(!freqs.empty(), "top_m_eigvecs: empty frequency selection");
  EigBasis out;
  out.k_max = stack.k_max;
  out.m = m;
  out.phi.resize(static_cast<std::size_t>(2 * stack.k_max + 1));
  out.values.resize(static_cast<std::size_t>(2 * stack.k_max + 1));
  std::vector<int> abs_ks;
  for (int k : freqs) {
    require(k >= -stack.k_max && k <= stack.k_max, "top_m_eigvecs: |k| exceeds k_max");
    abs_ks.push_back(std::abs(k));
  }
  std::sort(abs_ks.begin(), abs_ks.end());
  abs_ks.erase(std::unique(abs_ks.begin(), abs_ks.end()), abs_ks.end());
  for (int k : abs_ks) detail::solve_frequency(stack, k, m, opt, out);
  return out;
}

}  // namespace mfphase

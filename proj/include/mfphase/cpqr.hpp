#pragma once

// Multi-frequency column-pivoted QR. All frequencies share one column
// permutation, chosen greedily by the summed (not squared) trailing-column
// 2-norms; each frequency then takes its own one-step Householder update.
// Row phases are normalized so every R has a real nonnegative diagonal, with
// the phase absorbed into the matching Q column.

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "mfphase/core.hpp"
#include "mfphase/eigensolve.hpp"

namespace mfphase {

// Frequency index sets used across the factorization and both recovery
// stages. single_first restricts every frequency sum to k = 1 (the
// single-frequency baselines); exclude_zero drops k = 0 (ablation knob).
inline std::vector<int> frequency_selection(int k_max, bool single_first = false,
                                            bool exclude_zero = false) {
  require(k_max >= 0, "frequency_selection: k_max must be >= 0");
  if (single_first) {
    require(k_max >= 1, "frequency_selection: single-frequency baseline needs k_max >= 1");
    return {1};
  }
  std::vector<int> ks;
  ks.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (int k = -k_max; k <= k_max; ++k) {
    if (exclude_zero && k == 0) continue;
    ks.push_back(k);
  }
  return ks;
}

struct HouseholderStep {
  Eigen::MatrixXcd q;  // h x h unitary with q * x == input
  Eigen::MatrixXcd x;  // transformed block, first column zero below (0,0)
};

// One Householder reflection on X (h x w): zeroes column 0 below the top
// entry, then rescales so X(0,0) is real nonnegative. Q absorbs the phase,
// keeping Q * X' equal to the input exactly.
inline HouseholderStep householder_step(const Eigen::MatrixXcd& in) {
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  require(h >= 1 && w >= 1, "householder_step: empty block");
  const Eigen::VectorXcd r = in.col(0);
  const double rnorm = r.norm();
  if (rnorm == 0.0)
    throw numerical_error("householder_step: zero first column (degenerate pivot)");

  const cd theta = -std::polar(rnorm, std::arg(r(0)));
  Eigen::VectorXcd u = r;
  u(0) -= theta;
  const Eigen::VectorXcd vref = u / u.norm();  // |u(0)| = |r(0)| + rnorm > 0

  HouseholderStep out;
  out.q = Eigen::MatrixXcd::Identity(h, h) - 2.0 * (vref * vref.adjoint());
  out.x = in - 2.0 * vref * (vref.adjoint() * in);  // reflector is Hermitian
  const cd top = out.x(0, 0);
  const double ph = std::arg(top);
  out.x.row(0) *= std::polar(1.0, -ph);
  out.q.col(0) *= std::polar(1.0, ph);
  out.x(0, 0) = cd(std::abs(top), 0.0);
  for (Eigen::Index i = 1; i < h; ++i) out.x(i, 0) = cd(0.0, 0.0);
  return out;
}

struct MfCpqrResult {
  int m = 0;
  int n = 0;
  std::vector<int> freq_ids;           // processed k values, ascending
  std::vector<Eigen::MatrixXcd> q;     // per frequency, m x m unitary
  std::vector<Eigen::MatrixXcd> r;     // per frequency, m x n, original column order
  std::vector<int> permutation;        // permutation[pos] = original column at pos
  std::vector<int> pivots;             // first m entries of permutation

  int index_of(int k) const {
    for (std::size_t t = 0; t < freq_ids.size(); ++t)
      if (freq_ids[t] == k) return static_cast<int>(t);
    throw std::invalid_argument("mf_cpqr result: frequency not processed");
  }
  const Eigen::MatrixXcd& r_of(int k) const {
    return r[static_cast<std::size_t>(index_of(k))];
  }
  const Eigen::MatrixXcd& q_of(int k) const {
    return q[static_cast<std::size_t>(index_of(k))];
  }
};

inline MfCpqrResult mf_cpqr(const EigBasis& basis, std::vector<int> freqs) {
  const int m = basis.m;
  require(m >= 1, "mf_cpqr: basis has no columns");
  require(!freqs.empty(), "mf_cpqr: empty frequency selection");
  std::sort(freqs.begin(), freqs.end());
  const int n = static_cast<int>(basis.basis(freqs.front()).rows());
  require(n >= m, "mf_cpqr: need at least m columns after transposition");

  const std::size_t nf = freqs.size();
  std::vector<Eigen::MatrixXcd> rwork(nf), qwork(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const Eigen::MatrixXcd& phi = basis.basis(freqs[f]);
    require(static_cast<int>(phi.rows()) == n && static_cast<int>(phi.cols()) == m,
            "mf_cpqr: inconsistent block shapes across frequencies");
    rwork[f] = phi.transpose();  // m x n, transpose without conjugation
    qwork[f] = Eigen::MatrixXcd::Identity(m, m);
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = j;

  for (int t = 0; t < m; ++t) {
    int best = -1;
    double best_rho = -1.0;
    for (int j = t; j < n; ++j) {
      double rho = 0.0;
      for (std::size_t f = 0; f < nf; ++f) rho += rwork[f].col(j).tail(m - t).norm();
      if (rho > best_rho) {
        best_rho = rho;
        best = j;
      }
    }
    if (best_rho <= 0.0)
      throw numerical_error("mf_cpqr: zero residual at pivot round " + std::to_string(t) +
                            " (rank deficient)");
    if (best != t) {
      for (std::size_t f = 0; f < nf; ++f) rwork[f].col(t).swap(rwork[f].col(best));
      std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(best)]);
    }
    for (std::size_t f = 0; f < nf; ++f) {
      try {
        const HouseholderStep hh =
            householder_step(rwork[f].block(t, t, m - t, n - t));
        rwork[f].block(t, t, m - t, n - t) = hh.x;
        qwork[f].block(0, t, m, m - t) = qwork[f].block(0, t, m, m - t) * hh.q;
      } catch (const numerical_error& e) {
        throw numerical_error("mf_cpqr: frequency k=" + std::to_string(freqs[f]) +
                              ", round " + std::to_string(t) + ": " + e.what());
      }
    }
  }

  MfCpqrResult out;
  out.m = m;
  out.n = n;
  out.freq_ids = freqs;
  out.q = std::move(qwork);
  out.r.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    out.r[f].resize(m, n);
    for (int pos = 0; pos < n; ++pos)
      out.r[f].col(perm[static_cast<std::size_t>(pos)]) = rwork[f].col(pos);
  }
  out.permutation = perm;
  out.pivots.assign(perm.begin(), perm.begin() + m);
  return out;
}

inline MfCpqrResult mf_cpqr(const EigBasis& basis) {
  return mf_cpqr(basis, frequency_selection(basis.k_max));
}

}  // namespace mfphase

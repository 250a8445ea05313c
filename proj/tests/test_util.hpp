#pragma once

// Shared helpers for the unit suites.

#include <Eigen/Dense>

#include "mfphase/model.hpp"
#include "mfphase/rng.hpp"

namespace testutil {

using mfphase::cd;

// Smallest cosine of a principal angle between the column spans of two
// matrices with orthonormal columns; 1 means identical subspaces.
inline double min_principal_cos(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.adjoint() * b);
  return svd.singularValues().minCoeff();
}

inline Eigen::MatrixXcd random_complex(int rows, int cols, mfphase::SplitMix64& rng) {
  Eigen::MatrixXcd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = cd{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
  return x;
}

inline mfphase::ModelParams params(int n, int m, int k_max, mfphase::AngleMode mode, double p,
                                   double q, std::uint64_t seed) {
  mfphase::ModelParams out;
  out.n = n;
  out.m = m;
  out.k_max = k_max;
  out.mode = mode;
  out.p = p;
  out.q = q;
  out.seed = seed;
  return out;
}

}  // namespace testutil

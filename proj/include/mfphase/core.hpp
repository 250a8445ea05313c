#pragma once

// Shared vocabulary for the mfphase library: scalar aliases, the angle-domain
// switch, and the error taxonomy thrown across module boundaries.

#include <complex>
#include <stdexcept>
#include <string>

namespace mfphase {

inline constexpr const char* kVersion = "0.1.0";

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Discrete: phases live on the grid Omega = {0, d, ..., 2*k_max*d},
// d = 2*pi/(2*k_max+1), stored as integer grid indices.
// Continuous: phases live in [0, 2*pi), stored as radians.
enum class AngleMode { Discrete, Continuous };

inline const char* to_string(AngleMode m) {
  return m == AngleMode::Discrete ? "discrete" : "continuous";
}

// Thrown on solver breakdowns: eigensolver non-convergence, rank-deficient
// pivot rounds, degenerate Householder columns.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed or unreadable on-disk artifacts.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Parameter and size violations use std::invalid_argument directly.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Number of grid points K = 2*k_max + 1 for the discrete phase set.
inline int grid_points(int k_max) { return 2 * k_max + 1; }

}  // namespace mfphase

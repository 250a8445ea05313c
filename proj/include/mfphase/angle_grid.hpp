#pragma once

// Maximization of trigonometric polynomials over the phase grid. Scores have
// the form sum_k <e^{ik theta}, c_k> = sum_k conj(e^{ik theta}) c_k; taking
// the real part and evaluating on all grid angles at once is a single DFT of
// the coefficient vector. Discrete mode evaluates on Omega itself; Continuous
// mode evaluates on the zero-padded grid of zero_pad_factor * (2k_max+1)
// points. Ties resolve to the smallest grid index.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "mfphase/core.hpp"

namespace mfphase {

struct PhaseGrid {
  AngleMode mode = AngleMode::Discrete;
  int k_max = 0;
  int zero_pad_factor = 16;

  int size() const {
    const int k = grid_points(k_max);
    return mode == AngleMode::Discrete ? k : zero_pad_factor * k;
  }
  double angle(int idx) const { return kTwoPi * idx / size(); }

  void validate() const {
    require(k_max >= 0, "phase grid: k_max must be >= 0");
    require(zero_pad_factor >= 1, "phase grid: zero_pad_factor must be >= 1");
  }
};

struct GridArgmax {
  int index = 0;
  double angle = 0.0;
  double score = 0.0;
};

// Reusable evaluator: one FFT plan, one buffer pair. Coefficients are indexed
// k + k_max for k in [-k_max, k_max]; unused frequencies stay zero.
class GridEvaluator {
 public:
  explicit GridEvaluator(const PhaseGrid& grid) : grid_(grid) {
    grid_.validate();
    in_.assign(static_cast<std::size_t>(grid_.size()), cd(0.0, 0.0));
    out_.resize(static_cast<std::size_t>(grid_.size()));
  }

  const PhaseGrid& grid() const { return grid_; }

  // Real part of the polynomial at every grid angle.
  const std::vector<cd>& evaluate(const Eigen::VectorXcd& coeffs) {
    const int k_max = grid_.k_max;
    require(coeffs.size() == 2 * k_max + 1,
            "argmax_over_grid: coefficient vector must have 2*k_max+1 entries");
    const int l = grid_.size();
    std::fill(in_.begin(), in_.end(), cd(0.0, 0.0));
    for (int k = -k_max; k <= k_max; ++k) {
      const int slot = ((k % l) + l) % l;
      in_[static_cast<std::size_t>(slot)] += coeffs(k + k_max);
    }
    if (l == 1)
      out_[0] = in_[0];  // the FFT backend rejects length-1 transforms
    else
      fft_.fwd(out_, in_);  // out[t] = sum_k c_k e^{-2 pi i k t / L}
    return out_;
  }

  GridArgmax argmax(const Eigen::VectorXcd& coeffs) {
    const std::vector<cd>& values = evaluate(coeffs);
    GridArgmax best;
    best.index = 0;
    best.score = values[0].real();
    for (int t = 1; t < static_cast<int>(values.size()); ++t) {
      const double v = values[static_cast<std::size_t>(t)].real();
      if (v > best.score) {
        best.score = v;
        best.index = t;
      }
    }
    best.angle = grid_.angle(best.index);
    return best;
  }

 private:
  PhaseGrid grid_;
  Eigen::FFT<double> fft_;
  std::vector<cd> in_, out_;
};

inline GridArgmax argmax_over_grid(const PhaseGrid& grid, const Eigen::VectorXcd& coeffs) {
  GridEvaluator ev(grid);
  return ev.argmax(coeffs);
}

}  // namespace mfphase

#include <catch2/catch_amalgamated.hpp>

#include "mfphase/angle_grid.hpp"
#include "test_util.hpp"

using namespace mfphase;

namespace {

// Direct O(K * L) evaluation used as the oracle for the FFT path.
double direct_score(const Eigen::VectorXcd& coeffs, int k_max, double angle) {
  double v = 0.0;
  for (int k = -k_max; k <= k_max; ++k)
    v += (coeffs(k + k_max) * std::polar(1.0, -k * angle)).real();
  return v;
}

}  // namespace

TEST_CASE("pure discrete tone peaks at its own grid index with full score") {
  const int k_max = 4;
  const PhaseGrid grid{AngleMode::Discrete, k_max, 16};
  REQUIRE(grid.size() == 9);
  const double theta0 = grid.angle(3);
  Eigen::VectorXcd coeffs(9);
  for (int k = -k_max; k <= k_max; ++k) coeffs(k + k_max) = std::polar(1.0, k * theta0);

  const GridArgmax got = argmax_over_grid(grid, coeffs);
  REQUIRE(got.index == 3);
  REQUIRE(got.angle == theta0);
  REQUIRE(std::abs(got.score - 9.0) < 1e-12);
}

TEST_CASE("ties resolve to the smallest grid index") {
  const PhaseGrid grid{AngleMode::Discrete, 1, 16};
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(3);
  SECTION("all angles tie") {
    REQUIRE(argmax_over_grid(grid, coeffs).index == 0);
  }
  SECTION("two-way tie away from zero") {
    coeffs(2) = cd(-1.0, 0.0);  // score(t) = -cos(2 pi t / 3): indices 1, 2 tie
    const GridArgmax got = argmax_over_grid(grid, coeffs);
    REQUIRE(got.index == 1);
    REQUIRE(std::abs(got.score - 0.5) < 1e-12);
  }
}

TEST_CASE("fft evaluation matches the direct scan on random coefficients") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k_max = static_cast<int>(rng.below(9));
    const bool continuous = rng.below(2) == 1;
    const PhaseGrid grid{continuous ? AngleMode::Continuous : AngleMode::Discrete, k_max,
                         1 + static_cast<int>(rng.below(8))};
    Eigen::VectorXcd coeffs(2 * k_max + 1);
    for (int t = 0; t < coeffs.size(); ++t)
      coeffs(t) = cd{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};

    const GridArgmax fast = argmax_over_grid(grid, coeffs);
    int best_idx = 0;
    double best = -1e300;
    for (int idx = 0; idx < grid.size(); ++idx) {
      const double v = direct_score(coeffs, k_max, grid.angle(idx));
      if (v > best) {
        best = v;
        best_idx = idx;
      }
    }
    REQUIRE(fast.index == best_idx);
    REQUIRE(std::abs(fast.score - best) <= 1e-12 * std::max(1.0, std::abs(best)));
  }
}

TEST_CASE("continuous mode refines the grid by the zero-pad factor") {
  const int k_max = 5;
  const PhaseGrid grid{AngleMode::Continuous, k_max, 16};
  REQUIRE(grid.size() == 16 * 11);

  // A pure continuous tone lands within half a refined grid step.
  SplitMix64 rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta0 = kTwoPi * rng.uniform();
    Eigen::VectorXcd coeffs(2 * k_max + 1);
    for (int k = -k_max; k <= k_max; ++k) coeffs(k + k_max) = std::polar(1.0, k * theta0);
    const GridArgmax got = argmax_over_grid(grid, coeffs);
    double diff = std::abs(got.angle - theta0);
    diff = std::min(diff, kTwoPi - diff);
    REQUIRE(diff <= kPi / grid.size() + 1e-12);
    REQUIRE(got.score > 2 * k_max);  // close to the perfect score 2 k_max + 1
  }
}

TEST_CASE("zero pad factor one reproduces the discrete grid") {
  const int k_max = 3;
  const PhaseGrid dg{AngleMode::Discrete, k_max, 16};
  const PhaseGrid cg{AngleMode::Continuous, k_max, 1};
  REQUIRE(dg.size() == cg.size());
  SplitMix64 rng(77);
  Eigen::VectorXcd coeffs(7);
  for (int t = 0; t < 7; ++t) coeffs(t) = cd{rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
  const GridArgmax a = argmax_over_grid(dg, coeffs);
  const GridArgmax b = argmax_over_grid(cg, coeffs);
  REQUIRE(a.index == b.index);
  REQUIRE(a.score == b.score);
}

TEST_CASE("evaluator state does not leak between calls") {
  const PhaseGrid grid{AngleMode::Discrete, 2, 16};
  GridEvaluator ev(grid);
  SplitMix64 rng(88);
  Eigen::VectorXcd c1(5), c2(5);
  for (int t = 0; t < 5; ++t) {
    c1(t) = cd{rng.uniform(), rng.uniform()};
    c2(t) = cd{rng.uniform() - 1, rng.uniform()};
  }
  ev.argmax(c1);
  const GridArgmax reused = ev.argmax(c2);
  const GridArgmax fresh = argmax_over_grid(grid, c2);
  REQUIRE(reused.index == fresh.index);
  REQUIRE(reused.score == fresh.score);
}

TEST_CASE("grid validation rejects bad shapes") {
  PhaseGrid bad{AngleMode::Continuous, 2, 0};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  const PhaseGrid grid{AngleMode::Discrete, 2, 16};
  REQUIRE_THROWS_AS(argmax_over_grid(grid, Eigen::VectorXcd::Zero(4)),
                    std::invalid_argument);  // needs 2 k_max + 1 coefficients
}

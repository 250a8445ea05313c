#include <catch2/catch_amalgamated.hpp>

#include "mfphase/gpm.hpp"
#include "mfphase/spectral.hpp"
#include "test_util.hpp"

using namespace mfphase;
using testutil::params;

namespace {

Estimate estimate_from_truth(const GroundTruth& truth, AngleMode mode, int k_max) {
  Estimate e;
  e.mode = mode;
  e.grid_size = grid_points(k_max);
  e.assignment = truth.assignment;
  e.phase_idx = truth.phase_idx;
  e.phase_rad = truth.phase_rad;
  return e;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  std::vector<int> fa(static_cast<std::size_t>(n), -1), fb(fa);
  for (int i = 0; i < n; ++i) {
    int& ra = fa[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])];
    int& rb = fb[static_cast<std::size_t>(b[static_cast<std::size_t>(i)])];
    if (ra < 0) ra = i;
    if (rb < 0) rb = i;
    if (ra != rb) return false;
  }
  return true;
}

bool balanced(const std::vector<int>& a, int m) {
  std::vector<int> count(static_cast<std::size_t>(m), 0);
  for (int c : a) ++count[static_cast<std::size_t>(c)];
  for (int c : count)
    if (c != static_cast<int>(a.size()) / m) return false;
  return true;
}

}  // namespace

TEST_CASE("ground truth is a fixed point on clean data") {
  const auto pr = params(36, 3, 4, AngleMode::Discrete, 1.0, 0.0, 41);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const Estimate init = estimate_from_truth(truth, pr.mode, pr.k_max);

  GpmOptions opt;
  opt.iterations = 5;
  const GpmRun run = run_gpm(stack, 3, init, opt);

  REQUIRE(run.reached_fixed_point);
  REQUIRE(run.iterations == 1);  // first step already reproduces the state
  REQUIRE(run.estimate.assignment == init.assignment);
  REQUIRE(run.estimate.phase_idx == init.phase_idx);

  // Clean objective: every ordered within-cluster pair contributes 2k_max+1.
  const double expected = 9.0 * (3 * 12 * 11);
  REQUIRE(std::abs(run.trace[0].objective - expected) < 1e-6 * expected);
  REQUIRE(run.trace[0].assignment_changes == 0);
}

TEST_CASE("zero iterations returns the initialization untouched") {
  const auto pr = params(20, 2, 2, AngleMode::Discrete, 0.8, 0.1, 52);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const Estimate init = estimate_from_truth(truth, pr.mode, pr.k_max);
  GpmOptions opt;
  opt.iterations = 0;
  const GpmRun run = run_gpm(stack, 2, init, opt);
  REQUIRE(run.iterations == 0);
  REQUIRE_FALSE(run.reached_fixed_point);
  REQUIRE(run.estimate.assignment == init.assignment);
  REQUIRE(run.estimate.phase_idx == init.phase_idx);
}

TEST_CASE("frequency restriction equals a smaller stack on the same grid") {
  // Continuous instances do not depend on the cutoff, so A^(1) is shared;
  // zero-pad factors are chosen to equate the estimation grids (3*17 = 17*3).
  const auto pr = params(24, 2, 8, AngleMode::Continuous, 0.9, 0.1, 63);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack8 = frequency_stack(obs, 8);
  const FrequencyStack stack1 = frequency_stack(obs, 1);

  const Estimate init8 = random_init(stack8, 2, 3, 1234);
  const Estimate init1 = random_init(stack1, 2, 17, 1234);
  REQUIRE(init8.assignment == init1.assignment);
  REQUIRE(init8.phase_idx == init1.phase_idx);

  GpmOptions opt8;
  opt8.freqs = {1};
  opt8.iterations = 12;
  opt8.zero_pad_factor = 3;
  GpmOptions opt1 = opt8;
  opt1.zero_pad_factor = 17;

  const GpmRun run8 = run_gpm(stack8, 2, init8, opt8);
  const GpmRun run1 = run_gpm(stack1, 2, init1, opt1);

  REQUIRE(run8.iterations == run1.iterations);
  REQUIRE(run8.estimate.assignment == run1.estimate.assignment);
  REQUIRE(run8.estimate.phase_idx == run1.estimate.phase_idx);
  for (std::size_t t = 0; t < run8.trace.size(); ++t)
    REQUIRE(run8.trace[t].objective == run1.trace[t].objective);
}

TEST_CASE("early stop changes the iteration count but never the estimate") {
  SplitMix64 seeder(74);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pr = params(40, 2, 3, AngleMode::Discrete, 0.7, 0.15, seeder.next());
    const auto [truth, obs] = generate(pr);
    const FrequencyStack stack = frequency_stack(obs, pr.k_max);
    const Estimate init = init_from_spectral(recover_spectral(stack, 2));

    GpmOptions on;
    on.iterations = 30;
    GpmOptions off = on;
    off.early_stop = false;

    const GpmRun a = run_gpm(stack, 2, init, on);
    const GpmRun b = run_gpm(stack, 2, init, off);
    REQUIRE(b.iterations == 30);
    REQUIRE(a.estimate.assignment == b.estimate.assignment);
    REQUIRE(a.estimate.phase_idx == b.estimate.phase_idx);
    REQUIRE(a.reached_fixed_point == b.reached_fixed_point);
  }
}

TEST_CASE("every iterate stays balanced") {
  const auto pr = params(30, 3, 3, AngleMode::Discrete, 0.6, 0.25, 85);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  Estimate state = random_init(stack, 3, 16, 7);
  REQUIRE(balanced(state.assignment, 3));
  for (int t = 0; t < 8; ++t) {
    state = gpm_step(stack, 3, state);
    REQUIRE(balanced(state.assignment, 3));
  }
}

TEST_CASE("objective is non-decreasing from spectral warm starts") {
  // The per-iteration objective is recorded rather than proved monotone; this
  // pins the measured behavior: from spectral initializations the sequence is
  // non-decreasing (up to fp slack) in at least 95 of 100 seeded runs.
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pr = params(60, 2, 3, AngleMode::Discrete, 0.45, 0.12, 5000 + seed);
    const auto [truth, obs] = generate(pr);
    const FrequencyStack stack = frequency_stack(obs, pr.k_max);
    GpmOptions opt;
    opt.iterations = 25;
    const GpmRun run = run_gpm(stack, 2, init_from_spectral(recover_spectral(stack, 2)), opt);
    bool ok = true;
    for (std::size_t t = 1; t < run.trace.size(); ++t)
      if (run.trace[t].objective < run.trace[t - 1].objective - 1e-9) ok = false;
    if (ok) ++monotone;
  }
  REQUIRE(monotone >= 95);
}

TEST_CASE("clean spectral warm start is already the truth") {
  const auto pr = params(36, 2, 4, AngleMode::Discrete, 1.0, 0.0, 96);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const Estimate init = init_from_spectral(recover_spectral(stack, 2));
  REQUIRE(same_partition(init.assignment, truth.assignment));
  GpmOptions opt;
  opt.iterations = 50;
  const GpmRun run = run_gpm(stack, 2, init, opt);
  REQUIRE(run.reached_fixed_point);
  REQUIRE(same_partition(run.estimate.assignment, truth.assignment));
}

TEST_CASE("random initialization is balanced, on-grid, and deterministic") {
  const auto pr = params(30, 3, 2, AngleMode::Discrete, 0.8, 0.1, 17);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const Estimate a = random_init(stack, 3, 16, 99);
  const Estimate b = random_init(stack, 3, 16, 99);
  const Estimate c = random_init(stack, 3, 16, 100);
  REQUIRE(balanced(a.assignment, 3));
  REQUIRE(a.grid_size == grid_points(2));
  for (std::size_t i = 0; i < a.phase_idx.size(); ++i) {
    REQUIRE(a.phase_idx[i] >= 0);
    REQUIRE(a.phase_idx[i] < a.grid_size);
    REQUIRE(a.phase_rad[i] == kTwoPi * a.phase_idx[i] / a.grid_size);
  }
  REQUIRE(a.assignment == b.assignment);
  REQUIRE(a.phase_idx == b.phase_idx);
  REQUIRE((a.assignment != c.assignment || a.phase_idx != c.phase_idx));
}

TEST_CASE("state validation guards") {
  const auto pr = params(12, 2, 2, AngleMode::Discrete, 0.9, 0.1, 3);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);

  Estimate unbalanced = estimate_from_truth(truth, pr.mode, pr.k_max);
  unbalanced.assignment.assign(12, 0);
  REQUIRE_THROWS_AS(gpm_step(stack, 2, unbalanced), std::invalid_argument);

  Estimate wrong_grid = estimate_from_truth(truth, pr.mode, pr.k_max);
  wrong_grid.grid_size = 99;
  REQUIRE_THROWS_AS(gpm_step(stack, 2, wrong_grid), std::invalid_argument);

  GpmOptions opt;
  opt.iterations = -1;
  REQUIRE_THROWS_AS(run_gpm(stack, 2, estimate_from_truth(truth, pr.mode, pr.k_max), opt),
                    std::invalid_argument);

  opt.iterations = 1;
  opt.freqs = {9};
  REQUIRE_THROWS_AS(run_gpm(stack, 2, estimate_from_truth(truth, pr.mode, pr.k_max), opt),
                    std::invalid_argument);
}

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "mfphase/spectral.hpp"
#include "test_util.hpp"

using namespace mfphase;
using testutil::params;

namespace {

// Partition equality irrespective of labels.
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

// Discrete phases agree up to one shift per true cluster.
bool phases_match_up_to_cluster_shift(const Estimate& est, const GroundTruth& truth, int m,
                                      int k) {
  std::vector<int> shift(static_cast<std::size_t>(m), -1);
  for (std::size_t i = 0; i < truth.assignment.size(); ++i) {
    const int c = truth.assignment[i];
    const int d = ((est.phase_idx[i] - truth.phase_idx[i]) % k + k) % k;
    if (shift[static_cast<std::size_t>(c)] < 0) shift[static_cast<std::size_t>(c)] = d;
    if (shift[static_cast<std::size_t>(c)] != d) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("clean discrete instance is recovered exactly") {
  const auto pr = params(36, 3, 3, AngleMode::Discrete, 1.0, 0.0, 2);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const SpectralResult got = recover_spectral(stack, 3);

  REQUIRE(same_partition(got.estimate.assignment, truth.assignment));
  REQUIRE(phases_match_up_to_cluster_shift(got.estimate, truth, 3, grid_points(3)));

  // Score separation: the true cluster row scores (2 k_max + 1) / sqrt(s),
  // every other row is numerically zero.
  const double expected = 7.0 / std::sqrt(12.0);
  for (int i = 0; i < 36; ++i) {
    int best = 0;
    for (int row = 1; row < 3; ++row)
      if (got.scores(i, row) > got.scores(i, best)) best = row;
    REQUIRE(std::abs(got.scores(i, best) - expected) < 1e-9);
    for (int row = 0; row < 3; ++row)
      if (row != best) REQUIRE(std::abs(got.scores(i, row)) < 1e-9);
  }
}

TEST_CASE("clean continuous instance is recovered to grid resolution") {
  const auto pr = params(24, 2, 4, AngleMode::Continuous, 1.0, 0.0, 8);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  SpectralOptions opt;
  opt.zero_pad_factor = 16;
  const SpectralResult got = recover_spectral(stack, 2, opt);

  REQUIRE(same_partition(got.estimate.assignment, truth.assignment));
  REQUIRE(got.estimate.grid_size == 16 * 9);

  // One free rotation per cluster: residuals theta_hat - theta_true must be
  // constant within each cluster up to the padded grid resolution.
  for (int c = 0; c < 2; ++c) {
    cd anchor{0.0, 0.0};
    bool first = true;
    double ref = 0.0;
    for (std::size_t i = 0; i < truth.assignment.size(); ++i) {
      if (truth.assignment[i] != c) continue;
      const double d = got.estimate.phase_rad[i] - truth.phase_rad[i];
      if (first) {
        ref = d;
        first = false;
      } else {
        double diff = std::abs(d - ref);
        diff = std::fmod(diff, kTwoPi);
        diff = std::min(diff, kTwoPi - diff);
        // Two grid-rounded values, each within half a step of the truth.
        REQUIRE(diff <= kTwoPi / got.estimate.grid_size + 1e-9);
      }
      anchor += std::polar(1.0, d);
    }
    REQUIRE(std::abs(anchor) > 0.0);
  }
}

TEST_CASE("single-frequency restriction matches a full run on clean data") {
  const auto pr = params(30, 2, 4, AngleMode::Discrete, 1.0, 0.0, 12);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);

  SpectralOptions sf;
  sf.freqs = frequency_selection(pr.k_max, true);
  const SpectralResult got_sf = recover_spectral(stack, 2, sf);
  const SpectralResult got_mf = recover_spectral(stack, 2);

  REQUIRE(same_partition(got_sf.estimate.assignment, truth.assignment));
  REQUIRE(same_partition(got_mf.estimate.assignment, truth.assignment));
  REQUIRE(phases_match_up_to_cluster_shift(got_sf.estimate, truth, 2, grid_points(4)));

  // The single-frequency scores use one coefficient of modulus 1/sqrt(s).
  const double expected = 1.0 / std::sqrt(15.0);
  for (int i = 0; i < 30; ++i) {
    int best = 0;
    for (int row = 1; row < 2; ++row)
      if (got_sf.scores(i, row) > got_sf.scores(i, best)) best = row;
    REQUIRE(std::abs(got_sf.scores(i, best) - expected) < 1e-9);
  }
}

TEST_CASE("noisy instance above threshold is recovered through the iterative path") {
  const auto pr = params(150, 3, 3, AngleMode::Discrete, 0.8, 0.05, 4);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  const SpectralResult got = recover_spectral(stack, 3);  // n > dense threshold
  REQUIRE(same_partition(got.estimate.assignment, truth.assignment));
  REQUIRE(phases_match_up_to_cluster_shift(got.estimate, truth, 3, grid_points(3)));
}

TEST_CASE("ablation selection without frequency zero still recovers clean data") {
  const auto pr = params(30, 2, 3, AngleMode::Discrete, 1.0, 0.0, 19);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  SpectralOptions opt;
  opt.freqs = frequency_selection(pr.k_max, false, true);
  const SpectralResult got = recover_spectral(stack, 2, opt);
  REQUIRE(same_partition(got.estimate.assignment, truth.assignment));
}

TEST_CASE("spectral recovery guards") {
  const auto pr = params(20, 2, 2, AngleMode::Discrete, 0.9, 0.1, 6);
  const auto [truth, obs] = generate(pr);
  const FrequencyStack stack = frequency_stack(obs, pr.k_max);
  REQUIRE_THROWS_AS(recover_spectral(stack, 1), std::invalid_argument);
  SpectralOptions opt;
  opt.freqs = {0, 5};  // beyond the cutoff
  REQUIRE_THROWS_AS(recover_spectral(stack, 2, opt), std::invalid_argument);
}

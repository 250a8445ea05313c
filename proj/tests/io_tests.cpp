#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "mfphase/instance_io.hpp"
#include "test_util.hpp"

using namespace mfphase;
using testutil::params;

TEST_CASE("discrete instances round trip exactly") {
  const auto pr = params(24, 3, 3, AngleMode::Discrete, 0.75, 0.2, 123);
  const auto [truth, obs] = generate(pr);

  std::stringstream buf;
  save_instance(buf, pr, obs, &truth);
  const LoadedInstance li = load_instance(buf);

  REQUIRE(li.params.n == pr.n);
  REQUIRE(li.params.m == pr.m);
  REQUIRE(li.params.k_max == pr.k_max);
  REQUIRE(li.params.mode == pr.mode);
  REQUIRE(li.params.p == pr.p);
  REQUIRE(li.params.q == pr.q);
  REQUIRE(li.params.seed == pr.seed);
  REQUIRE(li.obs.rows == obs.rows);
  REQUIRE(li.obs.cols == obs.cols);
  REQUIRE(li.obs.grid == obs.grid);
  REQUIRE(li.obs.grid_size == obs.grid_size);
  REQUIRE(li.has_truth);
  REQUIRE(li.truth.assignment == truth.assignment);
  REQUIRE(li.truth.phase_idx == truth.phase_idx);
  REQUIRE(li.truth.phase_rad == truth.phase_rad);
}

TEST_CASE("continuous instances round trip bit exactly") {
  const auto pr = params(20, 2, 4, AngleMode::Continuous, 0.6180339887498949, 0.1, 321);
  const auto [truth, obs] = generate(pr);

  std::stringstream buf;
  save_instance(buf, pr, obs, &truth);
  const LoadedInstance li = load_instance(buf);

  REQUIRE(li.params.p == pr.p);  // 17 significant digits survive the text form
  REQUIRE(li.obs.angle == obs.angle);
  REQUIRE(li.obs.grid.empty());
  REQUIRE(li.truth.phase_rad == truth.phase_rad);
  REQUIRE(li.truth.phase_idx.empty());
}

TEST_CASE("truth is optional") {
  const auto pr = params(12, 2, 2, AngleMode::Discrete, 0.9, 0.1, 4);
  const auto [truth, obs] = generate(pr);
  std::stringstream buf;
  save_instance(buf, pr, obs, nullptr);
  const LoadedInstance li = load_instance(buf);
  REQUIRE_FALSE(li.has_truth);
  REQUIRE(li.truth.assignment.empty());
  REQUIRE(li.obs.rows == obs.rows);
}

TEST_CASE("round trip through a file path") {
  const auto pr = params(16, 2, 2, AngleMode::Discrete, 0.8, 0.2, 9);
  const auto [truth, obs] = generate(pr);
  const std::string path =
      (std::filesystem::temp_directory_path() / "mfphase_io_test_instance.txt").string();
  save_instance(path, pr, obs, &truth);
  const LoadedInstance li = load_instance(path);
  REQUIRE(li.obs.rows == obs.rows);
  REQUIRE(li.truth.assignment == truth.assignment);
  std::filesystem::remove(path);
  REQUIRE_THROWS_AS(load_instance(path), io_error);
}

TEST_CASE("malformed files are rejected with io errors") {
  const auto pr = params(12, 2, 2, AngleMode::Discrete, 0.9, 0.1, 4);
  const auto [truth, obs] = generate(pr);
  std::stringstream good;
  save_instance(good, pr, obs, &truth);
  const std::string text = good.str();

  SECTION("wrong magic") {
    std::stringstream bad("mfphase-whatever 1\n");
    REQUIRE_THROWS_AS(load_instance(bad), io_error);
  }
  SECTION("unsupported version") {
    std::stringstream bad("mfphase-instance 2\n");
    REQUIRE_THROWS_AS(load_instance(bad), io_error);
  }
  SECTION("truncated edge list") {
    std::stringstream bad(text.substr(0, text.find("truth") - 10));
    REQUIRE_THROWS_AS(load_instance(bad), io_error);
  }
  SECTION("edge endpoint out of range") {
    std::string broken = text;
    const auto pos = broken.find("\n0 ");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 3, "\n99 ");
    std::stringstream bad(broken);
    REQUIRE_THROWS_AS(load_instance(bad), io_error);
  }
  SECTION("invalid parameters are rejected on load") {
    std::string broken = text;
    const auto pos = broken.find("m 2");
    broken.replace(pos, 3, "m 5");  // 12 % 5 != 0
    std::stringstream bad(broken);
    REQUIRE_THROWS_AS(load_instance(bad), std::invalid_argument);
  }
}

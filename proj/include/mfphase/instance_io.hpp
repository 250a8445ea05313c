#pragma once

// Plain-text instance files: parameters, the upper-triangle edge list, and
// optionally the ground truth. Doubles are written with max_digits10 so a
// save/load round trip is bit exact.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>

#include "mfphase/core.hpp"
#include "mfphase/model.hpp"

namespace mfphase {

struct LoadedInstance {
  ModelParams params;
  ObservationMatrix obs;
  bool has_truth = false;
  GroundTruth truth;
};

namespace detail {

inline void expect_token(std::istream& in, const std::string& want, const std::string& where) {
  std::string got;
  if (!(in >> got) || got != want)
    throw io_error("instance file: expected '" + want + "' " + where + ", got '" + got + "'");
}

template <typename T>
inline T read_value(std::istream& in, const std::string& what) {
  T v{};
  if (!(in >> v)) throw io_error("instance file: failed to read " + what);
  return v;
}

}  // namespace detail

inline void save_instance(std::ostream& out, const ModelParams& params,
                          const ObservationMatrix& obs, const GroundTruth* truth = nullptr) {
  out << std::setprecision(17);
  out << "mfphase-instance 1\n";
  out << "n " << params.n << "\n";
  out << "m " << params.m << "\n";
  out << "k_max " << params.k_max << "\n";
  out << "mode " << to_string(params.mode) << "\n";
  out << "p " << params.p << "\n";
  out << "q " << params.q << "\n";
  out << "seed " << params.seed << "\n";
  const int e = static_cast<int>(obs.edge_count());
  out << "edges " << e << "\n";
  const bool discrete = obs.mode == AngleMode::Discrete;
  for (int t = 0; t < e; ++t) {
    out << obs.rows[static_cast<std::size_t>(t)] << " " << obs.cols[static_cast<std::size_t>(t)]
        << " ";
    if (discrete)
      out << obs.grid[static_cast<std::size_t>(t)];
    else
      out << obs.angle[static_cast<std::size_t>(t)];
    out << "\n";
  }
  out << "truth " << (truth != nullptr ? 1 : 0) << "\n";
  if (truth != nullptr) {
    out << "assign";
    for (int a : truth->assignment) out << " " << a;
    out << "\n";
    out << "phases";
    if (discrete)
      for (int g : truth->phase_idx) out << " " << g;
    else
      for (double a : truth->phase_rad) out << " " << a;
    out << "\n";
  }
  out << "end\n";
  if (!out) throw io_error("instance file: write failed");
}

inline void save_instance(const std::string& path, const ModelParams& params,
                          const ObservationMatrix& obs, const GroundTruth* truth = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("instance file: cannot open '" + path + "' for writing");
  save_instance(out, params, obs, truth);
}

inline LoadedInstance load_instance(std::istream& in) {
  detail::expect_token(in, "mfphase-instance", "at header");
  const int version = detail::read_value<int>(in, "format version");
  if (version != 1) throw io_error("instance file: unsupported format version");

  LoadedInstance li;
  detail::expect_token(in, "n", "before node count");
  li.params.n = detail::read_value<int>(in, "n");
  detail::expect_token(in, "m", "before cluster count");
  li.params.m = detail::read_value<int>(in, "m");
  detail::expect_token(in, "k_max", "before frequency cutoff");
  li.params.k_max = detail::read_value<int>(in, "k_max");
  detail::expect_token(in, "mode", "before angle mode");
  const auto mode_name = detail::read_value<std::string>(in, "mode");
  if (mode_name == "discrete")
    li.params.mode = AngleMode::Discrete;
  else if (mode_name == "continuous")
    li.params.mode = AngleMode::Continuous;
  else
    throw io_error("instance file: unknown mode '" + mode_name + "'");
  detail::expect_token(in, "p", "before within-cluster probability");
  li.params.p = detail::read_value<double>(in, "p");
  detail::expect_token(in, "q", "before cross-cluster probability");
  li.params.q = detail::read_value<double>(in, "q");
  detail::expect_token(in, "seed", "before seed");
  li.params.seed = detail::read_value<std::uint64_t>(in, "seed");
  li.params.validate();

  const bool discrete = li.params.mode == AngleMode::Discrete;
  const int k = grid_points(li.params.k_max);
  li.obs.n = li.params.n;
  li.obs.mode = li.params.mode;
  li.obs.grid_size = discrete ? k : 0;

  detail::expect_token(in, "edges", "before edge count");
  const int e = detail::read_value<int>(in, "edge count");
  if (e < 0) throw io_error("instance file: negative edge count");
  li.obs.rows.reserve(static_cast<std::size_t>(e));
  li.obs.cols.reserve(static_cast<std::size_t>(e));
  li.obs.angle.reserve(static_cast<std::size_t>(e));
  if (discrete) li.obs.grid.reserve(static_cast<std::size_t>(e));
  for (int t = 0; t < e; ++t) {
    const int i = detail::read_value<int>(in, "edge row");
    const int j = detail::read_value<int>(in, "edge col");
    if (i < 0 || j < 0 || i >= li.params.n || j >= li.params.n || i >= j)
      throw io_error("instance file: edge endpoints must satisfy 0 <= i < j < n");
    li.obs.rows.push_back(i);
    li.obs.cols.push_back(j);
    if (discrete) {
      const int g = detail::read_value<int>(in, "edge grid index");
      if (g < 0 || g >= k) throw io_error("instance file: edge grid index out of range");
      li.obs.grid.push_back(g);
      li.obs.angle.push_back(kTwoPi * g / static_cast<double>(k));
    } else {
      li.obs.angle.push_back(detail::read_value<double>(in, "edge angle"));
    }
  }

  detail::expect_token(in, "truth", "before truth flag");
  const int has_truth = detail::read_value<int>(in, "truth flag");
  if (has_truth != 0 && has_truth != 1) throw io_error("instance file: truth flag must be 0 or 1");
  li.has_truth = has_truth == 1;
  if (li.has_truth) {
    detail::expect_token(in, "assign", "before assignment");
    li.truth.assignment.resize(static_cast<std::size_t>(li.params.n));
    for (int i = 0; i < li.params.n; ++i) {
      const int a = detail::read_value<int>(in, "assignment entry");
      if (a < 0 || a >= li.params.m)
        throw io_error("instance file: assignment entry out of range");
      li.truth.assignment[static_cast<std::size_t>(i)] = a;
    }
    detail::expect_token(in, "phases", "before phases");
    li.truth.phase_rad.resize(static_cast<std::size_t>(li.params.n));
    if (discrete) {
      li.truth.phase_idx.resize(static_cast<std::size_t>(li.params.n));
      for (int i = 0; i < li.params.n; ++i) {
        const int g = detail::read_value<int>(in, "phase grid index");
        if (g < 0 || g >= k) throw io_error("instance file: phase grid index out of range");
        li.truth.phase_idx[static_cast<std::size_t>(i)] = g;
        li.truth.phase_rad[static_cast<std::size_t>(i)] = kTwoPi * g / static_cast<double>(k);
      }
    } else {
      for (int i = 0; i < li.params.n; ++i)
        li.truth.phase_rad[static_cast<std::size_t>(i)] =
            detail::read_value<double>(in, "phase angle");
    }
  }
  detail::expect_token(in, "end", "at trailer");
  return li;
}

inline LoadedInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("instance file: cannot open '" + path + "' for reading");
  return load_instance(in);
}

}  // namespace mfphase

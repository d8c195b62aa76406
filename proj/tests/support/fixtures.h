#pragma once

// Grid generators shared by the unit, property and acceptance tests.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "basinlab/basin.h"
#include "basinlab/grid.h"
#include "basinlab/rng.h"

namespace fixtures {

using basinlab::BasinGrid;
using basinlab::Label;

inline BasinGrid from_rows(const std::vector<std::vector<int>>& rows, int num_labels = 0) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  std::vector<Label> labels;
  int max_label = 0;
  for (const auto& r : rows) {
    for (int v : r) {
      labels.push_back(static_cast<Label>(v));
      if (v != basinlab::kUnresolved) max_label = std::max(max_label, v);
    }
  }
  return BasinGrid(w, h, std::move(labels), num_labels > 0 ? num_labels : max_label + 1);
}

/// Left half label 0, right half label 1 (split after column n/2 - 1).
inline BasinGrid half_plane(int n) {
  std::vector<Label> labels(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) labels[static_cast<std::size_t>(r) * n + c] = c < n / 2 ? 0 : 1;
  }
  return BasinGrid(n, n, std::move(labels), 2);
}

inline BasinGrid checkerboard(int n) {
  std::vector<Label> labels(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) labels[static_cast<std::size_t>(r) * n + c] = static_cast<Label>((r + c) % 2);
  }
  return BasinGrid(n, n, std::move(labels), 2);
}

/// `k` vertical stripes of near-equal width.
inline BasinGrid stripes(int n, int k) {
  std::vector<Label> labels(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) labels[static_cast<std::size_t>(r) * n + c] = static_cast<Label>(c * k / n);
  }
  return BasinGrid(n, n, std::move(labels), k);
}

inline BasinGrid iid_noise(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<Label> labels(static_cast<std::size_t>(n) * n);
  for (auto& l : labels) l = static_cast<Label>(pick(rng));
  return BasinGrid(n, n, std::move(labels), k);
}

/// Voronoi cells of `sites` random points, coloured with `k` labels, with a
/// sinusoidal warp so boundaries are curved. Every label is guaranteed
/// present when sites >= k.
inline BasinGrid voronoi(int w, int h, int k, int sites, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(sites));
  for (auto& p : pts) p = {u(rng) * w, u(rng) * h};
  const double amp = 2.0 + 4.0 * u(rng);
  const double freq = 0.05 + 0.2 * u(rng);
  std::vector<Label> labels(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double x = c + amp * std::sin(freq * r);
      const double y = r + amp * std::cos(freq * c);
      std::size_t best = 0;
      double bd = 1e300;
      for (std::size_t s = 0; s < pts.size(); ++s) {
        const double d = (x - pts[s][0]) * (x - pts[s][0]) + (y - pts[s][1]) * (y - pts[s][1]);
        if (d < bd) {
          bd = d;
          best = s;
        }
      }
      labels[static_cast<std::size_t>(r) * w + c] = static_cast<Label>(best % static_cast<std::size_t>(k));
    }
  }
  return BasinGrid(w, h, std::move(labels), k);
}

/// Random polynomial of degree `degree` with coefficients uniform in [-1, 1]
/// and leading coefficient bounded away from zero.
inline basinlab::NewtonParams random_newton(std::uint64_t seed, int degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  basinlab::NewtonParams p;
  p.coeffs.fill(0.0);
  for (int i = 0; i < degree; ++i) p.coeffs[static_cast<std::size_t>(i)] = u(rng);
  const double lead = 0.5 + 0.5 * std::abs(u(rng));
  p.coeffs[static_cast<std::size_t>(degree)] = u(rng) < 0 ? -lead : lead;
  std::uniform_real_distribution<double> ub(0.6, 1.0);
  p.relaxation = {ub(rng), 0.0};
  return p;
}

/// A genuinely generated basin: relaxed Newton on a random polynomial.
inline BasinGrid newton_basin(std::uint64_t seed, int degree, int n) {
  const auto params = random_newton(seed, degree);
  const basinlab::SystemSpec spec = params;
  basinlab::Region region{-2.0, 2.0, -2.0, 2.0, n};
  return basinlab::compute_basin(spec, region, basinlab::default_config(spec));
}

inline BasinGrid cubic_newton(int n = 333) {
  const basinlab::SystemSpec spec = basinlab::NewtonParams{};
  return basinlab::compute_basin(spec, basinlab::Region{-2.5, 2.5, -2.5, 2.5, n}, basinlab::default_config(spec));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("basinlab_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

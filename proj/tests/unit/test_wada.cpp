#include <doctest.h>

#include <cmath>
#include <random>

#include "basinlab/metrics.h"
#include "fixtures.h"

using namespace basinlab;
using fixtures::from_rows;

namespace {

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (a.bits[i] && !b.bits[i]) return false;
  }
  return true;
}

Mask random_mask(int w, int h, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  Mask m{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  for (auto& b : m.bits) b = on(rng) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("merge_labels") {
  CHECK(merge_labels(from_rows({{0, 1, 2}}), 0, 1) == from_rows({{0, 0, 2}}, 3));
  const auto two = fixtures::stripes(30, 2);
  CHECK(boundary_mask(merge_labels(two, 0, 1)).count() == 0);

  const auto g = fixtures::voronoi(40, 40, 4, 12, 1);
  CHECK(boundary_mask(merge_labels(g, 1, 3)) == boundary_mask(merge_labels(g, 3, 1)));

  try {
    merge_labels(from_rows({{0, 1, 0}}, 3), 0, 2);
    FAIL("absent label accepted");
  } catch (const MetricError& e) {
    CHECK(e.code() == MetricErrorCode::LabelNotFound);
  }
  CHECK_THROWS_AS(merge_labels(g, 1, 1), MetricError);
}

TEST_CASE("fatten") {
  const auto m = random_mask(23, 17, 0.05, 4);
  CHECK(fatten(m, 0) == m);

  Mask dot{7, 7, std::vector<std::uint8_t>(49, 0)};
  dot.bits[3 * 7 + 3] = 1;
  const auto block = fatten(dot, 1);
  CHECK(block.count() == 9);
  for (int r = 2; r <= 4; ++r) {
    for (int c = 2; c <= 4; ++c) CHECK(block.at(r, c));
  }

  Mask line{40, 10, std::vector<std::uint8_t>(400, 0)};
  for (int r = 0; r < 10; ++r) line.bits[static_cast<std::size_t>(r) * 40 + 20] = 1;
  const auto band = fatten(line, 5);
  CHECK(band.count() == 11 * 10);
  Mask edge{40, 10, std::vector<std::uint8_t>(400, 0)};
  for (int r = 0; r < 10; ++r) edge.bits[static_cast<std::size_t>(r) * 40 + 2] = 1;
  CHECK(fatten(edge, 5).count() == 8 * 10);
}

TEST_CASE("property: fatten matches brute force and is monotone in r") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 40);
    const auto m = random_mask(w, h, 0.02 + 0.1 * (trial % 3), rng());
    Mask prev = m;
    for (int r = 0; r <= 7; ++r) {
      const auto f = fatten(m, r);
      CHECK(f == reference::fatten(m, r));
      CHECK(subset(prev, f));
      CHECK(subset(m, f));
      prev = f;
    }
  }
}

TEST_CASE("three vertical stripes are not Wada") {
  const auto g = fixtures::stripes(90, 3);
  const auto report = wada_test(g, WadaConfig{});
  CHECK_FALSE(report.wada);
  CHECK(report.reason == WadaReason::BoundaryChanged);
  CHECK(report.basins == 3);
  REQUIRE(report.pairs.size() == 3);
  // Merging the two outer stripes leaves both interior lines in place.
  for (const auto& p : report.pairs) {
    if (p.a == 0 && p.b == 2) CHECK(p.pass);
    if (p.a == 0 && p.b == 1) {
      CHECK_FALSE(p.pass);
      CHECK(p.original_outside == 2 * 90);
      CHECK(p.merged_outside == 0);
    }
  }
}

TEST_CASE("two basins are too few for Wada") {
  const auto report = wada_test(fixtures::half_plane(50), WadaConfig{});
  CHECK_FALSE(report.wada);
  CHECK(report.reason == WadaReason::TooFewBasins);
  CHECK(report.pairs.empty());

  // Unresolved pixels are not a basin.
  std::vector<Label> labels(100, 0);
  for (int i = 50; i < 75; ++i) labels[static_cast<std::size_t>(i)] = 1;
  for (int i = 75; i < 100; ++i) labels[static_cast<std::size_t>(i)] = kUnresolved;
  CHECK(wada_test(BasinGrid(10, 10, labels, 2), WadaConfig{}).reason == WadaReason::TooFewBasins);
}

TEST_CASE("cubic Newton basin is Wada") {
  const auto g = fixtures::cubic_newton(333);
  const auto report = wada_test(g, WadaConfig{});
  CHECK(report.wada);
  CHECK(report.basins == 3);
  REQUIRE(report.pairs.size() == 3);
  for (const auto& p : report.pairs) {
    CHECK(p.pass);
    CHECK(p.merged_outside == 0);
    CHECK(p.original_outside == 0);
  }
}

TEST_CASE("three sectors meeting at a point are not Wada") {
  // A Y junction: every pair of sectors shares a long private edge.
  const int n = 120;
  std::vector<Label> labels(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double a = std::atan2(r - n / 2.0, c - n / 2.0);
      labels[static_cast<std::size_t>(r) * n + c] = static_cast<Label>(a < -1.0 ? 0 : (a < 1.2 ? 1 : 2));
    }
  }
  CHECK_FALSE(wada_test(BasinGrid(n, n, labels, 3), WadaConfig{}).wada);
}

TEST_CASE("property: a Wada verdict survives a larger fattening radius") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto g = seed < 4 ? fixtures::newton_basin(seed, 3, 96) : fixtures::voronoi(80, 80, 3, 6, seed);
    bool was_wada = false;
    for (int r = 0; r <= 8; ++r) {
      const bool wada = wada_test(g, WadaConfig{r}).wada;
      if (was_wada) CHECK(wada);
      was_wada = wada;
    }
  }
}

TEST_CASE("wada_test is thread-count independent") {
  const auto g = fixtures::newton_basin(3, 5, 128);
  const auto a = wada_test(g, WadaConfig{}, 1);
  const auto b = wada_test(g, WadaConfig{}, 4);
  CHECK(a.wada == b.wada);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].merged_outside == b.pairs[i].merged_outside);
    CHECK(a.pairs[i].original_outside == b.pairs[i].original_outside);
  }
}

#include <doctest.h>

#include <algorithm>
#include <random>

#include "basinlab/grid.h"
#include "fixtures.h"

using namespace basinlab;
using fixtures::from_rows;

namespace {

std::vector<std::size_t> sorted_counts(const BasinGrid& g) {
  auto h = g.histogram();
  std::sort(h.begin(), h.end());
  return h;
}

}  // namespace

TEST_CASE("grid construction enforces its invariants") {
  CHECK_THROWS_AS(BasinGrid(2, 2, {0, 0, 0}, 1), InvalidGrid);
  CHECK_THROWS_AS(BasinGrid(2, 1, {0, 2}, 2), InvalidGrid);
  CHECK_THROWS_AS(BasinGrid(1, 1, {0}, 0), InvalidGrid);
  CHECK_THROWS_AS(BasinGrid(0, 1, {}, 1), InvalidGrid);
  CHECK_NOTHROW(BasinGrid(2, 1, {0, kUnresolved}, 1));

  const BasinGrid g(3, 1, {0, kUnresolved, 1}, 2);
  CHECK(g.distinct_labels() == 2);
  CHECK(g.distinct_colors() == 3);
  CHECK(g.unresolved_count() == 1);
  CHECK(g.unresolved_fraction() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("region validation and pixel centres") {
  CHECK_THROWS_AS((Region{1, 0, 0, 1, 4}.validate()), InvalidGrid);
  CHECK_THROWS_AS((Region{0, 1, 1, 1, 4}.validate()), InvalidGrid);
  CHECK_THROWS_AS((Region{0, 1, 0, 1, 1}.validate()), InvalidGrid);

  const Region r{-2.0, 2.0, -1.0, 3.0, 8};
  CHECK(r.x_at(0) == doctest::Approx(-2.0 + r.dx() / 2));
  CHECK(r.y_at(0) == doctest::Approx(-1.0 + r.dy() / 2));
  CHECK(r.x_at(7) == doctest::Approx(2.0 - r.dx() / 2));
  for (int i = 1; i < 8; ++i) {
    CHECK(r.x_at(i) > r.x_at(i - 1));
    CHECK(r.y_at(i) - r.y_at(i - 1) == doctest::Approx(r.dy()));
  }
}

TEST_CASE("flip_horizontal") {
  CHECK(flip_horizontal(from_rows({{0, 1, 2}})) == from_rows({{2, 1, 0}}));
  const auto u = BasinGrid::uniform(5, 4, 3);
  CHECK(flip_horizontal(u) == u);
  const auto duffing = compute_basin(DuffingParams{0.3, 1.0}, Region{-2, 2, -2, 2, 24},
                                     default_config(DuffingParams{0.3, 1.0}));
  CHECK(flip_horizontal(flip_horizontal(duffing)) == duffing);
}

TEST_CASE("flip_vertical") {
  CHECK(flip_vertical(from_rows({{0}, {1}, {2}})) == from_rows({{2}, {1}, {0}}));
  const auto u = BasinGrid::uniform(3, 6, 1);
  CHECK(flip_vertical(u) == u);
  const auto g = fixtures::voronoi(17, 11, 4, 9, 3);
  CHECK(flip_vertical(flip_vertical(g)) == g);
}

TEST_CASE("relabel") {
  const std::vector<Label> swap{1, 0};
  CHECK(relabel(from_rows({{0, 1, 0}}), swap) == from_rows({{1, 0, 1}}));
  const auto g = fixtures::voronoi(20, 20, 3, 7, 5);
  const std::vector<Label> id{0, 1, 2};
  CHECK(relabel(g, id) == g);
  const std::vector<Label> inv{2, 1, 0};
  CHECK(relabel(relabel(g, inv), inv) == g);

  CHECK_THROWS_AS(relabel(g, std::vector<Label>{0, 0, 1}), InvalidPermutation);
  CHECK_THROWS_AS(relabel(g, std::vector<Label>{0, 1}), InvalidPermutation);
  CHECK_THROWS_AS(relabel(g, std::vector<Label>{0, 1, 3}), InvalidPermutation);

  const BasinGrid with_unresolved(3, 1, {0, kUnresolved, 1}, 2);
  CHECK(relabel(with_unresolved, swap) == BasinGrid(3, 1, {1, kUnresolved, 0}, 2));
}

TEST_CASE("property: flips and relabel preserve shape and label statistics") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 3 + static_cast<int>(rng() % 30);
    const int h = 3 + static_cast<int>(rng() % 30);
    const int k = 1 + static_cast<int>(rng() % 5);
    const auto g = fixtures::voronoi(w, h, k, 2 + static_cast<int>(rng() % 12), rng());
    std::vector<Label> perm(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = static_cast<Label>(i);
    std::shuffle(perm.begin(), perm.end(), rng);

    for (const auto& t : {flip_horizontal(g), flip_vertical(g), relabel(g, perm)}) {
      CHECK(t.width() == g.width());
      CHECK(t.height() == g.height());
      CHECK(t.num_labels() == g.num_labels());
      CHECK(sorted_counts(t) == sorted_counts(g));
    }
    CHECK(flip_horizontal(g).histogram() == g.histogram());
    const auto rh = relabel(g, perm).histogram();
    const auto gh = g.histogram();
    for (int i = 0; i < k; ++i) CHECK(rh[perm[static_cast<std::size_t>(i)]] == gh[static_cast<std::size_t>(i)]);

    CHECK(flip_horizontal(flip_horizontal(g)) == g);
    CHECK(flip_vertical(flip_vertical(g)) == g);
    CHECK(flip_horizontal(flip_vertical(g)) == flip_vertical(flip_horizontal(g)));
  }
}

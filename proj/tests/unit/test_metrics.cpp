#include <doctest.h>

#include <cmath>
#include <random>

#include "basinlab/metrics.h"
#include "fixtures.h"
#include "oracles.h"

using namespace basinlab;
using fixtures::from_rows;

namespace {

MetricErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const MetricError& e) {
    return e.code();
  }
  FAIL("expected a MetricError");
  return MetricErrorCode::InvalidConfig;
}

FDimConfig fdim_config(long boxes, std::uint64_t seed = 0) {
  FDimConfig c;
  c.boxes_per_size = boxes;
  c.seed = seed;
  return c;
}

EntropyConfig entropy(long boxes, std::uint64_t seed = 0) {
  EntropyConfig c;
  c.n_boxes = boxes;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("configuration defaults") {
  const FDimConfig f;
  CHECK(f.sizes() == std::vector<int>{3, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33});
  CHECK(f.boxes_per_size == 350000);
  const EntropyConfig e;
  CHECK(e.box_size == 15);
  CHECK(e.n_boxes == 350000);
  CHECK(WadaConfig{}.fattening_r == 5);

  const auto small = BasinGrid::uniform(20, 20);
  CHECK(code_of([&] { f.validate(small); }) == MetricErrorCode::BoxTooLarge);
  FDimConfig bad;
  bad.eps_min = 1;
  CHECK(code_of([&] { bad.validate(fixtures::half_plane(64)); }) == MetricErrorCode::InvalidConfig);
}

// ---------------------------------------------------------------------------

TEST_CASE("linear_fit") {
  const std::vector<std::pair<double, double>> two{{0, 0}, {1, 1}};
  auto fit = linear_fit(two);
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.points_used == 2);

  const std::vector<std::pair<double, double>> flat{{0, 1}, {1, 1}, {2, 1}};
  CHECK(linear_fit(flat).slope == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> line;
  for (int i = 0; i < 11; ++i) line.emplace_back(i, 2.0 * i + 3.0);
  fit = linear_fit(line);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));

  const std::vector<std::pair<double, double>> one{{1, 1}};
  CHECK(code_of([&] { linear_fit(one); }) == MetricErrorCode::DegenerateFit);
  const std::vector<std::pair<double, double>> vertical{{1, 1}, {1, 2}};
  CHECK(code_of([&] { linear_fit(vertical); }) == MetricErrorCode::DegenerateFit);
}

// ---------------------------------------------------------------------------

TEST_CASE("boundary_mask") {
  CHECK(boundary_mask(BasinGrid::uniform(9, 7)).count() == 0);
  const auto split = fixtures::half_plane(40);
  const auto m = boundary_mask(split);
  CHECK(m.count() == 2 * 40);
  for (int r = 0; r < 40; ++r) {
    CHECK(m.at(r, 19));
    CHECK(m.at(r, 20));
  }
  CHECK(boundary_mask(fixtures::checkerboard(11)).count() == 121);
}

TEST_CASE("sample_box") {
  Xoshiro256 rng(1);
  for (int i = 0; i < 10; ++i) CHECK(sample_box(rng, 15, 15, 15) == Box{0, 0, 15, 15});
  CHECK(code_of([&] { sample_box(rng, 16, 15, 40); }) == MetricErrorCode::BoxTooLarge);

  Xoshiro256 a(77), b(77);
  for (int i = 0; i < 100; ++i) CHECK(sample_box(a, 15, 333, 333) == sample_box(b, 15, 333, 333));
}

TEST_CASE("sample_box corners are uniform over [0, 318]^2") {
  Xoshiro256 rng(2024);
  constexpr int kPositions = 319;
  constexpr int kDraws = 100000;
  std::vector<int> rows(kPositions, 0), cols(kPositions, 0);
  for (int i = 0; i < kDraws; ++i) {
    const Box bx = sample_box(rng, 15, 333, 333);
    REQUIRE(bx.row0 >= 0);
    REQUIRE(bx.row0 <= 318);
    REQUIRE(bx.row1 - bx.row0 == 15);
    REQUIRE(bx.col1 - bx.col0 == 15);
    ++rows[static_cast<std::size_t>(bx.row0)];
    ++cols[static_cast<std::size_t>(bx.col0)];
  }
  const double expected = static_cast<double>(kDraws) / kPositions;
  for (const auto* counts : {&rows, &cols}) {
    double chi2 = 0.0;
    for (int c : *counts) chi2 += (c - expected) * (c - expected) / expected;
    // 318 degrees of freedom: mean 318, sd ~25.2; 99.9% quantile ~ 401.
    CHECK(chi2 < 401.0);
    CHECK(chi2 > 240.0);
  }
}

TEST_CASE("centred boxes cover every start position evenly") {
  Xoshiro256 rng(8);
  CHECK(centered_positions(5, 20) == 20);
  CHECK(centered_positions(6, 20) == 19);
  std::vector<int> seen(20, 0);
  for (int i = 0; i < 20000; ++i) {
    const Box b = sample_centered_box(rng, 5, 20, 20);
    CHECK(b.row0 >= 0);
    CHECK(b.row1 <= 20);
    CHECK(b.row1 - b.row0 >= 3);
    // Undo the clipping: a box cut at the left edge started eps - width early.
    const int start = b.col0 == 0 ? b.col1 - 5 : b.col0;
    ++seen[static_cast<std::size_t>(start + 2)];
  }
  for (int s : seen) CHECK(std::abs(s - 1000) < 5 * std::sqrt(1000.0));
}

// ---------------------------------------------------------------------------

TEST_CASE("box_entropy") {
  const auto u = BasinGrid::uniform(15, 15, 2);
  CHECK(box_entropy(u, {0, 0, 15, 15}) == 0.0);
  const auto split = fixtures::half_plane(20);
  CHECK(box_entropy(split, {0, 5, 10, 15}) == doctest::Approx(std::log(2.0)));

  std::vector<Label> labels(225, 0);
  for (int i = 0; i < 25; ++i) labels[static_cast<std::size_t>(i)] = 1;
  const BasinGrid g(15, 15, labels, 2);
  const double p = 200.0 / 225.0, q = 25.0 / 225.0;
  const double expected = -p * std::log(p) - q * std::log(q);
  CHECK(box_entropy(g, {0, 0, 15, 15}) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(box_entropy(g, {0, 0, 15, 15}) == doctest::Approx(0.3488).epsilon(1e-4));

  const BasinGrid with_unresolved(2, 1, {0, kUnresolved}, 1);
  CHECK(box_entropy(with_unresolved, {0, 0, 1, 2}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("entropy_from_counts is order independent") {
  std::vector<int> a{3, 100, 7, 0, 50};
  std::vector<int> b{50, 0, 7, 100, 3};
  CHECK(entropy_from_counts(a, 160) == entropy_from_counts(b, 160));
}

// ---------------------------------------------------------------------------

TEST_CASE("fractal dimension of a straight boundary") {
  const auto g = fixtures::half_plane(333);
  CHECK(fractal_dimension(g, fdim_config(35000)) == doctest::Approx(1.0).epsilon(0.05));
  const auto exact = exhaustive::estimate_dimension(g, FDimConfig{});
  CHECK(exact.dimension == doctest::Approx(1.0).epsilon(0.01));
  CHECK(exact.dimension == doctest::Approx(oracles::dimension(g)).epsilon(1e-9));
}

TEST_CASE("fractal dimension of a 1-pixel checkerboard") {
  const auto g = fixtures::checkerboard(333);
  const auto est = estimate_dimension(g, fdim_config(20000));
  for (const auto& p : est.curve) CHECK(p.fraction() == 1.0);
  CHECK(est.dimension == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fractal dimension errors") {
  const auto u = BasinGrid::uniform(64, 64);
  CHECK(code_of([&] { fractal_dimension(u, fdim_config(1000)); }) == MetricErrorCode::NoBoundaryDetected);
  std::vector<UncertaintyPoint> one{{3, 10, 100}, {6, 0, 100}};
  CHECK(code_of([&] { dimension_from_curve(one); }) == MetricErrorCode::InsufficientScaling);
}

TEST_CASE("cubic Newton FDim matches a full-tiling oracle within 0.03") {
  const auto g = fixtures::cubic_newton(333);
  const double mc = fractal_dimension(g, fdim_config(350000, 4));
  const double oracle = oracles::dimension(g);
  CHECK(std::abs(mc - oracle) < 0.03);
  CHECK(exhaustive::estimate_dimension(g, FDimConfig{}).dimension == doctest::Approx(oracle).epsilon(1e-9));
}

// ---------------------------------------------------------------------------

TEST_CASE("basin entropy of a uniform grid is exactly zero") {
  const auto u = BasinGrid::uniform(100, 100, 1);
  CHECK(basin_entropy(u, entropy(10000)) == 0.0);
  CHECK(code_of([&] { boundary_basin_entropy(u, entropy(10000)); }) == MetricErrorCode::NoBoundarySampled);
  const auto r = repeat_metric(Estimator::BasinEntropy, u, FDimConfig{}, entropy(5000), 10, 0);
  CHECK(r.mean == 0.0);
  CHECK(r.std == 0.0);
}

TEST_CASE("basin entropy of iid noise matches the binomial expectation") {
  const auto g = fixtures::iid_noise(333, 2, 99);
  const double sb = basin_entropy(g, entropy(350000, 1));
  CHECK(std::abs(sb - oracles::binomial_entropy_expectation(225)) < 0.01);
}

TEST_CASE("half-plane entropies match the straddle enumeration") {
  const int n = 120;
  const auto g = fixtures::half_plane(n);
  const auto oracle = oracles::half_plane_entropy(n, n / 2, 15);
  const auto brute = oracles::entropy_averages(g, 15);
  CHECK(brute.sb == doctest::Approx(oracle.sb).epsilon(1e-12));
  CHECK(brute.sbb == doctest::Approx(oracle.sbb).epsilon(1e-12));

  const auto est = estimate_entropy(g, entropy(350000, 3));
  CHECK(std::abs(est.basin_entropy() - oracle.sb) < 3.0 * est.basin_entropy_stderr());
  CHECK(std::abs(est.boundary_basin_entropy() - oracle.sbb) < 3.0 * est.boundary_basin_entropy_stderr());

  // Straddling offsets k = 1..14 are equally likely, so Sbb is their plain mean.
  double mean_h = 0.0;
  for (int k = 1; k <= 14; ++k) {
    const double p = k / 15.0;
    mean_h += -p * std::log(p) - (1 - p) * std::log(1 - p);
  }
  CHECK(oracle.sbb == doctest::Approx(mean_h / 14.0).epsilon(1e-12));

  const auto exact = exhaustive::estimate_entropy(g, 15);
  CHECK(exact.basin_entropy() == doctest::Approx(oracle.sb).epsilon(1e-12));
  CHECK(exact.boundary_basin_entropy() == doctest::Approx(oracle.sbb).epsilon(1e-12));
}

TEST_CASE("Sbb is at least Sb for the same seed and budget") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = fixtures::voronoi(90, 90, 3, 10, seed);
    const auto est = estimate_entropy(g, entropy(20000, seed));
    CHECK(est.boundary_basin_entropy() >= est.basin_entropy());
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("repeat_metric summarizes with the sample standard deviation") {
  const auto constant = repeat_metric([](std::uint64_t) { return 1.25; }, 10, 0);
  CHECK(constant.mean == 1.25);
  CHECK(constant.std == 0.0);
  CHECK(constant.repeats == 10);
  CHECK(constant.samples.size() == 10);

  std::vector<std::uint64_t> seeds;
  const auto r = repeat_metric(
      [&](std::uint64_t s) {
        seeds.push_back(s);
        return static_cast<double>(s);
      },
      4, 10);
  CHECK(seeds == std::vector<std::uint64_t>{10, 11, 12, 13});
  CHECK(r.mean == doctest::Approx(11.5));
  CHECK(r.std == doctest::Approx(std::sqrt(5.0 / 3.0)));

  CHECK(code_of([] { repeat_metric([](std::uint64_t) { return 0.0; }, 0, 0); }) == MetricErrorCode::InvalidConfig);
  CHECK(code_of([] {
          repeat_metric(
              [](std::uint64_t s) -> double {
                if (s == 3) throw MetricError(MetricErrorCode::NoBoundarySampled, "x");
                return 1.0;
              },
              10, 0);
        }) == MetricErrorCode::NoBoundarySampled);
}

// ---------------------------------------------------------------------------

TEST_CASE("kernels agree bit for bit with the serial references") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = fixtures::voronoi(97, 83, 4, 12, seed);
    const auto cfg = fdim_config(9000 + static_cast<long>(seed) * 1000, seed);
    const auto ref = reference::uncertainty_curve(g, cfg);
    for (int threads : {1, 2, 5}) {
      const auto fast = uncertainty_curve(g, cfg, threads);
      REQUIRE(fast.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(fast[i].eps == ref[i].eps);
        CHECK(fast[i].uncertain == ref[i].uncertain);
        CHECK(fast[i].total == ref[i].total);
      }
    }
    const auto ecfg = entropy(13000, seed);
    const auto eref = reference::estimate_entropy(g, ecfg);
    for (int threads : {1, 3}) {
      const auto efast = estimate_entropy(g, ecfg, threads);
      CHECK(efast.boxes == eref.boxes);
      CHECK(efast.boundary_boxes == eref.boundary_boxes);
      CHECK(efast.entropy_sum == eref.entropy_sum);
      CHECK(efast.entropy_sq_sum == eref.entropy_sq_sum);
    }
  }
}

TEST_CASE("exhaustive curve equals the brute-force oracle") {
  const auto g = fixtures::voronoi(48, 40, 3, 8, 12);
  for (int eps : {2, 3, 7, 12, 33}) {
    CHECK(exhaustive::uncertainty_point(g, eps).fraction() == doctest::Approx(oracles::uncertain_fraction(g, eps)).epsilon(1e-15));
  }
  const auto brute = oracles::entropy_averages(g, 15);
  const auto exact = exhaustive::estimate_entropy(g, 15);
  CHECK(exact.basin_entropy() == doctest::Approx(brute.sb).epsilon(1e-12));
  CHECK(exact.boundary_basin_entropy() == doctest::Approx(brute.sbb).epsilon(1e-12));
}

#include "basinlab/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <omp.h>

namespace basinlab {

namespace {

constexpr std::uint64_t kEntropyStream = 0x5b;
constexpr std::uint64_t dimension_stream(int eps) { return 0xfd000000ULL | static_cast<std::uint64_t>(eps); }

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

long chunk_count(long n) { return (n + kChunkBoxes - 1) / kChunkBoxes; }

// Inclusive-exclusive 2-D prefix sums over a rows x cols table.
class Prefix2D {
 public:
  Prefix2D() = default;
  Prefix2D(int rows, int cols) : rows_(rows), cols_(cols), p_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0) {}

  void build(const std::function<int(int, int)>& value) {
    for (int r = 0; r < rows_; ++r) {
      int run = 0;
      for (int c = 0; c < cols_; ++c) {
        run += value(r, c);
        ref(r + 1, c + 1) = ref(r, c + 1) + run;
      }
    }
  }

  // Sum over [r0, r1) x [c0, c1); empty ranges give 0.
  int sum(int r0, int r1, int c0, int c1) const {
    r1 = std::min(r1, rows_);
    c1 = std::min(c1, cols_);
    if (r1 <= r0 || c1 <= c0) return 0;
    return get(r1, c1) - get(r0, c1) - get(r1, c0) + get(r0, c0);
  }

 private:
  int& ref(int r, int c) { return p_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  int get(int r, int c) const { return p_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }

  int rows_ = 0, cols_ = 0;
  std::vector<int> p_;
};

// A box holds two labels iff some pair of 4-adjacent pixels inside it
// differs. Prefix sums over the horizontal and vertical "differs" tables
// answer that in O(1) per box.
class EdgeTable {
 public:
  explicit EdgeTable(const BasinGrid& g)
      : horizontal_(g.height(), std::max(0, g.width() - 1)), vertical_(std::max(0, g.height() - 1), g.width()) {
    horizontal_.build([&](int r, int c) { return g.at(r, c) != g.at(r, c + 1) ? 1 : 0; });
    vertical_.build([&](int r, int c) { return g.at(r, c) != g.at(r + 1, c) ? 1 : 0; });
  }

  bool mixed(const Box& b) const {
    return horizontal_.sum(b.row0, b.row1, b.col0, b.col1 - 1) + vertical_.sum(b.row0, b.row1 - 1, b.col0, b.col1) > 0;
  }

 private:
  Prefix2D horizontal_;
  Prefix2D vertical_;
};

// Per-colour prefix sums; only colours present in the grid get a table.
class ColorTable {
 public:
  explicit ColorTable(const BasinGrid& g) {
    const auto hist = g.histogram();
    for (int c = 0; c < 256; ++c) {
      if (hist[static_cast<std::size_t>(c)] == 0) continue;
      tables_.emplace_back(g.height(), g.width());
      const auto label = static_cast<Label>(c);
      tables_.back().build([&](int r, int col) { return g.at(r, col) == label ? 1 : 0; });
    }
  }

  double entropy(const Box& b) const {
    std::array<int, 256> counts{};
    std::size_t n = 0;
    for (const auto& t : tables_) {
      const int k = t.sum(b.row0, b.row1, b.col0, b.col1);
      if (k > 0) counts[n++] = k;
    }
    const int total = (b.row1 - b.row0) * (b.col1 - b.col0);
    return entropy_from_counts(std::span(counts.data(), n), total);
  }

 private:
  std::vector<Prefix2D> tables_;
};

struct EntropyPartial {
  long boxes = 0;
  long boundary = 0;
  double sum = 0.0;
  double sq = 0.0;
};

EntropyEstimate reduce(const std::vector<EntropyPartial>& parts) {
  EntropyEstimate e;
  for (const auto& p : parts) {
    e.boxes += p.boxes;
    e.boundary_boxes += p.boundary;
    e.entropy_sum += p.sum;
    e.entropy_sq_sum += p.sq;
  }
  return e;
}

}  // namespace

std::string_view error_name(MetricErrorCode code) {
  switch (code) {
    case MetricErrorCode::NoBoundaryDetected: return "NoBoundaryDetected";
    case MetricErrorCode::InsufficientScaling: return "InsufficientScaling";
    case MetricErrorCode::NoBoundarySampled: return "NoBoundarySampled";
    case MetricErrorCode::BoxTooLarge: return "BoxTooLarge";
    case MetricErrorCode::DegenerateFit: return "DegenerateFit";
    case MetricErrorCode::LabelNotFound: return "LabelNotFound";
    case MetricErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

std::vector<int> FDimConfig::sizes() const {
  std::vector<int> out;
  for (int e = eps_min; e <= eps_max; e += eps_step) out.push_back(e);
  return out;
}

void FDimConfig::validate(const BasinGrid& grid) const {
  if (eps_min < 2 || eps_step < 1 || boxes_per_size < 1 || eps_max < eps_min) {
    throw MetricError(MetricErrorCode::InvalidConfig, "fractal dimension config out of range");
  }
  if (eps_max > std::min(grid.width(), grid.height())) {
    throw MetricError(MetricErrorCode::BoxTooLarge, "eps_max exceeds the grid size");
  }
}

void EntropyConfig::validate(const BasinGrid& grid) const {
  if (box_size < 2 || n_boxes < 1) throw MetricError(MetricErrorCode::InvalidConfig, "entropy config out of range");
  if (box_size > std::min(grid.width(), grid.height())) {
    throw MetricError(MetricErrorCode::BoxTooLarge, "entropy box exceeds the grid size");
  }
}

FitResult linear_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw MetricError(MetricErrorCode::DegenerateFit, "linear fit needs at least two points");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw MetricError(MetricErrorCode::DegenerateFit, "linear fit needs distinct x values");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points_used = static_cast<int>(points.size());
  return fit;
}

Box sample_box(Xoshiro256& rng, int box_size, int width, int height) {
  if (box_size > width || box_size > height || box_size < 1) {
    throw MetricError(MetricErrorCode::BoxTooLarge, "box does not fit inside the grid");
  }
  const auto row = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - box_size + 1)));
  const auto col = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - box_size + 1)));
  return {row, col, row + box_size, col + box_size};
}

int centered_positions(int eps, int n) { return n - eps + 1 + 2 * ((eps - 1) / 2); }

Box sample_centered_box(Xoshiro256& rng, int eps, int width, int height) {
  if (eps > width || eps > height || eps < 1) {
    throw MetricError(MetricErrorCode::BoxTooLarge, "box does not fit inside the grid");
  }
  const int margin = (eps - 1) / 2;
  const int row = static_cast<int>(rng.below(static_cast<std::uint64_t>(centered_positions(eps, height)))) - margin;
  const int col = static_cast<int>(rng.below(static_cast<std::uint64_t>(centered_positions(eps, width)))) - margin;
  return {std::max(row, 0), std::max(col, 0), std::min(row + eps, height), std::min(col + eps, width)};
}

double entropy_from_counts(std::span<int> counts, int total) {
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  const double inv = 1.0 / static_cast<double>(total);
  for (int c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) * inv;
    h -= p * std::log(p);
  }
  return h;
}

double box_entropy(const BasinGrid& grid, const Box& box) {
  std::array<int, 256> hist{};
  for (int r = box.row0; r < box.row1; ++r) {
    for (int c = box.col0; c < box.col1; ++c) ++hist[grid.at(r, c)];
  }
  std::array<int, 256> counts{};
  std::size_t n = 0;
  for (int k : hist) {
    if (k > 0) counts[n++] = k;
  }
  return entropy_from_counts(std::span(counts.data(), n), (box.row1 - box.row0) * (box.col1 - box.col0));
}

// ---------------------------------------------------------------------------

DimensionEstimate dimension_from_curve(std::vector<UncertaintyPoint> curve) {
  DimensionEstimate est;
  est.curve = std::move(curve);
  std::vector<std::pair<double, double>> points;
  for (const auto& p : est.curve) {
    if (p.uncertain > 0) points.emplace_back(std::log(static_cast<double>(p.eps - 1)), std::log(p.fraction()));
  }
  if (points.empty()) throw MetricError(MetricErrorCode::NoBoundaryDetected, "no uncertain box at any size");
  if (points.size() < 2) throw MetricError(MetricErrorCode::InsufficientScaling, "fewer than two sizes with f > 0");
  est.fit = linear_fit(points);
  est.dimension = kPhaseSpaceDim - est.fit.slope;
  return est;
}

std::vector<UncertaintyPoint> uncertainty_curve(const BasinGrid& grid, const FDimConfig& cfg, int threads) {
  cfg.validate(grid);
  const EdgeTable edges(grid);
  const auto sizes = cfg.sizes();
  const long chunks = chunk_count(cfg.boxes_per_size);
  const long tasks = chunks * static_cast<long>(sizes.size());
  std::vector<long> uncertain(static_cast<std::size_t>(tasks), 0);

#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_threads(threads))
  for (long t = 0; t < tasks; ++t) {
    const int eps = sizes[static_cast<std::size_t>(t / chunks)];
    const long c = t % chunks;
    const long n = std::min(kChunkBoxes, cfg.boxes_per_size - c * kChunkBoxes);
    Xoshiro256 rng(derive_seed(cfg.seed, dimension_stream(eps), static_cast<std::uint64_t>(c)));
    long hits = 0;
    for (long i = 0; i < n; ++i) hits += edges.mixed(sample_centered_box(rng, eps, grid.width(), grid.height()));
    uncertain[static_cast<std::size_t>(t)] = hits;
  }

  std::vector<UncertaintyPoint> curve;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    UncertaintyPoint p{sizes[s], 0, cfg.boxes_per_size};
    for (long c = 0; c < chunks; ++c) p.uncertain += uncertain[s * static_cast<std::size_t>(chunks) + c];
    curve.push_back(p);
  }
  return curve;
}

DimensionEstimate estimate_dimension(const BasinGrid& grid, const FDimConfig& cfg, int threads) {
  return dimension_from_curve(uncertainty_curve(grid, cfg, threads));
}

double fractal_dimension(const BasinGrid& grid, const FDimConfig& cfg, int threads) {
  return estimate_dimension(grid, cfg, threads).dimension;
}

// ---------------------------------------------------------------------------

double EntropyEstimate::basin_entropy() const {
  return boxes > 0 ? entropy_sum / static_cast<double>(boxes) : 0.0;
}

double EntropyEstimate::boundary_basin_entropy() const {
  if (boundary_boxes == 0) throw MetricError(MetricErrorCode::NoBoundarySampled, "no sampled box straddles a boundary");
  return entropy_sum / static_cast<double>(boundary_boxes);
}

namespace {
double stderr_of(double sum, double sq, long n) {
  if (n < 2) return 0.0;
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  const double var = std::max(0.0, (sq - nd * mean * mean) / (nd - 1.0));
  return std::sqrt(var / nd);
}
}  // namespace

double EntropyEstimate::basin_entropy_stderr() const { return stderr_of(entropy_sum, entropy_sq_sum, boxes); }

double EntropyEstimate::boundary_basin_entropy_stderr() const {
  return stderr_of(entropy_sum, entropy_sq_sum, boundary_boxes);
}

EntropyEstimate estimate_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads) {
  cfg.validate(grid);
  const ColorTable colors(grid);
  const long chunks = chunk_count(cfg.n_boxes);
  std::vector<EntropyPartial> parts(static_cast<std::size_t>(chunks));

#pragma omp parallel for schedule(dynamic, 2) num_threads(resolve_threads(threads))
  for (long c = 0; c < chunks; ++c) {
    const long n = std::min(kChunkBoxes, cfg.n_boxes - c * kChunkBoxes);
    Xoshiro256 rng(derive_seed(cfg.seed, kEntropyStream, static_cast<std::uint64_t>(c)));
    EntropyPartial part;
    for (long i = 0; i < n; ++i) {
      const double h = colors.entropy(sample_box(rng, cfg.box_size, grid.width(), grid.height()));
      ++part.boxes;
      if (h > 0.0) ++part.boundary;
      part.sum += h;
      part.sq += h * h;
    }
    parts[static_cast<std::size_t>(c)] = part;
  }
  return reduce(parts);
}

double basin_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads) {
  return estimate_entropy(grid, cfg, threads).basin_entropy();
}

double boundary_basin_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads) {
  return estimate_entropy(grid, cfg, threads).boundary_basin_entropy();
}

// ---------------------------------------------------------------------------

namespace exhaustive {

UncertaintyPoint uncertainty_point(const BasinGrid& grid, int eps) {
  if (eps > grid.width() || eps > grid.height() || eps < 2) {
    throw MetricError(MetricErrorCode::BoxTooLarge, "box does not fit inside the grid");
  }
  const EdgeTable edges(grid);
  const int margin = (eps - 1) / 2;
  const int rows = centered_positions(eps, grid.height());
  const int cols = centered_positions(eps, grid.width());
  UncertaintyPoint p{eps, 0, static_cast<long>(rows) * cols};
  for (int i = 0; i < rows; ++i) {
    const int r = i - margin;
    for (int j = 0; j < cols; ++j) {
      const int c = j - margin;
      p.uncertain += edges.mixed(
          {std::max(r, 0), std::max(c, 0), std::min(r + eps, grid.height()), std::min(c + eps, grid.width())});
    }
  }
  return p;
}

DimensionEstimate estimate_dimension(const BasinGrid& grid, const FDimConfig& cfg) {
  cfg.validate(grid);
  std::vector<UncertaintyPoint> curve;
  for (int eps : cfg.sizes()) curve.push_back(uncertainty_point(grid, eps));
  return dimension_from_curve(std::move(curve));
}

EntropyEstimate estimate_entropy(const BasinGrid& grid, int box_size) {
  EntropyConfig probe;
  probe.box_size = box_size;
  probe.validate(grid);
  const ColorTable colors(grid);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.width() - box_size + 1) * (grid.height() - box_size + 1));
  for (int r = 0; r + box_size <= grid.height(); ++r) {
    for (int c = 0; c + box_size <= grid.width(); ++c) values.push_back(colors.entropy({r, c, r + box_size, c + box_size}));
  }
  // Summing in sorted order makes the result a function of the multiset of
  // box entropies, hence exactly invariant under flips and relabelling.
  std::sort(values.begin(), values.end());
  EntropyEstimate e;
  for (double h : values) {
    ++e.boxes;
    if (h > 0.0) ++e.boundary_boxes;
    e.entropy_sum += h;
    e.entropy_sq_sum += h * h;
  }
  return e;
}

}  // namespace exhaustive

// ---------------------------------------------------------------------------

MetricResult repeat_metric(const std::function<double(std::uint64_t)>& estimator, int repeats,
                           std::uint64_t base_seed) {
  if (repeats < 1) throw MetricError(MetricErrorCode::InvalidConfig, "repeats must be >= 1");
  MetricResult result;
  result.repeats = repeats;
  for (int k = 0; k < repeats; ++k) result.samples.push_back(estimator(base_seed + static_cast<std::uint64_t>(k)));
  double sum = 0.0;
  for (double v : result.samples) sum += v;
  result.mean = sum / repeats;
  if (repeats > 1) {
    double ss = 0.0;
    for (double v : result.samples) ss += (v - result.mean) * (v - result.mean);
    result.std = std::sqrt(ss / (repeats - 1));
  }
  return result;
}

MetricResult repeat_metric(Estimator estimator, const BasinGrid& grid, const FDimConfig& fdim,
                           const EntropyConfig& entropy, int repeats, std::uint64_t base_seed, int threads) {
  switch (estimator) {
    case Estimator::FractalDimension:
      return repeat_metric(
          [&](std::uint64_t seed) {
            FDimConfig c = fdim;
            c.seed = seed;
            return fractal_dimension(grid, c, threads);
          },
          repeats, base_seed);
    case Estimator::BasinEntropy:
      return repeat_metric(
          [&](std::uint64_t seed) {
            EntropyConfig c = entropy;
            c.seed = seed;
            return basin_entropy(grid, c, threads);
          },
          repeats, base_seed);
    case Estimator::BoundaryBasinEntropy:
      return repeat_metric(
          [&](std::uint64_t seed) {
            EntropyConfig c = entropy;
            c.seed = seed;
            return boundary_basin_entropy(grid, c, threads);
          },
          repeats, base_seed);
  }
  throw MetricError(MetricErrorCode::InvalidConfig, "unknown estimator");
}

// ---------------------------------------------------------------------------

namespace reference {

std::vector<UncertaintyPoint> uncertainty_curve(const BasinGrid& grid, const FDimConfig& cfg) {
  cfg.validate(grid);
  std::vector<UncertaintyPoint> curve;
  for (int eps : cfg.sizes()) {
    UncertaintyPoint p{eps, 0, cfg.boxes_per_size};
    const long chunks = chunk_count(cfg.boxes_per_size);
    for (long c = 0; c < chunks; ++c) {
      const long n = std::min(kChunkBoxes, cfg.boxes_per_size - c * kChunkBoxes);
      Xoshiro256 rng(derive_seed(cfg.seed, dimension_stream(eps), static_cast<std::uint64_t>(c)));
      for (long i = 0; i < n; ++i) {
        const Box b = sample_centered_box(rng, eps, grid.width(), grid.height());
        const Label first = grid.at(b.row0, b.col0);
        bool mixed = false;
        for (int r = b.row0; r < b.row1 && !mixed; ++r) {
          for (int col = b.col0; col < b.col1 && !mixed; ++col) mixed = grid.at(r, col) != first;
        }
        p.uncertain += mixed;
      }
    }
    curve.push_back(p);
  }
  return curve;
}

EntropyEstimate estimate_entropy(const BasinGrid& grid, const EntropyConfig& cfg) {
  cfg.validate(grid);
  const long chunks = chunk_count(cfg.n_boxes);
  std::vector<EntropyPartial> parts;
  for (long c = 0; c < chunks; ++c) {
    const long n = std::min(kChunkBoxes, cfg.n_boxes - c * kChunkBoxes);
    Xoshiro256 rng(derive_seed(cfg.seed, kEntropyStream, static_cast<std::uint64_t>(c)));
    EntropyPartial part;
    for (long i = 0; i < n; ++i) {
      const double h = box_entropy(grid, sample_box(rng, cfg.box_size, grid.width(), grid.height()));
      ++part.boxes;
      if (h > 0.0) ++part.boundary;
      part.sum += h;
      part.sq += h * h;
    }
    parts.push_back(part);
  }
  return reduce(parts);
}

}  // namespace reference

}  // namespace basinlab

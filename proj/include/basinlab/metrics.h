#pragma once

// Monte Carlo characterization of basin grids: uncertainty (box-counting)
// dimension, basin entropy, boundary basin entropy, and the merging test for
// Wada boundaries.
//
// Every Monte Carlo estimator draws its boxes from fixed chunks of
// kChunkBoxes, chunk c seeded with derive_seed(seed, stream, c). Partial sums
// are reduced in chunk order, so results depend on the seed only, never on the
// number of threads.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "basinlab/grid.h"
#include "basinlab/rng.h"

namespace basinlab {

inline constexpr long kChunkBoxes = 4096;

enum class MetricErrorCode {
  NoBoundaryDetected,
  InsufficientScaling,
  NoBoundarySampled,
  BoxTooLarge,
  DegenerateFit,
  LabelNotFound,
  InvalidConfig,
};

std::string_view error_name(MetricErrorCode code);

class MetricError : public std::runtime_error {
 public:
  MetricError(MetricErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  MetricErrorCode code() const { return code_; }

 private:
  MetricErrorCode code_;
};

struct FDimConfig {
  int eps_min = 3;
  int eps_max = 33;
  int eps_step = 3;
  long boxes_per_size = 350000;
  std::uint64_t seed = 0;

  std::vector<int> sizes() const;
  void validate(const BasinGrid& grid) const;
};

struct EntropyConfig {
  int box_size = 15;
  long n_boxes = 350000;
  std::uint64_t seed = 0;

  void validate(const BasinGrid& grid) const;
};

struct WadaConfig {
  int fattening_r = 5;
};

struct MetricResult {
  double mean = 0.0;
  double std = 0.0;
  int repeats = 0;
  std::vector<double> samples;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
};

/// Ordinary least squares. Throws DegenerateFit for < 2 points or constant x.
FitResult linear_fit(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

/// Half-open pixel rectangle [row0, row1) x [col0, col1).
struct Box {
  int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
  bool operator==(const Box&) const = default;
};

/// Top-left corner uniform over every position that keeps a box_size square
/// fully inside a width x height grid. Throws BoxTooLarge.
Box sample_box(Xoshiro256& rng, int box_size, int width, int height);

/// Box for the uncertainty-dimension estimator: start uniform over
/// [-m, n - eps + m] per axis with m = (eps-1)/2, clipped to the grid. Every
/// pixel is equally likely to be the box centre, and the start range is
/// mirror-symmetric, so edge regions are neither under- nor over-sampled.
Box sample_centered_box(Xoshiro256& rng, int eps, int width, int height);
/// Number of start positions per axis used by sample_centered_box.
int centered_positions(int eps, int n);

/// Gibbs entropy -sum p ln p of the label proportions inside `box`
/// (kUnresolved counts as an ordinary colour).
double box_entropy(const BasinGrid& grid, const Box& box);

/// Entropy from raw colour counts; terms summed in ascending count order so
/// the value depends only on the multiset of counts.
double entropy_from_counts(std::span<int> counts, int total);

// ---------------------------------------------------------------------------
// Uncertainty dimension
// ---------------------------------------------------------------------------

struct UncertaintyPoint {
  int eps = 0;
  long uncertain = 0;
  long total = 0;
  double fraction() const { return total > 0 ? static_cast<double>(uncertain) / static_cast<double>(total) : 0.0; }
};

struct DimensionEstimate {
  std::vector<UncertaintyPoint> curve;
  FitResult fit;
  double dimension = 0.0;
};

/// Phase-space dimension of the basin images.
inline constexpr double kPhaseSpaceDim = 2.0;

/// Fits log f(eps) against log(eps - 1), the geometric side of an eps-pixel
/// box, over sizes with f > 0; dimension = 2 - slope.
DimensionEstimate dimension_from_curve(std::vector<UncertaintyPoint> curve);

/// Monte Carlo f(eps) for every configured size.
std::vector<UncertaintyPoint> uncertainty_curve(const BasinGrid& grid, const FDimConfig& cfg, int threads = 0);
DimensionEstimate estimate_dimension(const BasinGrid& grid, const FDimConfig& cfg, int threads = 0);
double fractal_dimension(const BasinGrid& grid, const FDimConfig& cfg, int threads = 0);

// ---------------------------------------------------------------------------
// Entropies
// ---------------------------------------------------------------------------

struct EntropyEstimate {
  long boxes = 0;
  long boundary_boxes = 0;
  double entropy_sum = 0.0;
  double entropy_sq_sum = 0.0;

  double basin_entropy() const;
  double boundary_basin_entropy() const;  // throws NoBoundarySampled
  double basin_entropy_stderr() const;
  double boundary_basin_entropy_stderr() const;
};

/// One pass over n_boxes random boxes serving both Sb and Sbb; single-label
/// boxes contribute zero entropy, so Sbb = sum / boundary_boxes >= Sb.
EntropyEstimate estimate_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads = 0);
double basin_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads = 0);
double boundary_basin_entropy(const BasinGrid& grid, const EntropyConfig& cfg, int threads = 0);

// ---------------------------------------------------------------------------
// Exhaustive counterparts: every box position once, no sampling noise.
// ---------------------------------------------------------------------------

namespace exhaustive {

UncertaintyPoint uncertainty_point(const BasinGrid& grid, int eps);
DimensionEstimate estimate_dimension(const BasinGrid& grid, const FDimConfig& cfg);
EntropyEstimate estimate_entropy(const BasinGrid& grid, int box_size);

}  // namespace exhaustive

// ---------------------------------------------------------------------------
// Repeats
// ---------------------------------------------------------------------------

/// Runs `estimator(base_seed + k)` for k = 0..repeats-1 and summarizes with
/// the mean and the sample standard deviation. Errors propagate.
MetricResult repeat_metric(const std::function<double(std::uint64_t)>& estimator, int repeats,
                           std::uint64_t base_seed);

enum class Estimator { FractalDimension, BasinEntropy, BoundaryBasinEntropy };

MetricResult repeat_metric(Estimator estimator, const BasinGrid& grid, const FDimConfig& fdim,
                           const EntropyConfig& entropy, int repeats, std::uint64_t base_seed, int threads = 0);

// ---------------------------------------------------------------------------
// Boundaries and the merging test
// ---------------------------------------------------------------------------

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;
};

/// True where any 4-neighbour inside the grid carries a different label.
Mask boundary_mask(const BasinGrid& grid);

/// Dilation by the Chebyshev ball of radius r.
Mask fatten(const Mask& mask, int r);

/// Relabels every pixel of label_b as label_a. Throws LabelNotFound when either
/// label is absent or they coincide. The label space is left as is.
BasinGrid merge_labels(const BasinGrid& grid, Label label_a, Label label_b);

enum class WadaReason { None, TooFewBasins, BoundaryChanged };

struct WadaPair {
  Label a = 0;
  Label b = 0;
  bool pass = false;
  // Pixels of the merged boundary outside the fattened original, and pixels
  // of the original boundary outside the fattened merged one.
  std::size_t merged_outside = 0;
  std::size_t original_outside = 0;
};

struct WadaReport {
  bool wada = false;
  WadaReason reason = WadaReason::None;
  int basins = 0;
  std::size_t boundary_pixels = 0;
  std::vector<WadaPair> pairs;
};

std::string_view reason_name(WadaReason reason);

/// Merging test over every unordered pair of present labels (kUnresolved is
/// not a basin and never merged). Pair (i, j) passes iff the merged boundary
/// and the original boundary each lie inside the other's r-fattening.
WadaReport wada_test(const BasinGrid& grid, const WadaConfig& cfg, int threads = 0);

namespace reference {

// Pixel-scanning versions of the Monte Carlo kernels: same box streams, same
// reduction order, no prefix sums, no threads.
std::vector<UncertaintyPoint> uncertainty_curve(const BasinGrid& grid, const FDimConfig& cfg);
EntropyEstimate estimate_entropy(const BasinGrid& grid, const EntropyConfig& cfg);
Mask fatten(const Mask& mask, int r);

}  // namespace reference

}  // namespace basinlab

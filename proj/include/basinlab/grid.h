#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace basinlab {

using Label = std::uint8_t;

// Reserved id for trajectories that never classified. Fits the 8-bit image
// encoding and never collides with real attractor ids.
inline constexpr Label kUnresolved = 255;

class InvalidGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPermutation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Phase-space rectangle discretized at `resolution` pixels per axis.
struct Region {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
  int resolution = 2;

  void validate() const;

  double dx() const { return (x_max - x_min) / resolution; }
  double dy() const { return (y_max - y_min) / resolution; }

  // Cell centre of pixel (row, col). Row 0 is y_min, column 0 is x_min.
  double x_at(int col) const { return x_min + (col + 0.5) * dx(); }
  double y_at(int row) const { return y_min + (row + 0.5) * dy(); }

  bool operator==(const Region&) const = default;
};

/// Rectangular row-major grid of attractor labels.
///
/// `num_labels` bounds the label space: every pixel is either < num_labels or
/// kUnresolved. For catalog systems (roots, magnets, exits) it is the catalog
/// size, so a tile can legitimately miss some ids; use distinct_labels() for
/// the number actually present.
class BasinGrid {
 public:
  BasinGrid() = default;
  BasinGrid(int width, int height, std::vector<Label> labels, int num_labels, Region region = {});

  static BasinGrid uniform(int width, int height, Label value = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_labels() const { return num_labels_; }
  const Region& region() const { return region_; }
  std::span<const Label> labels() const { return labels_; }

  Label at(int row, int col) const { return labels_[static_cast<std::size_t>(row) * width_ + col]; }
  std::size_t size() const { return labels_.size(); }

  /// Distinct attractor ids present, unresolved excluded.
  int distinct_labels() const;
  /// Distinct colours present, unresolved included.
  int distinct_colors() const;
  std::size_t unresolved_count() const;
  double unresolved_fraction() const;
  /// Pixel count per id, indexed 0..255.
  std::vector<std::size_t> histogram() const;

  bool operator==(const BasinGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int num_labels_ = 1;
  std::vector<Label> labels_;
  Region region_;
};

BasinGrid flip_horizontal(const BasinGrid& grid);
BasinGrid flip_vertical(const BasinGrid& grid);

/// `permutation[i]` is the image of label i; must be a bijection on
/// 0..num_labels-1. kUnresolved is fixed.
BasinGrid relabel(const BasinGrid& grid, std::span<const Label> permutation);

}  // namespace basinlab

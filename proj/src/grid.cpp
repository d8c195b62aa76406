#include "basinlab/grid.h"

#include <algorithm>
#include <array>
#include <utility>

namespace basinlab {

void Region::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw InvalidGrid("region bounds must satisfy min < max");
  }
  if (resolution < 2) {
    throw InvalidGrid("region resolution must be >= 2");
  }
}

BasinGrid::BasinGrid(int width, int height, std::vector<Label> labels, int num_labels, Region region)
    : width_(width), height_(height), num_labels_(num_labels), labels_(std::move(labels)), region_(region) {
  if (width <= 0 || height <= 0) {
    throw InvalidGrid("grid dimensions must be positive");
  }
  if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidGrid("label count does not match width x height");
  }
  if (num_labels < 1 || num_labels > kUnresolved) {
    throw InvalidGrid("num_labels must lie in [1, 255]");
  }
  for (Label l : labels_) {
    if (l >= num_labels && l != kUnresolved) {
      throw InvalidGrid("label " + std::to_string(l) + " outside label space of size " + std::to_string(num_labels));
    }
  }
}

BasinGrid BasinGrid::uniform(int width, int height, Label value) {
  std::vector<Label> labels(static_cast<std::size_t>(width) * height, value);
  int n = value == kUnresolved ? 1 : value + 1;
  return BasinGrid(width, height, std::move(labels), n);
}

std::vector<std::size_t> BasinGrid::histogram() const {
  std::vector<std::size_t> h(256, 0);
  for (Label l : labels_) ++h[l];
  return h;
}

int BasinGrid::distinct_labels() const {
  auto h = histogram();
  return static_cast<int>(std::count_if(h.begin(), h.end() - 1, [](std::size_t c) { return c > 0; }));
}

int BasinGrid::distinct_colors() const {
  auto h = histogram();
  return static_cast<int>(std::count_if(h.begin(), h.end(), [](std::size_t c) { return c > 0; }));
}

std::size_t BasinGrid::unresolved_count() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), kUnresolved));
}

double BasinGrid::unresolved_fraction() const {
  return labels_.empty() ? 0.0 : static_cast<double>(unresolved_count()) / static_cast<double>(labels_.size());
}

BasinGrid flip_horizontal(const BasinGrid& grid) {
  std::vector<Label> out(grid.labels().begin(), grid.labels().end());
  const auto w = static_cast<std::size_t>(grid.width());
  for (int r = 0; r < grid.height(); ++r) {
    auto row = out.begin() + static_cast<std::ptrdiff_t>(r * w);
    std::reverse(row, row + static_cast<std::ptrdiff_t>(w));
  }
  return BasinGrid(grid.width(), grid.height(), std::move(out), grid.num_labels(), grid.region());
}

BasinGrid flip_vertical(const BasinGrid& grid) {
  std::vector<Label> out(grid.size());
  const auto w = static_cast<std::size_t>(grid.width());
  const auto src = grid.labels();
  for (int r = 0; r < grid.height(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                out.begin() + static_cast<std::ptrdiff_t>((grid.height() - 1 - r) * w));
  }
  return BasinGrid(grid.width(), grid.height(), std::move(out), grid.num_labels(), grid.region());
}

BasinGrid relabel(const BasinGrid& grid, std::span<const Label> permutation) {
  const auto n = static_cast<std::size_t>(grid.num_labels());
  if (permutation.size() != n) {
    throw InvalidPermutation("permutation size must equal num_labels");
  }
  std::array<bool, 256> seen{};
  for (Label p : permutation) {
    if (p >= n || seen[p]) throw InvalidPermutation("permutation is not a bijection on 0..num_labels-1");
    seen[p] = true;
  }
  std::array<Label, 256> map{};
  for (std::size_t i = 0; i < 256; ++i) map[i] = static_cast<Label>(i);
  for (std::size_t i = 0; i < n; ++i) map[i] = permutation[i];
  map[kUnresolved] = kUnresolved;

  std::vector<Label> out(grid.size());
  std::transform(grid.labels().begin(), grid.labels().end(), out.begin(), [&](Label l) { return map[l]; });
  return BasinGrid(grid.width(), grid.height(), std::move(out), grid.num_labels(), grid.region());
}

}  // namespace basinlab

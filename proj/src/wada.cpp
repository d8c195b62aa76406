#include <algorithm>
#include <array>
#include <omp.h>

#include "basinlab/metrics.h"

namespace basinlab {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::string_view reason_name(WadaReason reason) {
  switch (reason) {
    case WadaReason::None: return "None";
    case WadaReason::TooFewBasins: return "TooFewBasins";
    case WadaReason::BoundaryChanged: return "BoundaryChanged";
  }
  return "Unknown";
}

Mask boundary_mask(const BasinGrid& grid) {
  const int w = grid.width(), h = grid.height();
  Mask m{w, h, std::vector<std::uint8_t>(grid.size(), 0)};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Label l = grid.at(r, c);
      const bool edge = (c > 0 && grid.at(r, c - 1) != l) || (c + 1 < w && grid.at(r, c + 1) != l) ||
                        (r > 0 && grid.at(r - 1, c) != l) || (r + 1 < h && grid.at(r + 1, c) != l);
      m.bits[static_cast<std::size_t>(r) * w + c] = edge ? 1 : 0;
    }
  }
  return m;
}

namespace {

// out[i] = any(in[i-r .. i+r]) along one line, via a running count.
void dilate_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int r) {
  int window = 0;
  for (int i = 0; i < std::min(r, n); ++i) window += in[i * stride];
  for (int i = 0; i < n; ++i) {
    if (i + r < n) window += in[(i + r) * stride];
    if (i - r - 1 >= 0) window -= in[(i - r - 1) * stride];
    out[i * stride] = window > 0 ? 1 : 0;
  }
}

}  // namespace

// The Chebyshev ball is a square, so the dilation separates into a row pass
// and a column pass.
Mask fatten(const Mask& mask, int r) {
  if (r < 0) throw MetricError(MetricErrorCode::InvalidConfig, "fattening radius must be >= 0");
  if (r == 0) return mask;
  Mask tmp{mask.width, mask.height, std::vector<std::uint8_t>(mask.bits.size(), 0)};
  Mask out = tmp;
  for (int row = 0; row < mask.height; ++row) {
    const auto off = static_cast<std::size_t>(row) * mask.width;
    dilate_line(mask.bits.data() + off, tmp.bits.data() + off, mask.width, 1, r);
  }
  for (int col = 0; col < mask.width; ++col) {
    dilate_line(tmp.bits.data() + col, out.bits.data() + col, mask.height, mask.width, r);
  }
  return out;
}

BasinGrid merge_labels(const BasinGrid& grid, Label label_a, Label label_b) {
  if (label_a == label_b) throw MetricError(MetricErrorCode::InvalidConfig, "cannot merge a label with itself");
  const auto hist = grid.histogram();
  if (hist[label_a] == 0 || hist[label_b] == 0) {
    throw MetricError(MetricErrorCode::LabelNotFound, "merge_labels: label not present in grid");
  }
  std::vector<Label> out(grid.labels().begin(), grid.labels().end());
  std::replace(out.begin(), out.end(), label_b, label_a);
  return BasinGrid(grid.width(), grid.height(), std::move(out), grid.num_labels(), grid.region());
}

namespace {

// Pixels set in `a` but not in `b`.
std::size_t outside(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) n += a.bits[i] && !b.bits[i];
  return n;
}

}  // namespace

WadaReport wada_test(const BasinGrid& grid, const WadaConfig& cfg, int threads) {
  if (cfg.fattening_r < 0) throw MetricError(MetricErrorCode::InvalidConfig, "fattening radius must be >= 0");
  WadaReport report;
  const auto hist = grid.histogram();
  std::vector<Label> present;
  for (int l = 0; l < kUnresolved; ++l) {
    if (hist[static_cast<std::size_t>(l)] > 0) present.push_back(static_cast<Label>(l));
  }
  report.basins = static_cast<int>(present.size());
  const Mask boundary = boundary_mask(grid);
  report.boundary_pixels = boundary.count();
  if (present.size() < 3) {
    report.reason = WadaReason::TooFewBasins;
    return report;
  }
  const Mask fat_boundary = fatten(boundary, cfg.fattening_r);

  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) report.pairs.push_back({present[i], present[j]});
  }
  const auto npairs = static_cast<long>(report.pairs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (long p = 0; p < npairs; ++p) {
    auto& pair = report.pairs[static_cast<std::size_t>(p)];
    const Mask merged = boundary_mask(merge_labels(grid, pair.a, pair.b));
    pair.merged_outside = outside(merged, fat_boundary);
    pair.original_outside = outside(boundary, fatten(merged, cfg.fattening_r));
    pair.pass = pair.merged_outside == 0 && pair.original_outside == 0;
  }
  report.wada = std::all_of(report.pairs.begin(), report.pairs.end(), [](const WadaPair& p) { return p.pass; });
  report.reason = report.wada ? WadaReason::None : WadaReason::BoundaryChanged;
  return report;
}

namespace reference {

Mask fatten(const Mask& mask, int r) {
  Mask out{mask.width, mask.height, std::vector<std::uint8_t>(mask.bits.size(), 0)};
  for (int row = 0; row < mask.height; ++row) {
    for (int col = 0; col < mask.width; ++col) {
      bool hit = false;
      for (int dr = -r; dr <= r && !hit; ++dr) {
        for (int dc = -r; dc <= r && !hit; ++dc) {
          const int rr = row + dr, cc = col + dc;
          hit = rr >= 0 && rr < mask.height && cc >= 0 && cc < mask.width && mask.at(rr, cc);
        }
      }
      out.bits[static_cast<std::size_t>(row) * mask.width + col] = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace reference

}  // namespace basinlab

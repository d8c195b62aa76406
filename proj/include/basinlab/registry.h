#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "basinlab/grid.h"
#include "basinlab/systems.h"

namespace basinlab {

/// Growing catalog of attractors discovered on the stroboscopic section.
///
/// Signatures are fed in row-major pixel order. Periodic orbits match an entry
/// when every point lies within match_tol of one of the entry's points.
/// Aperiodic (cloud) signatures are binned into square cells of side match_tol;
/// a cloud joins every cloud entry it shares a cell with, merging them.
/// finalize() collapses merged entries and numbers the survivors by first
/// occurrence, so entry index == label id.
class AttractorRegistry {
 public:
  AttractorRegistry(double match_tol, bool periodic_x);

  /// Returns a provisional id, or -1 for unresolved signatures.
  int assign(const DrivenSignature& sig);

  /// Maps provisional ids to labels numbered by first appearance in
  /// `provisional` (row-major order). Ids past 254 become kUnresolved.
  std::vector<Label> finalize(const std::vector<int>& provisional);

  std::size_t provisional_count() const { return parent_.size(); }

  double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) const;

 private:
  int find(int i);
  int unite(int a, int b);
  std::uint64_t cell_key(const std::array<double, 2>& p) const;

  struct Entry {
    bool cycle = false;
    std::vector<std::array<double, 2>> points;
  };

  double match_tol_;
  bool periodic_x_;
  std::vector<Entry> entries_;
  std::vector<int> parent_;
  std::unordered_map<std::uint64_t, int> cells_;
};

}  // namespace basinlab

#include "basinlab/registry.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace basinlab {

AttractorRegistry::AttractorRegistry(double match_tol, bool periodic_x)
    : match_tol_(match_tol), periodic_x_(periodic_x) {}

double AttractorRegistry::distance(const std::array<double, 2>& a, const std::array<double, 2>& b) const {
  double dx = a[0] - b[0];
  if (periodic_x_) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    dx = std::remainder(dx, two_pi);
  }
  return std::hypot(dx, a[1] - b[1]);
}

int AttractorRegistry::find(int i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

int AttractorRegistry::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  if (b < a) std::swap(a, b);
  parent_[b] = a;
  return a;
}

std::uint64_t AttractorRegistry::cell_key(const std::array<double, 2>& p) const {
  const auto cx = static_cast<std::int64_t>(std::floor(p[0] / match_tol_));
  const auto cy = static_cast<std::int64_t>(std::floor(p[1] / match_tol_));
  return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xffffffffULL);
}

int AttractorRegistry::assign(const DrivenSignature& sig) {
  using Kind = DrivenSignature::Kind;
  if (sig.kind == Kind::Unresolved || sig.points.empty()) return -1;

  if (sig.kind == Kind::Cycle) {
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      const auto& entry = entries_[e];
      if (!entry.cycle || entry.points.size() != sig.points.size()) continue;
      const bool all_close = std::all_of(sig.points.begin(), sig.points.end(), [&](const auto& p) {
        return std::any_of(entry.points.begin(), entry.points.end(),
                           [&](const auto& q) { return distance(p, q) <= match_tol_; });
      });
      if (all_close) return static_cast<int>(e);
    }
    entries_.push_back({true, sig.points});
    parent_.push_back(static_cast<int>(parent_.size()));
    return static_cast<int>(entries_.size() - 1);
  }

  // A slowly converging cycle can exhaust its samples before repeating within
  // cycle_tol; if the whole cloud sits on a known cycle it is that cycle.
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& entry = entries_[e];
    if (!entry.cycle) continue;
    const bool on_cycle = std::all_of(sig.points.begin(), sig.points.end(), [&](const auto& p) {
      return std::any_of(entry.points.begin(), entry.points.end(),
                         [&](const auto& q) { return distance(p, q) <= match_tol_; });
    });
    if (on_cycle) return static_cast<int>(e);
  }

  int target = -1;
  for (const auto& p : sig.points) {
    auto it = cells_.find(cell_key(p));
    if (it == cells_.end()) continue;
    target = target < 0 ? find(it->second) : unite(target, it->second);
  }
  if (target < 0) {
    entries_.push_back({false, {}});
    parent_.push_back(static_cast<int>(parent_.size()));
    target = static_cast<int>(entries_.size() - 1);
  }
  for (const auto& p : sig.points) {
    auto [it, inserted] = cells_.try_emplace(cell_key(p), target);
    if (!inserted) target = unite(target, it->second);
  }
  return target;
}

std::vector<Label> AttractorRegistry::finalize(const std::vector<int>& provisional) {
  std::vector<int> label_of_root(parent_.size(), -1);
  int next = 0;
  std::vector<Label> out(provisional.size(), kUnresolved);
  for (std::size_t i = 0; i < provisional.size(); ++i) {
    if (provisional[i] < 0) continue;
    const int root = find(provisional[i]);
    if (label_of_root[root] < 0) label_of_root[root] = next++;
    const int label = label_of_root[root];
    out[i] = label < kUnresolved ? static_cast<Label>(label) : kUnresolved;
  }
  return out;
}

}  // namespace basinlab

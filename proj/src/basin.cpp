#include "basinlab/basin.h"

#include <algorithm>
#include <omp.h>
#include <variant>

#include "basinlab/registry.h"

namespace basinlab {

namespace {

constexpr int kRowBlock = 32;
constexpr long kTaskPixels = 64;

int roots_count(const NewtonParams& p) {
  int degree = 5;
  while (degree > 0 && p.coeffs[static_cast<std::size_t>(degree)] == 0.0) --degree;
  return degree;
}

// Catalog systems: per-pixel label, no shared state.
struct CatalogKernel {
  const SystemSpec& system;
  const Region& region;
  const IntegratorConfig& cfg;
  std::vector<Complex> roots;

  Label operator()(int row, int col) const {
    const double x = region.x_at(col);
    const double y = region.y_at(row);
    if (const auto* nw = std::get_if<NewtonParams>(&system)) {
      return classify_newton({x, y}, *nw, roots, cfg).label;
    }
    if (const auto* hh = std::get_if<HenonHeilesParams>(&system)) {
      try {
        return classify_escape(hh_initial_state(x, y, hh->energy), cfg);
      } catch (const std::domain_error&) {
        return kUnresolved;
      }
    }
    const auto& mp = std::get<MagneticPendulumParams>(system);
    return classify_magnetic({x, y, 0.0, 0.0}, mp, cfg);
  }
};

CatalogKernel make_catalog_kernel(const SystemSpec& system, const Region& region, const IntegratorConfig& cfg) {
  CatalogKernel k{system, region, cfg, {}};
  if (const auto* nw = std::get_if<NewtonParams>(&system)) k.roots = polynomial_roots(nw->coeffs);
  return k;
}

bool is_driven(const SystemSpec& s) {
  return std::holds_alternative<DuffingParams>(s) || std::holds_alternative<PendulumParams>(s);
}

int label_space(const std::vector<Label>& labels) {
  int max_label = -1;
  for (Label l : labels) {
    if (l != kUnresolved) max_label = std::max(max_label, static_cast<int>(l));
  }
  return std::max(1, max_label + 1);
}

void check_inputs(const SystemSpec& system, const Region& region, const IntegratorConfig& config) {
  validate_system(system);
  region.validate();
  config.validate();
}

}  // namespace

int catalog_size(const SystemSpec& spec) {
  if (const auto* nw = std::get_if<NewtonParams>(&spec)) return roots_count(*nw);
  if (const auto* mp = std::get_if<MagneticPendulumParams>(&spec)) return mp->n_magnets;
  if (std::holds_alternative<HenonHeilesParams>(spec)) return 3;
  return 0;
}

BasinGrid compute_basin(const SystemSpec& system, const Region& region, const IntegratorConfig& config,
                        std::uint64_t /*seed*/, int threads) {
  check_inputs(system, region, config);
  const int n = region.resolution;
  const std::size_t pixels = static_cast<std::size_t>(n) * n;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();

  if (!is_driven(system)) {
    const auto kernel = make_catalog_kernel(system, region, config);
    std::vector<Label> labels(pixels);
    const auto total = static_cast<long>(pixels);
#pragma omp parallel for schedule(dynamic, 64) num_threads(nthreads)
    for (long i = 0; i < total; ++i) {
      labels[static_cast<std::size_t>(i)] = kernel(static_cast<int>(i / n), static_cast<int>(i % n));
    }
    return BasinGrid(n, n, std::move(labels), catalog_size(system), region);
  }

  const bool periodic = std::holds_alternative<PendulumParams>(system);
  AttractorRegistry registry(config.match_tol, periodic);
  std::vector<int> provisional(pixels, -1);
  std::vector<DrivenSignature> block(static_cast<std::size_t>(kRowBlock) * n);

  for (int row0 = 0; row0 < n; row0 += kRowBlock) {
    const int rows = std::min(kRowBlock, n - row0);
    const long count = static_cast<long>(rows) * n;
    std::vector<State<2>> initials(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
      initials[static_cast<std::size_t>(i)] = {region.x_at(static_cast<int>(i % n)),
                                               region.y_at(row0 + static_cast<int>(i / n))};
    }
    const long tasks = (count + kTaskPixels - 1) / kTaskPixels;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
    for (long t = 0; t < tasks; ++t) {
      const auto begin = static_cast<std::size_t>(t * kTaskPixels);
      const auto len = std::min<std::size_t>(kTaskPixels, static_cast<std::size_t>(count) - begin);
      trace_driven_batch(system, std::span(initials).subspan(begin, len), config,
                         std::span(block).subspan(begin, len));
    }
    // Registry updates stay serial and row-major: this is what makes the
    // labels independent of the thread count.
    for (long i = 0; i < count; ++i) {
      provisional[static_cast<std::size_t>(row0) * n + static_cast<std::size_t>(i)] =
          registry.assign(block[static_cast<std::size_t>(i)]);
    }
  }
  auto labels = registry.finalize(provisional);
  const int space = label_space(labels);
  return BasinGrid(n, n, std::move(labels), space, region);
}

namespace reference {

BasinGrid compute_basin(const SystemSpec& system, const Region& region, const IntegratorConfig& config,
                        std::uint64_t /*seed*/) {
  check_inputs(system, region, config);
  const int n = region.resolution;
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(n) * n);

  if (!is_driven(system)) {
    const auto kernel = make_catalog_kernel(system, region, config);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) labels.push_back(kernel(r, c));
    }
    return BasinGrid(n, n, std::move(labels), catalog_size(system), region);
  }

  AttractorRegistry registry(config.match_tol, std::holds_alternative<PendulumParams>(system));
  std::vector<int> provisional;
  provisional.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      provisional.push_back(registry.assign(trace_driven(system, {region.x_at(c), region.y_at(r)}, config)));
    }
  }
  labels = registry.finalize(provisional);
  const int space = label_space(labels);
  return BasinGrid(n, n, std::move(labels), space, region);
}

}  // namespace reference

}  // namespace basinlab

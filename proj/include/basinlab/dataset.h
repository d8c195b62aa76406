#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "basinlab/grid.h"
#include "basinlab/metrics.h"
#include "basinlab/systems.h"

namespace basinlab {

class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kSourceResolution = 1000;
inline constexpr int kTileResolution = 333;
inline constexpr int kTilesPerBasin = 10;

/// Nine 333x333 tiles at offsets {0, 333, 666}^2 in row-major order (the last
/// row and column of the source are dropped), then a strided downsample
/// taking every third pixel from (0, 0). Input must be 1000x1000.
std::vector<BasinGrid> tile_basin(const BasinGrid& grid);

enum class Split { Train, Validation, Test };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

/// Duffing, Newton -> train; pendulum, Henon-Heiles -> validation; magnetic
/// pendulum -> test.
Split split_for_system(SystemKind kind);

/// Binary PGM (P5, maxval 255); pixel value = label id, unresolved = 255.
void write_basin_image(const BasinGrid& grid, const std::filesystem::path& path);
/// The label space of the loaded grid is max(non-unresolved id) + 1.
BasinGrid read_basin_image(const std::filesystem::path& path);

/// Monte Carlo budgets for the four labels.
struct MetricBudgets {
  FDimConfig fdim;
  EntropyConfig entropy;
  WadaConfig wada;
  int repeats = 10;

  /// Box counts multiplied by budget_scale in (0, 1]; sizes, box side,
  /// fattening radius and repeats are untouched.
  static MetricBudgets scaled(double budget_scale);
};

/// Outcome of one repeated estimator: either a result or the name of the
/// error that stopped it.
struct MetricField {
  std::optional<MetricResult> result;
  std::string error;
};

struct MetricSelection {
  bool fdim = true;
  bool sb = true;
  bool sbb = true;
  bool wada = true;
};

/// Fields left unselected stay empty with no error.
struct BasinLabels {
  MetricField fdim;
  MetricField sb;
  MetricField sbb;
  std::optional<WadaReport> wada;
};

/// Repeat-`budgets.repeats` FDim, Sb and Sbb with seeds seed..seed+repeats-1
/// plus one Wada merging test. Estimator errors land in the field, they never
/// throw.
BasinLabels label_basin(const BasinGrid& grid, const MetricBudgets& budgets, std::uint64_t seed, int threads = 0,
                        const MetricSelection& select = {});

struct ManifestRecord {
  std::string path;
  SystemKind system = SystemKind::Duffing;
  std::map<std::string, std::string> params;
  int tile_index = 0;
  Split split = Split::Train;
  std::optional<double> fdim_mean, fdim_std, sb_mean, sb_std, sbb_mean, sbb_std;
  bool wada = false;
  int num_labels = 0;
  std::uint64_t seed = 0;

  bool operator==(const ManifestRecord&) const = default;
};

/// Column order of the manifest CSV.
inline constexpr std::string_view kManifestHeader =
    "path,system,params,tile_index,split,fdim_mean,fdim_std,sb_mean,sb_std,sbb_mean,sbb_std,wada,num_labels,seed";

/// `key=value;key=value`, keys sorted.
std::string encode_params(const std::map<std::string, std::string>& params);
std::map<std::string, std::string> decode_params(std::string_view text);

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Metric seed for one tile, independent of sweep order.
std::uint64_t tile_seed(std::uint64_t base_seed, SystemKind system, const std::map<std::string, std::string>& params,
                        int tile_index);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
  SystemSpec system;
  Region region;
  IntegratorConfig integrator;
};

struct SweepPlan {
  std::vector<SweepPoint> points;
  MetricBudgets budgets;
};

/// Parses the JSON plan format (see docs/formats.md). Throws ParseError.
SweepPlan parse_sweep_plan(std::string_view json_text, double budget_scale = 1.0);
SweepPlan load_sweep_plan(const std::filesystem::path& path, double budget_scale = 1.0);

struct SweepOptions {
  std::filesystem::path output_dir;
  std::uint64_t base_seed = 0;
  int threads = 0;
  std::function<void(const std::string&)> log;
};

struct SweepSummary {
  std::vector<ManifestRecord> records;
  std::size_t points_computed = 0;
  std::size_t points_reused = 0;
  std::size_t points_failed = 0;
};

/// compute_basin -> tile_basin -> label_basin for every plan point, writing
/// images under output_dir/images and the manifest to output_dir/manifest.csv.
/// Rows follow plan order x tile index. Points whose ten records already sit
/// in an existing manifest with their images on disk are reused untouched.
SweepSummary run_sweep(const SweepPlan& plan, const SweepOptions& options);

}  // namespace basinlab

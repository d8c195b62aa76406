#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "basinlab/dataset.h"

namespace basinlab::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kGenerationFailed = 3,
  kMetricFailed = 4,
};

/// Entry point behind the `basinlab` executable; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience for tests and scripts: arguments without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Fixed-edge histogram: bins [lo + k*step, lo + (k+1)*step) clipped to hi,
/// last bin closed. Out-of-range values are clamped into the end bins.
std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, double step);

/// Writes fdim_hist.csv, sb_hist.csv, sbb_hist.csv and wada_counts.csv.
void write_stats(const std::vector<ManifestRecord>& records, const std::filesystem::path& dir);

}  // namespace basinlab::cli

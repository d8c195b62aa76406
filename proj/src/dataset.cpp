#include "basinlab/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace basinlab {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<BasinGrid> tile_basin(const BasinGrid& grid) {
  if (grid.width() != kSourceResolution || grid.height() != kSourceResolution) {
    throw SizeMismatch("tile_basin needs a " + std::to_string(kSourceResolution) + "x" +
                       std::to_string(kSourceResolution) + " grid, got " + std::to_string(grid.width()) + "x" +
                       std::to_string(grid.height()));
  }
  constexpr int t = kTileResolution;
  const Region& src = grid.region();
  std::vector<BasinGrid> tiles;
  tiles.reserve(kTilesPerBasin);
  for (int ti = 0; ti < 3; ++ti) {
    for (int tj = 0; tj < 3; ++tj) {
      std::vector<Label> labels(static_cast<std::size_t>(t) * t);
      for (int r = 0; r < t; ++r) {
        for (int c = 0; c < t; ++c) labels[static_cast<std::size_t>(r) * t + c] = grid.at(ti * t + r, tj * t + c);
      }
      // Region spanned by the tile's pixel edges.
      Region reg{src.x_min + tj * t * src.dx(), src.x_min + (tj + 1) * t * src.dx(), src.y_min + ti * t * src.dy(),
                 src.y_min + (ti + 1) * t * src.dy(), t};
      tiles.emplace_back(t, t, std::move(labels), grid.num_labels(), reg);
    }
  }
  std::vector<Label> down(static_cast<std::size_t>(t) * t);
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < t; ++c) down[static_cast<std::size_t>(r) * t + c] = grid.at(3 * r, 3 * c);
  }
  Region reg{src.x_min, src.x_min + 3 * t * src.dx(), src.y_min, src.y_min + 3 * t * src.dy(), t};
  tiles.emplace_back(t, t, std::move(down), grid.num_labels(), reg);
  return tiles;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : {Split::Train, Split::Validation, Split::Test}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

Split split_for_system(SystemKind kind) {
  switch (kind) {
    case SystemKind::Duffing:
    case SystemKind::Newton: return Split::Train;
    case SystemKind::Pendulum:
    case SystemKind::HenonHeiles: return Split::Validation;
    case SystemKind::MagneticPendulum: return Split::Test;
  }
  return Split::Test;
}

// ---------------------------------------------------------------------------
// PGM images
// ---------------------------------------------------------------------------

void write_basin_image(const BasinGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Region& r = grid.region();
  out << "P5\n"
      << "# basinlab num_labels=" << grid.num_labels() << "\n"
      << "# basinlab region=" << fmt17(r.x_min) << "," << fmt17(r.x_max) << "," << fmt17(r.y_min) << ","
      << fmt17(r.y_max) << "," << r.resolution << "\n"
      << grid.width() << " " << grid.height() << "\n255\n";
  auto labels = grid.labels();
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct PgmHeader {
  int width = 0, height = 0, maxval = 0;
  std::optional<int> num_labels;
  std::optional<Region> region;
};

void parse_comment(const std::string& line, PgmHeader& h) {
  constexpr std::string_view tag = "basinlab ";
  std::string_view s(line);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (!s.starts_with(tag)) return;
  s.remove_prefix(tag.size());
  try {
    if (s.starts_with("num_labels=")) {
      h.num_labels = std::stoi(std::string(s.substr(11)));
    } else if (s.starts_with("region=")) {
      std::vector<std::string> parts;
      std::stringstream ss{std::string(s.substr(7))};
      for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
      if (parts.size() == 5) {
        h.region = Region{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]),
                          std::stoi(parts[4])};
      }
    }
  } catch (const std::exception&) {
    // Unrecognized metadata is ignored; the pixel payload alone defines the grid.
  }
}

}  // namespace

BasinGrid read_basin_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  PgmHeader h;
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (!in || magic != "P5") throw IoError(path.string() + ": not a binary PGM (P5) file");

  int fields[3] = {0, 0, 0};
  for (int f = 0; f < 3; ++f) {
    int ch = in.get();
    while (true) {
      if (ch == '#') {
        std::string comment;
        std::getline(in, comment);
        parse_comment(comment, h);
        ch = in.get();
      } else if (std::isspace(ch)) {
        ch = in.get();
      } else {
        break;
      }
    }
    if (ch == EOF || !std::isdigit(ch)) throw IoError(path.string() + ": malformed PGM header");
    long v = 0;
    while (ch != EOF && std::isdigit(ch)) {
      v = v * 10 + (ch - '0');
      if (v > 1 << 20) throw IoError(path.string() + ": PGM dimension too large");
      ch = in.get();
    }
    fields[f] = static_cast<int>(v);
    if (f < 2) in.unget();
    else if (ch == EOF || !std::isspace(ch)) throw IoError(path.string() + ": malformed PGM header");
  }
  h.width = fields[0];
  h.height = fields[1];
  h.maxval = fields[2];
  if (h.width <= 0 || h.height <= 0) throw IoError(path.string() + ": empty image");
  if (h.maxval < 1 || h.maxval > 255) throw IoError(path.string() + ": only 8-bit PGM is supported");

  std::vector<Label> labels(static_cast<std::size_t>(h.width) * h.height);
  in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (in.gcount() != static_cast<std::streamsize>(labels.size())) throw IoError(path.string() + ": truncated pixel data");

  int max_label = -1;
  for (Label l : labels) {
    if (l != kUnresolved) max_label = std::max<int>(max_label, l);
  }
  int num_labels = std::max(1, max_label + 1);
  if (h.num_labels && *h.num_labels > max_label && *h.num_labels >= 1 && *h.num_labels <= 255) {
    num_labels = *h.num_labels;
  }
  Region region{0.0, static_cast<double>(h.width), 0.0, static_cast<double>(h.height), std::max(2, h.width)};
  if (h.region) region = *h.region;
  try {
    return BasinGrid(h.width, h.height, std::move(labels), num_labels, region);
  } catch (const InvalidGrid& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

MetricBudgets MetricBudgets::scaled(double budget_scale) {
  if (!(budget_scale > 0.0 && budget_scale <= 1.0)) {
    throw MetricError(MetricErrorCode::InvalidConfig, "budget scale must lie in (0, 1]");
  }
  MetricBudgets b;
  b.fdim.boxes_per_size = std::max(1L, std::lround(static_cast<double>(b.fdim.boxes_per_size) * budget_scale));
  b.entropy.n_boxes = std::max(1L, std::lround(static_cast<double>(b.entropy.n_boxes) * budget_scale));
  return b;
}

BasinLabels label_basin(const BasinGrid& grid, const MetricBudgets& budgets, std::uint64_t seed, int threads,
                        const MetricSelection& select) {
  BasinLabels out;
  if (select.fdim) {
    try {
      out.fdim.result = repeat_metric(Estimator::FractalDimension, grid, budgets.fdim, budgets.entropy,
                                      budgets.repeats, seed, threads);
    } catch (const MetricError& e) {
      out.fdim.error = error_name(e.code());
    }
  }

  if (select.sb || select.sbb) {
    // Sb and Sbb share one box stream per seed, so each repeat is one pass.
    std::vector<EntropyEstimate> passes;
    std::string failure;
    try {
      if (budgets.repeats < 1) throw MetricError(MetricErrorCode::InvalidConfig, "repeats must be >= 1");
      for (int k = 0; k < budgets.repeats; ++k) {
        EntropyConfig c = budgets.entropy;
        c.seed = seed + static_cast<std::uint64_t>(k);
        passes.push_back(estimate_entropy(grid, c, threads));
      }
    } catch (const MetricError& e) {
      failure = error_name(e.code());
    }
    auto fill = [&](MetricField& field, auto value) {
      if (!failure.empty()) {
        field.error = failure;
        return;
      }
      try {
        field.result =
            repeat_metric([&](std::uint64_t s) { return value(passes[s - seed]); }, budgets.repeats, seed);
      } catch (const MetricError& e) {
        field.error = error_name(e.code());
      }
    };
    if (select.sb) fill(out.sb, [](const EntropyEstimate& e) { return e.basin_entropy(); });
    if (select.sbb) fill(out.sbb, [](const EntropyEstimate& e) { return e.boundary_basin_entropy(); });
  }

  if (select.wada) out.wada = wada_test(grid, budgets.wada, threads);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string encode_params(const std::map<std::string, std::string>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

std::map<std::string, std::string> decode_params(std::string_view text) {
  std::map<std::string, std::string> out;
  while (!text.empty()) {
    const auto semi = text.find(';');
    std::string_view item = text.substr(0, semi);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw std::invalid_argument("bad parameter entry '" + std::string(item) + "'");
    out.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string opt_field(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

// Splits one CSV record; returns false when a quoted field runs off the line.
bool split_csv(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return !quoted;
}

template <class T>
T parse_integer(const std::string& s, std::size_t line, const char* column) {
  if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos) {
    throw ParseError(line, std::string("column ") + column + ": not an integer: '" + s + "'");
  }
  try {
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (s.front() == '-') throw std::out_of_range(column);
      return std::stoull(s);
    } else {
      return static_cast<T>(std::stoll(s));
    }
  } catch (const std::exception&) {
    throw ParseError(line, std::string("column ") + column + ": integer out of range: '" + s + "'");
  }
}

std::optional<double> parse_optional(const std::string& s, std::size_t line, const char* column) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(line, std::string("column ") + column + ": not a number: '" + s + "'");
}

}  // namespace

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kManifestHeader << "\n";
  for (const auto& r : records) {
    out << csv_field(r.path) << ',' << system_name(r.system) << ',' << csv_field(encode_params(r.params)) << ','
        << r.tile_index << ',' << split_name(r.split) << ',' << opt_field(r.fdim_mean) << ',' << opt_field(r.fdim_std)
        << ',' << opt_field(r.sb_mean) << ',' << opt_field(r.sb_std) << ',' << opt_field(r.sbb_mean) << ','
        << opt_field(r.sbb_std) << ',' << (r.wada ? "true" : "false") << ',' << r.num_labels << ',' << r.seed << "\n";
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> f;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kManifestHeader) throw ParseError(1, "unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    if (!split_csv(line, f)) throw ParseError(line_no, "unterminated quoted field");
    if (f.size() != 14) throw ParseError(line_no, "expected 14 columns, found " + std::to_string(f.size()));
    ManifestRecord r;
    r.path = f[0];
    if (r.path.empty()) throw ParseError(line_no, "column path: empty");
    auto sys = parse_system_name(f[1]);
    if (!sys) throw ParseError(line_no, "column system: unknown system '" + f[1] + "'");
    r.system = *sys;
    try {
      r.params = decode_params(f[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, std::string("column params: ") + e.what());
    }
    r.tile_index = parse_integer<int>(f[3], line_no, "tile_index");
    if (r.tile_index < 0 || r.tile_index >= kTilesPerBasin) throw ParseError(line_no, "column tile_index: out of range");
    auto split = parse_split(f[4]);
    if (!split) throw ParseError(line_no, "column split: unknown split '" + f[4] + "'");
    r.split = *split;
    r.fdim_mean = parse_optional(f[5], line_no, "fdim_mean");
    r.fdim_std = parse_optional(f[6], line_no, "fdim_std");
    r.sb_mean = parse_optional(f[7], line_no, "sb_mean");
    r.sb_std = parse_optional(f[8], line_no, "sb_std");
    r.sbb_mean = parse_optional(f[9], line_no, "sbb_mean");
    r.sbb_std = parse_optional(f[10], line_no, "sbb_std");
    if (f[11] == "true") r.wada = true;
    else if (f[11] == "false") r.wada = false;
    else throw ParseError(line_no, "column wada: expected true or false, got '" + f[11] + "'");
    r.num_labels = parse_integer<int>(f[12], line_no, "num_labels");
    r.seed = parse_integer<std::uint64_t>(f[13], line_no, "seed");
    records.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError(1, "missing header");
  return records;
}

std::uint64_t tile_seed(std::uint64_t base_seed, SystemKind system, const std::map<std::string, std::string>& params,
                        int tile_index) {
  // FNV-1a over the canonical point identity.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  mix(system_name(system));
  mix("|");
  mix(encode_params(params));
  return derive_seed(base_seed, h, static_cast<std::uint64_t>(tile_index));
}

}  // namespace basinlab

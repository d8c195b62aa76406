#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "basinlab/basin.h"
#include "basinlab/dataset.h"

namespace basinlab {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(0, where + ": expected a number");
  return j.get<double>();
}

long integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(0, where + ": expected an integer");
  return j.get<long>();
}

// One axis of the parameter grid: a scalar, an explicit list, or
// {min, max, count} spaced evenly with both ends included.
std::vector<double> axis_values(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    if (j.empty()) throw ParseError(0, where + ": empty value list");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, where));
    return out;
  }
  if (j.is_object()) {
    for (const char* key : {"min", "max", "count"}) {
      if (!j.contains(key)) throw ParseError(0, where + ": range needs min, max and count");
    }
    const double lo = number(j["min"], where + ".min");
    const double hi = number(j["max"], where + ".max");
    const long count = integer(j["count"], where + ".count");
    if (count < 1) throw ParseError(0, where + ".count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> out;
    for (long i = 0; i < count; ++i) out.push_back(i + 1 == count ? hi : lo + (hi - lo) * i / (count - 1));
    return out;
  }
  throw ParseError(0, where + ": expected a number, a list, or {min, max, count}");
}

void apply_integrator(const Json& j, IntegratorConfig& cfg, const std::string& where) {
  if (!j.is_object()) throw ParseError(0, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string w = where + "." + key;
    if (key == "dt") cfg.dt = number(value, w);
    else if (key == "t_transient") cfg.t_transient = number(value, w);
    else if (key == "t_max") cfg.t_max = number(value, w);
    else if (key == "snapshot_count") cfg.snapshot_count = static_cast<int>(integer(value, w));
    else if (key == "chaos_samples") cfg.chaos_samples = static_cast<int>(integer(value, w));
    else if (key == "match_tol") cfg.match_tol = number(value, w);
    else if (key == "cycle_tol") cfg.cycle_tol = number(value, w);
    else if (key == "stop_speed") cfg.stop_speed = number(value, w);
    else if (key == "dwell_time") cfg.dwell_time = number(value, w);
    else if (key == "escape_radius") cfg.escape_radius = number(value, w);
    else if (key == "newton_max_iter") cfg.newton_max_iter = static_cast<int>(integer(value, w));
    else if (key == "newton_tol") cfg.newton_tol = number(value, w);
    else throw ParseError(0, w + ": unknown integrator setting");
  }
}

void apply_budgets(const Json& j, MetricBudgets& b) {
  if (!j.is_object()) throw ParseError(0, "budgets: expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string w = "budgets." + key;
    if (key == "boxes_per_size") b.fdim.boxes_per_size = integer(value, w);
    else if (key == "eps_min") b.fdim.eps_min = static_cast<int>(integer(value, w));
    else if (key == "eps_max") b.fdim.eps_max = static_cast<int>(integer(value, w));
    else if (key == "eps_step") b.fdim.eps_step = static_cast<int>(integer(value, w));
    else if (key == "n_boxes") b.entropy.n_boxes = integer(value, w);
    else if (key == "box_size") b.entropy.box_size = static_cast<int>(integer(value, w));
    else if (key == "fattening_r") b.wada.fattening_r = static_cast<int>(integer(value, w));
    else if (key == "repeats") b.repeats = static_cast<int>(integer(value, w));
    else throw ParseError(0, w + ": unknown budget setting");
  }
}

SweepPlan parse_plan_json(const Json& root, double budget_scale) {
  if (!root.is_object()) throw ParseError(0, "plan must be a JSON object");
  SweepPlan plan;
  try {
    plan.budgets = MetricBudgets::scaled(budget_scale);
  } catch (const MetricError& e) {
    throw ParseError(0, e.what());
  }
  const int resolution = root.contains("resolution") ? static_cast<int>(integer(root["resolution"], "resolution"))
                                                     : kSourceResolution;
  if (resolution != kSourceResolution) {
    throw ParseError(0, "resolution must be " + std::to_string(kSourceResolution) + " so basins tile into 333x333 images");
  }
  if (root.contains("budgets")) {
    MetricBudgets b = MetricBudgets{};
    apply_budgets(root["budgets"], b);
    b.fdim.boxes_per_size = std::max(1L, std::lround(static_cast<double>(b.fdim.boxes_per_size) * budget_scale));
    b.entropy.n_boxes = std::max(1L, std::lround(static_cast<double>(b.entropy.n_boxes) * budget_scale));
    if (b.repeats < 1 || b.fdim.boxes_per_size < 1 || b.entropy.n_boxes < 1 || b.wada.fattening_r < 0) {
      throw ParseError(0, "budgets: values must be positive");
    }
    plan.budgets = b;
  }
  if (!root.contains("systems") || !root["systems"].is_array()) throw ParseError(0, "plan needs a 'systems' list");

  std::size_t entry_index = 0;
  for (const auto& entry : root["systems"]) {
    const std::string where = "systems[" + std::to_string(entry_index++) + "]";
    if (!entry.is_object() || !entry.contains("system") || !entry["system"].is_string()) {
      throw ParseError(0, where + ": needs a 'system' name");
    }
    const auto kind = parse_system_name(entry["system"].get<std::string>());
    if (!kind) throw ParseError(0, where + ": unknown system '" + entry["system"].get<std::string>() + "'");

    std::vector<std::pair<std::string, std::vector<double>>> axes;
    if (entry.contains("params")) {
      if (!entry["params"].is_object()) throw ParseError(0, where + ".params: expected an object");
      const auto known = system_params(make_system(*kind, {}));
      for (const auto& [key, value] : entry["params"].items()) {
        if (!known.contains(key)) throw ParseError(0, where + ".params." + key + ": unknown parameter");
        axes.emplace_back(key, axis_values(value, where + ".params." + key));
      }
    }

    // Cartesian product, last axis varying fastest.
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
      std::map<std::string, std::string> params;
      for (std::size_t a = 0; a < axes.size(); ++a) params[axes[a].first] = fmt17(axes[a].second[idx[a]]);
      SweepPoint point;
      try {
        point.system = make_system(*kind, params);
      } catch (const std::exception& e) {
        throw ParseError(0, where + ": " + e.what());
      }
      point.region = default_region(point.system);
      if (entry.contains("region")) {
        const auto& r = entry["region"];
        if (!r.is_array() || r.size() != 4) throw ParseError(0, where + ".region: expected [x_min, x_max, y_min, y_max]");
        point.region = Region{number(r[0], where + ".region"), number(r[1], where + ".region"),
                              number(r[2], where + ".region"), number(r[3], where + ".region"), 2};
      }
      point.region.resolution = resolution;
      point.integrator = default_config(point.system);
      if (entry.contains("integrator")) apply_integrator(entry["integrator"], point.integrator, where + ".integrator");
      try {
        validate_system(point.system);
        point.region.validate();
        point.integrator.validate();
      } catch (const std::exception& e) {
        throw ParseError(0, where + ": " + e.what());
      }
      plan.points.push_back(std::move(point));

      bool wrapped = true;
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].second.size()) {
          wrapped = false;
          break;
        }
        idx[a] = 0;
      }
      if (wrapped) break;
    }
  }
  return plan;
}

std::string point_stem(SystemKind kind, const std::map<std::string, std::string>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : encode_params(params)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(system_name(kind)) + "_" + buf;
}

}  // namespace

SweepPlan parse_sweep_plan(std::string_view json_text, double budget_scale) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  return parse_plan_json(root, budget_scale);
}

SweepPlan load_sweep_plan(const std::filesystem::path& path, double budget_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open plan " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_plan(ss.str(), budget_scale);
}

SweepSummary run_sweep(const SweepPlan& plan, const SweepOptions& options) {
  namespace fs = std::filesystem;
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const fs::path dir = options.output_dir;
  const fs::path manifest_path = dir / "manifest.csv";
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());

  std::unordered_map<std::string, ManifestRecord> existing;
  if (fs::exists(manifest_path)) {
    try {
      for (auto& r : read_manifest(manifest_path)) existing.emplace(r.path, std::move(r));
    } catch (const std::exception& e) {
      log(std::string("ignoring unreadable existing manifest: ") + e.what());
    }
  }

  SweepSummary summary;
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    const SweepPoint& point = plan.points[i];
    const SystemKind kind = kind_of(point.system);
    const auto params = system_params(point.system);
    const std::string stem = point_stem(kind, params);
    const std::string tag = "[" + std::to_string(i + 1) + "/" + std::to_string(plan.points.size()) + "] " + stem;

    std::vector<ManifestRecord> reused;
    for (int t = 0; t < kTilesPerBasin; ++t) {
      const std::string rel = "images/" + stem + "_t" + std::to_string(t) + ".pgm";
      auto it = existing.find(rel);
      if (it == existing.end() || it->second.system != kind || it->second.params != params ||
          it->second.tile_index != t || it->second.seed != tile_seed(options.base_seed, kind, params, t) ||
          !fs::exists(dir / rel)) {
        break;
      }
      reused.push_back(it->second);
    }
    if (reused.size() == static_cast<std::size_t>(kTilesPerBasin)) {
      summary.records.insert(summary.records.end(), reused.begin(), reused.end());
      ++summary.points_reused;
      log(tag + ": complete, skipped");
      continue;
    }

    try {
      Region region = point.region;
      const BasinGrid basin = compute_basin(point.system, region, point.integrator, options.base_seed, options.threads);
      const auto tiles = tile_basin(basin);
      std::vector<ManifestRecord> rows;
      for (int t = 0; t < kTilesPerBasin; ++t) {
        ManifestRecord r;
        r.path = "images/" + stem + "_t" + std::to_string(t) + ".pgm";
        r.system = kind;
        r.params = params;
        r.tile_index = t;
        r.split = split_for_system(kind);
        r.seed = tile_seed(options.base_seed, kind, params, t);
        r.num_labels = tiles[t].num_labels();
        const BasinLabels labels = label_basin(tiles[t], plan.budgets, r.seed, options.threads);
        if (labels.fdim.result) {
          r.fdim_mean = labels.fdim.result->mean;
          r.fdim_std = labels.fdim.result->std;
        }
        if (labels.sb.result) {
          r.sb_mean = labels.sb.result->mean;
          r.sb_std = labels.sb.result->std;
        }
        if (labels.sbb.result) {
          r.sbb_mean = labels.sbb.result->mean;
          r.sbb_std = labels.sbb.result->std;
        }
        r.wada = labels.wada->wada;
        write_basin_image(tiles[t], dir / r.path);
        rows.push_back(std::move(r));
      }
      summary.records.insert(summary.records.end(), rows.begin(), rows.end());
      ++summary.points_computed;
      char frac[32];
      std::snprintf(frac, sizeof frac, "%.4f", basin.unresolved_fraction());
      log(tag + ": " + std::to_string(basin.distinct_labels()) + " labels, unresolved " + frac);
    } catch (const std::exception& e) {
      ++summary.points_failed;
      log(tag + ": failed: " + e.what());
      continue;
    }
    // Rewritten after every point so an interrupted sweep resumes from here.
    const fs::path tmp = dir / "manifest.csv.tmp";
    write_manifest(summary.records, tmp);
    fs::rename(tmp, manifest_path);
  }
  write_manifest(summary.records, dir / "manifest.csv.tmp");
  fs::rename(dir / "manifest.csv.tmp", manifest_path);
  return summary;
}

}  // namespace basinlab

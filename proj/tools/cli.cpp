#include "cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "basinlab/basin.h"
#include "basinlab/roots.h"

namespace basinlab::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
  double budget_scale = 1.0;
};

int resolve_threads(const CLI::Option* flag, int value) {
  if (flag->count() > 0) return value;
  if (const char* env = std::getenv("BASINLAB_THREADS"); env != nullptr && *env != '\0') {
    try {
      std::size_t pos = 0;
      const int n = std::stoi(env, &pos);
      if (pos == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("BASINLAB_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string system;
  std::optional<double> gamma, omega, forcing, energy, drag_a;
  std::optional<int> n_magnets;
  std::string coeffs, b, region;
  int resolution = 333;
  std::optional<double> dt, t_transient, t_max;
};

SystemSpec build_system(const GenerateArgs& g) {
  const auto kind = parse_system_name(g.system);
  if (!kind) throw UsageError("--system: unknown system '" + g.system + "'");
  std::map<std::string, std::string> params;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) params[key] = fmt("%.17g", *v);
  };
  switch (*kind) {
    case SystemKind::Duffing:
      put("gamma", g.gamma);
      put("omega", g.omega);
      break;
    case SystemKind::Pendulum:
      put("F", g.forcing);
      put("omega", g.omega);
      break;
    case SystemKind::HenonHeiles: put("E", g.energy); break;
    case SystemKind::Newton: {
      if (!g.coeffs.empty()) {
        const auto c = parse_list(g.coeffs, "--coeffs");
        if (c.empty() || c.size() > 6) throw UsageError("--coeffs takes 1 to 6 values a0,a1,...");
        for (std::size_t i = 0; i < 6; ++i) params["a" + std::to_string(i)] = fmt("%.17g", i < c.size() ? c[i] : 0.0);
      }
      if (!g.b.empty()) {
        const auto b = parse_list(g.b, "--b");
        if (b.empty() || b.size() > 2) throw UsageError("--b takes re or re,im for newton");
        params["b_re"] = fmt("%.17g", b[0]);
        params["b_im"] = fmt("%.17g", b.size() > 1 ? b[1] : 0.0);
      }
      break;
    }
    case SystemKind::MagneticPendulum: {
      if (!g.b.empty()) {
        const auto b = parse_list(g.b, "--b");
        if (b.size() != 1) throw UsageError("--b takes the scalar drag for the magnetic pendulum");
        params["b"] = fmt("%.17g", b[0]);
      }
      put("a", g.drag_a);
      if (g.n_magnets) params["n"] = std::to_string(*g.n_magnets);
      break;
    }
  }
  SystemSpec spec = make_system(*kind, params);
  validate_system(spec);
  return spec;
}

int cmd_generate(const GenerateArgs& g, const Globals& globals, std::ostream& out, std::ostream& err) {
  SystemSpec spec;
  Region region;
  IntegratorConfig cfg;
  try {
    spec = build_system(g);
    region = default_region(spec);
    if (!g.region.empty()) {
      const auto r = parse_list(g.region, "--region");
      if (r.size() != 4) throw UsageError("--region takes x_min,x_max,y_min,y_max");
      region = Region{r[0], r[1], r[2], r[3], 2};
    }
    region.resolution = g.resolution;
    region.validate();
    cfg = default_config(spec);
    if (g.dt) cfg.dt = *g.dt;
    if (g.t_transient) cfg.t_transient = *g.t_transient;
    if (g.t_max) cfg.t_max = *g.t_max;
    cfg.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  const std::string path = globals.output.empty() ? std::string(system_name(kind_of(spec))) + ".pgm" : globals.output;
  const auto start = std::chrono::steady_clock::now();
  BasinGrid grid;
  try {
    grid = compute_basin(spec, region, cfg, globals.seed, globals.threads);
    write_basin_image(grid, path);
  } catch (const std::exception& e) {
    err << "generation failed: " << e.what() << "\n";
    return kGenerationFailed;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << path << ": " << grid.width() << "x" << grid.height() << ", num_labels " << grid.num_labels()
      << ", distinct " << grid.distinct_labels() << ", unresolved " << fmt("%.4f%%", 100.0 * grid.unresolved_fraction())
      << ", " << fmt("%.2f", seconds) << " s\n";
  if (grid.unresolved_fraction() > 0.01) err << "warning: more than 1% of pixels are unresolved\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// measure
// ---------------------------------------------------------------------------

Json field_json(const MetricField& f) {
  Json j = Json::object();
  if (f.result) {
    j["mean"] = f.result->mean;
    j["std"] = f.result->std;
    j["repeats"] = f.result->repeats;
    j["samples"] = f.result->samples;
  } else {
    j["error"] = f.error;
  }
  return j;
}

Json wada_json(const WadaReport& w, int r) {
  Json j = Json::object();
  j["wada"] = w.wada;
  j["reason"] = std::string(reason_name(w.reason));
  j["basins"] = w.basins;
  j["boundary_pixels"] = w.boundary_pixels;
  j["fattening_r"] = r;
  Json pairs = Json::array();
  for (const auto& p : w.pairs) {
    pairs.push_back(Json{{"a", p.a},
                         {"b", p.b},
                         {"pass", p.pass},
                         {"merged_outside", p.merged_outside},
                         {"original_outside", p.original_outside}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

std::string field_text(const MetricField& f) {
  if (!f.result) return "error " + f.error;
  return fmt("%.6f", f.result->mean) + " +/- " + fmt("%.6f", f.result->std) + " (" +
         std::to_string(f.result->repeats) + " repeats)";
}

struct MeasureArgs {
  std::string input;
  std::vector<std::string> metrics{"fdim", "sb", "sbb", "wada"};
  int repeats = 10;
  std::string json;
};

int cmd_measure(const MeasureArgs& m, const Globals& globals, std::ostream& out, std::ostream& err) {
  MetricSelection select{false, false, false, false};
  for (const auto& name : m.metrics) {
    if (name == "fdim") select.fdim = true;
    else if (name == "sb") select.sb = true;
    else if (name == "sbb") select.sbb = true;
    else if (name == "wada") select.wada = true;
    else if (name == "all") select = MetricSelection{};
    else throw UsageError("--metrics: unknown metric '" + name + "' (fdim, sb, sbb, wada)");
  }
  if (m.repeats < 1) throw UsageError("--repeats must be >= 1");

  BasinGrid grid;
  try {
    grid = read_basin_image(m.input);
  } catch (const std::exception& e) {
    err << "cannot load " << m.input << ": " << e.what() << "\n";
    return kGenerationFailed;
  }

  MetricBudgets budgets = MetricBudgets::scaled(globals.budget_scale);
  budgets.repeats = m.repeats;
  const BasinLabels labels = label_basin(grid, budgets, globals.seed, globals.threads, select);

  Json warnings = Json::array();
  if (grid.unresolved_fraction() > 0.01) {
    warnings.push_back("unresolved fraction " + fmt("%.4f", grid.unresolved_fraction()) + " exceeds 1%");
  }

  Json report = Json::object();
  report["input"] = m.input;
  report["width"] = grid.width();
  report["height"] = grid.height();
  report["num_labels"] = grid.num_labels();
  report["distinct_labels"] = grid.distinct_labels();
  report["unresolved_fraction"] = grid.unresolved_fraction();
  report["seed"] = globals.seed;
  report["budget_scale"] = globals.budget_scale;
  report["repeats"] = budgets.repeats;
  report["budgets"] = Json{{"boxes_per_size", budgets.fdim.boxes_per_size},
                           {"eps_sizes", budgets.fdim.sizes()},
                           {"n_boxes", budgets.entropy.n_boxes},
                           {"box_size", budgets.entropy.box_size},
                           {"fattening_r", budgets.wada.fattening_r}};
  report["warnings"] = warnings;
  Json metrics = Json::object();
  bool failed = false;
  if (select.fdim) {
    metrics["fdim"] = field_json(labels.fdim);
    failed |= !labels.fdim.result;
  }
  if (select.sb) {
    metrics["sb"] = field_json(labels.sb);
    failed |= !labels.sb.result;
  }
  if (select.sbb) {
    metrics["sbb"] = field_json(labels.sbb);
    failed |= !labels.sbb.result;
  }
  if (select.wada) metrics["wada"] = wada_json(*labels.wada, budgets.wada.fattening_r);
  report["metrics"] = std::move(metrics);

  std::string json_path = !m.json.empty() ? m.json : globals.output;
  if (json_path.empty()) json_path = std::filesystem::path(m.input).replace_extension(".json").string();
  {
    std::ofstream f(json_path, std::ios::binary | std::ios::trunc);
    if (!f) {
      err << "cannot write report " << json_path << "\n";
      return kGenerationFailed;
    }
    f << report.dump(2) << "\n";
  }

  out << m.input << ": " << grid.width() << "x" << grid.height() << ", " << grid.distinct_labels() << " basins, unresolved "
      << fmt("%.4f%%", 100.0 * grid.unresolved_fraction()) << "\n";
  if (select.fdim) out << "  fdim  " << field_text(labels.fdim) << "\n";
  if (select.sb) out << "  sb    " << field_text(labels.sb) << "\n";
  if (select.sbb) out << "  sbb   " << field_text(labels.sbb) << "\n";
  if (select.wada) {
    const auto& w = *labels.wada;
    out << "  wada  " << (w.wada ? "true" : "false");
    if (w.reason != WadaReason::None) out << " (" << reason_name(w.reason) << ")";
    out << "\n";
    for (const auto& p : w.pairs) {
      out << "        merge " << int(p.a) << "+" << int(p.b) << ": " << (p.pass ? "unchanged" : "changed") << "\n";
    }
  }
  out << "  report " << json_path << "\n";
  for (const auto& w : warnings) err << "warning: " << w.get<std::string>() << "\n";
  return failed ? kMetricFailed : kOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const std::string& plan_path, const Globals& globals, std::ostream& out, std::ostream& err) {
  if (globals.output.empty()) throw UsageError("sweep needs --output <directory>");
  SweepPlan plan;
  try {
    plan = load_sweep_plan(plan_path, globals.budget_scale);
  } catch (const std::exception& e) {
    err << "cannot use plan " << plan_path << ": " << e.what() << "\n";
    return kGenerationFailed;
  }
  SweepOptions options;
  options.output_dir = globals.output;
  options.base_seed = globals.seed;
  options.threads = globals.threads;
  options.log = [&out](const std::string& line) { out << line << std::endl; };
  SweepSummary summary;
  try {
    summary = run_sweep(plan, options);
  } catch (const std::exception& e) {
    err << "sweep failed: " << e.what() << "\n";
    return kGenerationFailed;
  }
  std::map<std::string, std::size_t> per_split;
  for (const auto& r : summary.records) ++per_split[std::string(split_name(r.split))];
  out << "points: " << summary.points_computed << " computed, " << summary.points_reused << " reused, "
      << summary.points_failed << " failed\n";
  for (Split s : {Split::Train, Split::Validation, Split::Test}) {
    out << "  " << split_name(s) << ": " << per_split[std::string(split_name(s))] << " records\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& manifest, const Globals& globals, std::ostream& out, std::ostream& err) {
  std::vector<ManifestRecord> records;
  try {
    records = read_manifest(manifest);
  } catch (const std::exception& e) {
    err << "cannot read manifest " << manifest << ": " << e.what() << "\n";
    return kGenerationFailed;
  }
  const std::filesystem::path dir = globals.output.empty() ? std::filesystem::path(".") : std::filesystem::path(globals.output);
  try {
    std::filesystem::create_directories(dir);
    write_stats(records, dir);
  } catch (const std::exception& e) {
    err << "cannot write tables: " << e.what() << "\n";
    return kGenerationFailed;
  }
  out << records.size() << " records -> " << (dir / "fdim_hist.csv").string() << ", sb_hist.csv, sbb_hist.csv, wada_counts.csv\n";
  return kOk;
}

}  // namespace

std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, double step) {
  std::vector<HistogramBin> bins;
  for (int k = 0;; ++k) {
    const double a = lo + k * step;
    if (a >= hi - 1e-12) break;
    bins.push_back({a, std::min(hi, lo + (k + 1) * step), 0});
  }
  for (double v : values) {
    std::size_t k = 0;
    if (v >= hi) k = bins.size() - 1;
    else if (v > lo) k = std::min(bins.size() - 1, static_cast<std::size_t>((v - lo) / step));
    // Float division can land one bin off near an edge.
    while (k > 0 && v < bins[k].lo) --k;
    while (k + 1 < bins.size() && v >= bins[k].hi) ++k;
    ++bins[k].count;
  }
  return bins;
}

void write_stats(const std::vector<ManifestRecord>& records, const std::filesystem::path& dir) {
  struct Table {
    const char* file;
    double lo, hi;
    std::optional<double> ManifestRecord::*field;
  };
  const Table tables[] = {
      {"fdim_hist.csv", 1.0, 2.0, &ManifestRecord::fdim_mean},
      {"sb_hist.csv", 0.0, std::log(5.0), &ManifestRecord::sb_mean},
      {"sbb_hist.csv", 0.0, std::log(5.0), &ManifestRecord::sbb_mean},
  };
  constexpr double kStep = 0.025;
  const Split order[] = {Split::Train, Split::Validation, Split::Test};
  auto present = [&](Split s) {
    return std::any_of(records.begin(), records.end(), [s](const ManifestRecord& r) { return r.split == s; });
  };

  for (const auto& t : tables) {
    std::ofstream f(dir / t.file, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + (dir / t.file).string());
    f << "split,bin_lo,bin_hi,count\n";
    for (Split s : order) {
      if (!present(s)) continue;
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.split == s && (r.*t.field)) values.push_back(*(r.*t.field));
      }
      for (const auto& b : histogram(values, t.lo, t.hi, kStep)) {
        f << split_name(s) << ',' << fmt("%.6f", b.lo) << ',' << fmt("%.6f", b.hi) << ',' << b.count << '\n';
      }
    }
  }
  std::ofstream f(dir / "wada_counts.csv", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + (dir / "wada_counts.csv").string());
  f << "split,wada,count\n";
  for (Split s : order) {
    if (!present(s)) continue;
    std::size_t yes = 0, no = 0;
    for (const auto& r : records) {
      if (r.split == s) (r.wada ? yes : no)++;
    }
    f << split_name(s) << ",true," << yes << '\n' << split_name(s) << ",false," << no << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Basins of attraction: generation, metrics and dataset building", "basinlab"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  int threads_value = 0;
  app.add_option("--seed", globals.seed, "Base seed for every Monte Carlo estimator");
  auto* threads_flag =
      app.add_option("--threads", threads_value, "Worker threads (default: BASINLAB_THREADS, else all cores)")
          ->check(CLI::PositiveNumber);
  app.add_option("--output", globals.output, "Output file (generate, measure) or directory (sweep, stats)");
  app.add_option("--budget-scale", globals.budget_scale, "Multiply every Monte Carlo box budget by this factor")
      ->check(CLI::Range(0.0, 1.0))
      ->check(CLI::Validator([](std::string& s) { return std::stod(s) > 0.0 ? std::string() : "must be > 0"; },
                             "(0, 1]"));

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Integrate a basin of attraction and write it as a PGM image");
  generate->fallthrough();
  generate->add_option("--system", gen.system, "duffing, pendulum, henon_heiles, newton, magnetic_pendulum")->required();
  generate->add_option("--gamma", gen.gamma, "Duffing forcing amplitude");
  generate->add_option("--omega", gen.omega, "Forcing frequency (duffing, pendulum)");
  generate->add_option("--F", gen.forcing, "Pendulum forcing amplitude");
  generate->add_option("--E", gen.energy, "Henon-Heiles energy");
  generate->add_option("--coeffs", gen.coeffs, "Newton polynomial coefficients a0,a1,...,a5");
  generate->add_option("--b", gen.b, "Newton relaxation re,im or magnetic pendulum drag");
  generate->add_option("--a", gen.drag_a, "Magnet circle radius");
  generate->add_option("--n", gen.n_magnets, "Number of magnets");
  generate->add_option("--region", gen.region, "x_min,x_max,y_min,y_max");
  generate->add_option("--res", gen.resolution, "Pixels per axis")->check(CLI::Range(2, 100000));
  generate->add_option("--dt", gen.dt, "Integrator step");
  generate->add_option("--t-transient", gen.t_transient, "Transient time discarded before classification");
  generate->add_option("--t-max", gen.t_max, "Integration budget per pixel");

  MeasureArgs meas;
  auto* measure = app.add_subcommand("measure", "FDim, Sb, Sbb and the Wada test of a basin image");
  measure->fallthrough();
  measure->add_option("--input,input", meas.input, "Basin image (PGM)")->required();
  measure->add_option("--metrics", meas.metrics, "Subset of fdim,sb,sbb,wada")->delimiter(',');
  measure->add_option("--repeats", meas.repeats, "Repeats per scalar metric");
  measure->add_option("--json", meas.json, "Report path (default: --output, else the input with .json)");

  std::string plan_path;
  auto* sweep = app.add_subcommand("sweep", "Generate, tile and label every point of a sweep plan");
  sweep->fallthrough();
  sweep->add_option("--plan,plan", plan_path, "Sweep plan (JSON)")->required();

  std::string manifest_path;
  auto* stats = app.add_subcommand("stats", "Per-split histogram tables of manifest labels");
  stats->fallthrough();
  stats->add_option("--manifest,manifest", manifest_path, "Manifest CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    globals.threads = resolve_threads(threads_flag, threads_value);
    if (generate->parsed()) return cmd_generate(gen, globals, out, err);
    if (measure->parsed()) return cmd_measure(meas, globals, out, err);
    if (sweep->parsed()) return cmd_sweep(plan_path, globals, out, err);
    if (stats->parsed()) return cmd_stats(manifest_path, globals, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"basinlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace basinlab::cli

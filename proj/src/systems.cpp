#include "basinlab/systems.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace basinlab {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double get(const std::map<std::string, std::string>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end() || it->second.empty()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw InvalidSystem("parameter '" + key + "' is not a number: " + it->second);
  }
}

double forcing_omega(const SystemSpec& spec) {
  if (const auto* d = std::get_if<DuffingParams>(&spec)) return d->omega;
  if (const auto* p = std::get_if<PendulumParams>(&spec)) return p->omega;
  return 0.0;
}

}  // namespace

SystemKind kind_of(const SystemSpec& spec) { return static_cast<SystemKind>(spec.index()); }

std::string_view system_name(SystemKind kind) {
  switch (kind) {
    case SystemKind::Duffing: return "duffing";
    case SystemKind::Pendulum: return "pendulum";
    case SystemKind::HenonHeiles: return "henon_heiles";
    case SystemKind::Newton: return "newton";
    case SystemKind::MagneticPendulum: return "magnetic_pendulum";
  }
  return "unknown";
}

std::optional<SystemKind> parse_system_name(std::string_view name) {
  for (SystemKind k : kAllSystems) {
    if (system_name(k) == name) return k;
  }
  if (name == "henon-heiles" || name == "hh") return SystemKind::HenonHeiles;
  if (name == "magnetic" || name == "magnetic-pendulum") return SystemKind::MagneticPendulum;
  return std::nullopt;
}

std::map<std::string, std::string> system_params(const SystemSpec& spec) {
  return std::visit(
      Overloaded{
          [](const DuffingParams& p) -> std::map<std::string, std::string> {
            return {{"gamma", fmt_double(p.gamma)}, {"omega", fmt_double(p.omega)}};
          },
          [](const PendulumParams& p) -> std::map<std::string, std::string> {
            return {{"F", fmt_double(p.forcing)}, {"omega", fmt_double(p.omega)}};
          },
          [](const HenonHeilesParams& p) -> std::map<std::string, std::string> {
            return {{"E", fmt_double(p.energy)}};
          },
          [](const NewtonParams& p) -> std::map<std::string, std::string> {
            std::map<std::string, std::string> m;
            for (std::size_t i = 0; i < p.coeffs.size(); ++i) m["a" + std::to_string(i)] = fmt_double(p.coeffs[i]);
            m["b_re"] = fmt_double(p.relaxation.real());
            m["b_im"] = fmt_double(p.relaxation.imag());
            return m;
          },
          [](const MagneticPendulumParams& p) -> std::map<std::string, std::string> {
            return {{"b", fmt_double(p.damping)}, {"a", fmt_double(p.magnet_radius)}, {"n", std::to_string(p.n_magnets)}};
          },
      },
      spec);
}

SystemSpec make_system(SystemKind kind, const std::map<std::string, std::string>& params) {
  switch (kind) {
    case SystemKind::Duffing: {
      DuffingParams p;
      p.gamma = get(params, "gamma", p.gamma);
      p.omega = get(params, "omega", p.omega);
      return p;
    }
    case SystemKind::Pendulum: {
      PendulumParams p;
      p.forcing = get(params, "F", p.forcing);
      p.omega = get(params, "omega", p.omega);
      return p;
    }
    case SystemKind::HenonHeiles: {
      HenonHeilesParams p;
      p.energy = get(params, "E", p.energy);
      return p;
    }
    case SystemKind::Newton: {
      NewtonParams p;
      for (std::size_t i = 0; i < p.coeffs.size(); ++i) p.coeffs[i] = get(params, "a" + std::to_string(i), p.coeffs[i]);
      p.relaxation = {get(params, "b_re", p.relaxation.real()), get(params, "b_im", p.relaxation.imag())};
      return p;
    }
    case SystemKind::MagneticPendulum: {
      MagneticPendulumParams p;
      p.damping = get(params, "b", p.damping);
      p.magnet_radius = get(params, "a", p.magnet_radius);
      p.n_magnets = static_cast<int>(get(params, "n", p.n_magnets));
      return p;
    }
  }
  throw InvalidSystem("unknown system kind");
}

void validate_system(const SystemSpec& spec) {
  std::visit(Overloaded{
                 [](const DuffingParams& p) {
                   if (!(p.omega > 0.0) || !std::isfinite(p.gamma)) throw InvalidSystem("duffing needs omega > 0");
                 },
                 [](const PendulumParams& p) {
                   if (!(p.omega > 0.0) || !std::isfinite(p.forcing)) throw InvalidSystem("pendulum needs omega > 0");
                 },
                 [](const HenonHeilesParams& p) {
                   if (!(p.energy > 1.0 / 6.0)) throw InvalidSystem("henon-heiles energy must exceed 1/6 for escapes");
                 },
                 [](const NewtonParams& p) {
                   if (p.relaxation == Complex{0.0, 0.0}) throw InvalidSystem("newton relaxation b must be nonzero");
                   if (std::none_of(p.coeffs.begin() + 1, p.coeffs.end(), [](double c) { return c != 0.0; })) {
                     throw InvalidSystem("newton polynomial must have degree >= 1");
                   }
                 },
                 [](const MagneticPendulumParams& p) {
                   if (p.n_magnets < 1) throw InvalidSystem("magnetic pendulum needs at least one magnet");
                   if (!(p.magnet_radius > 0.0)) throw InvalidSystem("magnet radius must be positive");
                 },
             },
             spec);
}

Region default_region(const SystemSpec& spec) {
  return std::visit(Overloaded{
                        [](const DuffingParams&) { return Region{-2.0, 2.0, -2.0, 2.0, 2}; },
                        [](const PendulumParams&) { return Region{-kPi, kPi, -4.0, 4.0, 2}; },
                        [](const HenonHeilesParams&) { return Region{-1.0, 1.0, -1.0, 1.0, 2}; },
                        [](const NewtonParams&) { return Region{-2.5, 2.5, -2.5, 2.5, 2}; },
                        [](const MagneticPendulumParams& p) {
                          const double r = p.magnet_radius + 1.0;
                          return Region{-r, r, -r, r, 2};
                        },
                    },
                    spec);
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !(t_max > 0.0) || !(match_tol > 0.0) || !(cycle_tol > 0.0) || !(stop_speed > 0.0) || !(escape_radius > 0.0) ||
      !(newton_tol > 0.0) || snapshot_count < 2 || chaos_samples < snapshot_count || newton_max_iter < 1 ||
      t_transient < 0.0 || dwell_time < 0.0) {
    throw std::invalid_argument("integrator config values must be positive");
  }
  if (!(t_transient < t_max)) throw std::invalid_argument("t_transient must be below t_max");
}

IntegratorConfig default_config(const SystemSpec& spec) {
  IntegratorConfig cfg;
  switch (kind_of(spec)) {
    case SystemKind::Duffing:
    case SystemKind::Pendulum: {
      const double period = 2.0 * kPi / forcing_omega(spec);
      cfg.dt = period / 200.0;
      cfg.t_transient = 50.0 * period;
      cfg.t_max = std::max(1.0e4, period * (50.0 + 2.0 * cfg.chaos_samples));
      break;
    }
    case SystemKind::HenonHeiles: cfg.dt = 0.005; break;
    case SystemKind::MagneticPendulum: cfg.dt = 0.01; break;
    case SystemKind::Newton: break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------

State<2> duffing_field(const DuffingParams& p, double t, const State<2>& s) {
  return {s[1], -DuffingParams::kDamping * s[1] + s[0] - s[0] * s[0] * s[0] + p.gamma * std::cos(p.omega * t)};
}

State<2> pendulum_field(const PendulumParams& p, double t, const State<2>& s) {
  return {s[1], -PendulumParams::kDamping * s[1] - std::sin(s[0]) + p.forcing * std::sin(p.omega * t)};
}

double henon_heiles_potential(double x, double y) { return 0.5 * (x * x + y * y) + x * x * y - y * y * y / 3.0; }

double henon_heiles_energy(const State<4>& s) {
  return 0.5 * (s[2] * s[2] + s[3] * s[3]) + henon_heiles_potential(s[0], s[1]);
}

State<4> henon_heiles_field(const State<4>& s) {
  const double x = s[0], y = s[1];
  return {s[2], s[3], -x - 2.0 * x * y, -y - x * x + y * y};
}

std::vector<std::array<double, 2>> magnet_positions(const MagneticPendulumParams& p) {
  std::vector<std::array<double, 2>> out;
  out.reserve(static_cast<std::size_t>(p.n_magnets));
  for (int i = 0; i < p.n_magnets; ++i) {
    const double angle = 2.0 * kPi * i / p.n_magnets;
    out.push_back({p.magnet_radius * std::cos(angle), p.magnet_radius * std::sin(angle)});
  }
  return out;
}

State<4> magnetic_field(const MagneticPendulumParams& p, std::span<const std::array<double, 2>> magnets,
                        const State<4>& s) {
  constexpr double h2 = MagneticPendulumParams::kHeight * MagneticPendulumParams::kHeight;
  double fx = 0.0, fy = 0.0;
  for (const auto& m : magnets) {
    const double dx = m[0] - s[0];
    const double dy = m[1] - s[1];
    const double d2 = dx * dx + dy * dy + h2;
    const double inv = 1.0 / (d2 * std::sqrt(d2));
    fx += dx * inv;
    fy += dy * inv;
  }
  return {s[2], s[3], -p.damping * s[2] - MagneticPendulumParams::kSpring * s[0] + fx,
          -p.damping * s[3] - MagneticPendulumParams::kSpring * s[1] + fy};
}

// ---------------------------------------------------------------------------

namespace {

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

double section_distance(const std::array<double, 2>& a, const std::array<double, 2>& b, bool periodic) {
  double dx = a[0] - b[0];
  if (periodic) dx = std::remainder(dx, 2.0 * kPi);
  return std::hypot(dx, a[1] - b[1]);
}

// Smallest p <= window/2 with window[k] ~ window[k+p] for all k.
int detect_period(std::span<const std::array<double, 2>> window, double tol, bool periodic) {
  const auto n = window.size();
  for (std::size_t p = 1; p <= n / 2; ++p) {
    bool ok = true;
    for (std::size_t k = 0; k + p < n && ok; ++k) ok = section_distance(window[k], window[k + p], periodic) <= tol;
    if (ok) return static_cast<int>(p);
  }
  return 0;
}

// Driven systems are x'' = accel(x, x', g(t)) with g periodic in the forcing
// period. The step size divides the period exactly, so g only ever needs
// evaluating on the half-step lattice of one period; tabulating it is the
// same RK4 update as rk4_step without the trig calls.
struct ForcingTable {
  double period = 0.0;
  double h = 0.0;
  int steps = 0;
  long transient_periods = 0;
  std::vector<double> g;

  ForcingTable(double omega, bool use_sine, const IntegratorConfig& cfg) {
    period = 2.0 * kPi / omega;
    steps = std::max(1, static_cast<int>(std::lround(period / cfg.dt)));
    h = period / steps;
    transient_periods = static_cast<long>(std::ceil(cfg.t_transient / period - 1e-9));
    g.resize(2 * static_cast<std::size_t>(steps) + 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = 0.5 * h * static_cast<double>(i);
      g[i] = use_sine ? std::sin(omega * t) : std::cos(omega * t);
    }
  }
};

template <class Accel>
inline void rk4_forced(Accel& accel, double h, double g0, double gm, double g1, double& x, double& v) {
  const double k1x = v, k1v = accel(x, v, g0);
  const double k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, k2x, gm);
  const double k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, k3x, gm);
  const double k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x, g1);
  x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// Per-trajectory bookkeeping after each forcing period. Returns true once the
// signature is settled.
struct DrivenTracker {
  DrivenTracker() = default;
  DrivenTracker(const ForcingTable* t, const IntegratorConfig* c, bool p) : table(t), cfg(c), periodic(p) {}

  const ForcingTable* table = nullptr;
  const IntegratorConfig* cfg = nullptr;
  bool periodic = false;
  long k = 0;
  std::vector<std::array<double, 2>> samples;
  DrivenSignature sig;

  bool after_period(double x, double v) {
    ++k;
    if (!std::isfinite(x) || !std::isfinite(v)) {
      sig = DrivenSignature{};
      return true;
    }
    if (k <= table->transient_periods) return false;
    samples.push_back({periodic ? wrap_angle(x) : x, v});
    const auto window = static_cast<std::size_t>(cfg->snapshot_count);
    if (samples.size() >= window) {
      std::span<const std::array<double, 2>> tail(samples.data() + samples.size() - window, window);
      if (int p = detect_period(tail, cfg->cycle_tol, periodic); p > 0) {
        sig.kind = DrivenSignature::Kind::Cycle;
        sig.points.assign(samples.end() - p, samples.end());
        return true;
      }
    }
    if (samples.size() >= static_cast<std::size_t>(cfg->chaos_samples)) {
      sig.kind = DrivenSignature::Kind::Cloud;
      sig.points = samples;
      return true;
    }
    // Unresolved if the next period would overrun t_max.
    return static_cast<double>(k + 1) * table->period > cfg->t_max;
  }
};

template <class Accel>
DrivenSignature trace_with(Accel accel, const ForcingTable& table, bool periodic, const State<2>& initial,
                           const IntegratorConfig& cfg) {
  DrivenTracker tracker(&table, &cfg, periodic);
  if (static_cast<double>(table.transient_periods + 1) * table.period > cfg.t_max) return {};
  double x = initial[0], v = initial[1];
  while (true) {
    for (int j = 0; j < table.steps; ++j) {
      rk4_forced(accel, table.h, table.g[2 * j], table.g[2 * j + 1], table.g[2 * j + 2], x, v);
    }
    if (tracker.after_period(x, v)) return std::move(tracker.sig);
  }
}

// Same arithmetic as trace_with, kLanes trajectories advanced in lockstep so
// the dependency chains of independent pixels interleave.
template <class Accel>
void trace_lanes(Accel accel, const ForcingTable& table, bool periodic, std::span<const State<2>> initials,
                 const IntegratorConfig& cfg, std::span<DrivenSignature> out) {
  constexpr int kLanes = 8;
  if (static_cast<double>(table.transient_periods + 1) * table.period > cfg.t_max) {
    std::fill(out.begin(), out.end(), DrivenSignature{});
    return;
  }
  double x[kLanes] = {}, v[kLanes] = {};
  std::array<DrivenTracker, kLanes> trackers;
  std::array<std::size_t, kLanes> owner{};
  std::array<bool, kLanes> active{};
  std::size_t next = 0;
  auto load = [&](int lane) {
    if (next < initials.size()) {
      trackers[lane] = DrivenTracker(&table, &cfg, periodic);
      owner[lane] = next;
      x[lane] = initials[next][0];
      v[lane] = initials[next][1];
      active[lane] = true;
      ++next;
    } else {
      active[lane] = false;
      x[lane] = v[lane] = 0.0;
    }
  };
  for (int l = 0; l < kLanes; ++l) load(l);

  while (std::any_of(active.begin(), active.end(), [](bool a) { return a; })) {
    for (int j = 0; j < table.steps; ++j) {
      const double g0 = table.g[2 * j], gm = table.g[2 * j + 1], g1 = table.g[2 * j + 2];
      for (int l = 0; l < kLanes; ++l) rk4_forced(accel, table.h, g0, gm, g1, x[l], v[l]);
    }
    for (int l = 0; l < kLanes; ++l) {
      if (!active[l]) continue;
      if (trackers[l].after_period(x[l], v[l])) {
        out[owner[l]] = std::move(trackers[l].sig);
        load(l);
      }
    }
  }
}

auto duffing_accel(const DuffingParams& d) {
  return [gamma = d.gamma](double x, double v, double g) {
    return -DuffingParams::kDamping * v + x - x * x * x + gamma * g;
  };
}

auto pendulum_accel(const PendulumParams& p) {
  return [forcing = p.forcing](double x, double v, double g) {
    return -PendulumParams::kDamping * v - std::sin(x) + forcing * g;
  };
}

}  // namespace

DrivenSignature trace_driven(const SystemSpec& spec, const State<2>& initial, const IntegratorConfig& cfg) {
  if (const auto* d = std::get_if<DuffingParams>(&spec)) {
    return trace_with(duffing_accel(*d), ForcingTable(d->omega, false, cfg), false, initial, cfg);
  }
  if (const auto* p = std::get_if<PendulumParams>(&spec)) {
    return trace_with(pendulum_accel(*p), ForcingTable(p->omega, true, cfg), true, initial, cfg);
  }
  throw InvalidSystem("trace_driven needs a Duffing or pendulum system");
}

void trace_driven_batch(const SystemSpec& spec, std::span<const State<2>> initials, const IntegratorConfig& cfg,
                        std::span<DrivenSignature> out) {
  if (out.size() != initials.size()) throw std::invalid_argument("trace_driven_batch: output size mismatch");
  if (const auto* d = std::get_if<DuffingParams>(&spec)) {
    trace_lanes(duffing_accel(*d), ForcingTable(d->omega, false, cfg), false, initials, cfg, out);
    return;
  }
  if (const auto* p = std::get_if<PendulumParams>(&spec)) {
    trace_lanes(pendulum_accel(*p), ForcingTable(p->omega, true, cfg), true, initials, cfg, out);
    return;
  }
  throw InvalidSystem("trace_driven_batch needs a Duffing or pendulum system");
}

State<4> hh_initial_state(double x, double y, double energy) {
  const double r = std::hypot(x, y);
  if (r == 0.0) throw UndefinedTangent("tangential direction undefined at the origin");
  const double v = henon_heiles_potential(x, y);
  if (!(v < energy)) throw ForbiddenRegion("initial position is energetically forbidden");
  const double p = std::sqrt(2.0 * (energy - v));
  return {x, y, -p * y / r, p * x / r};
}

Label exit_sector(double angle) {
  double deg = angle * 180.0 / kPi;
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  if (deg >= 30.0 && deg < 150.0) return 0;
  if (deg >= 150.0 && deg < 270.0) return 1;
  return 2;
}

Label classify_escape(const State<4>& initial, const IntegratorConfig& cfg) {
  const double radius = cfg.escape_radius;
  State<4> s = initial;
  double r = std::hypot(s[0], s[1]);
  if (r > radius) return exit_sector(std::atan2(s[1], s[0]));
  auto f = [](double, const State<4>& st) { return henon_heiles_field(st); };
  const auto max_steps = static_cast<long>(std::ceil(cfg.t_max / cfg.dt));
  try {
    for (long i = 0; i < max_steps; ++i) {
      const State<4> next = rk4_step(s, i * cfg.dt, cfg.dt, f);
      const double rn = std::hypot(next[0], next[1]);
      if (rn > radius) {
        const double frac = (radius - r) / (rn - r);
        const double x = s[0] + frac * (next[0] - s[0]);
        const double y = s[1] + frac * (next[1] - s[1]);
        return exit_sector(std::atan2(y, x));
      }
      s = next;
      r = rn;
    }
  } catch (const NumericalBlowup&) {
  }
  return kUnresolved;
}

NewtonOutcome classify_newton(Complex z0, const NewtonParams& params, std::span<const Complex> roots,
                              const IntegratorConfig& cfg) {
  NewtonOutcome out;
  Complex z = z0;
  bool finite = true;
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    Complex p, dp;
    poly_eval_deriv(params.coeffs, z, p, dp);
    if (p == 0.0) break;
    if (dp == 0.0) {
      out.final_z = z;
      out.iterations = it;
      return out;
    }
    const Complex step = params.relaxation * p / dp;
    z -= step;
    out.iterations = it + 1;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      finite = false;
      break;
    }
    if (std::abs(step) < cfg.newton_tol) break;
  }
  out.final_z = z;
  if (!finite) return out;
  double best = cfg.match_tol;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double d = std::abs(z - roots[i]);
    if (d <= best) {
      best = d;
      out.label = static_cast<Label>(i);
    }
  }
  return out;
}

Label classify_magnetic(const State<4>& initial, const MagneticPendulumParams& params, const IntegratorConfig& cfg) {
  const auto magnets = magnet_positions(params);
  auto f = [&](double, const State<4>& s) { return magnetic_field(params, magnets, s); };
  State<4> s = initial;
  const auto max_steps = static_cast<long>(std::ceil(cfg.t_max / cfg.dt));
  double dwell = 0.0;
  try {
    for (long i = 0; i <= max_steps; ++i) {
      const double speed = std::hypot(s[2], s[3]);
      int nearest = -1;
      if (speed < cfg.stop_speed) {
        for (std::size_t m = 0; m < magnets.size(); ++m) {
          if (std::hypot(s[0] - magnets[m][0], s[1] - magnets[m][1]) < cfg.match_tol) nearest = static_cast<int>(m);
        }
      }
      if (nearest >= 0) {
        if (dwell >= cfg.dwell_time) return static_cast<Label>(nearest);
        dwell += cfg.dt;
      } else {
        dwell = 0.0;
      }
      if (i == max_steps) break;
      s = rk4_step(s, i * cfg.dt, cfg.dt, f);
    }
  } catch (const NumericalBlowup&) {
  }
  return kUnresolved;
}

}  // namespace basinlab

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "basinlab/grid.h"
#include "basinlab/integrate.h"
#include "basinlab/roots.h"

namespace basinlab {

// x'' + 0.15 x' - x + x^3 = gamma cos(omega t)
struct DuffingParams {
  double gamma = 0.3;
  double omega = 1.0;
  static constexpr double kDamping = 0.15;
};

// theta'' + 0.2 theta' + sin(theta) = forcing sin(omega t)
struct PendulumParams {
  double forcing = 1.0;
  double omega = 1.0;
  static constexpr double kDamping = 0.2;
};

// H = (px^2 + py^2)/2 + (x^2 + y^2)/2 + x^2 y - y^3/3
struct HenonHeilesParams {
  double energy = 0.25;
};

// z <- z - b p(z)/p'(z), p of degree <= 5 with real coefficients a_0..a_5.
struct NewtonParams {
  std::array<double, 6> coeffs{-1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  std::complex<double> relaxation{1.0, 0.0};
};

// Pendulum bob at height 0.2 above n magnets equally spaced on a circle of
// radius magnet_radius; spring constant 0.2, linear drag `damping`.
struct MagneticPendulumParams {
  double damping = 0.2;
  double magnet_radius = 2.0;
  int n_magnets = 3;
  static constexpr double kSpring = 0.2;
  static constexpr double kHeight = 0.2;
};

using SystemSpec =
    std::variant<DuffingParams, PendulumParams, HenonHeilesParams, NewtonParams, MagneticPendulumParams>;

enum class SystemKind { Duffing, Pendulum, HenonHeiles, Newton, MagneticPendulum };

inline constexpr std::array<SystemKind, 5> kAllSystems{SystemKind::Duffing, SystemKind::Pendulum,
                                                       SystemKind::HenonHeiles, SystemKind::Newton,
                                                       SystemKind::MagneticPendulum};

SystemKind kind_of(const SystemSpec& spec);
std::string_view system_name(SystemKind kind);
/// Accepts the names produced by system_name ("duffing", "pendulum",
/// "henon_heiles", "newton", "magnetic_pendulum").
std::optional<SystemKind> parse_system_name(std::string_view name);

/// Flat key/value view of the parameters, used for manifests and reports.
std::map<std::string, std::string> system_params(const SystemSpec& spec);
/// Inverse of system_params. Missing keys fall back to defaults.
SystemSpec make_system(SystemKind kind, const std::map<std::string, std::string>& params);

class InvalidSystem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidSystem for values the equations cannot accept.
void validate_system(const SystemSpec& spec);

/// Default phase-space window per system (resolution left at 2).
Region default_region(const SystemSpec& spec);

struct IntegratorConfig {
  double dt = 0.01;
  double t_transient = 0.0;
  double t_max = 1.0e4;
  int snapshot_count = 8;
  // Stroboscopic samples collected before an aperiodic orbit is accepted as a
  // chaotic attractor and matched by cell overlap.
  int chaos_samples = 64;
  double match_tol = 0.05;
  // Stroboscopic repeat distance required before a cycle is accepted. Much
  // tighter than match_tol so chaotic orbits briefly shadowing an unstable
  // cycle are not mistaken for it.
  double cycle_tol = 5.0e-5;
  double stop_speed = 1.0e-3;
  double dwell_time = 1.0;
  double escape_radius = 3.0;
  int newton_max_iter = 200;
  double newton_tol = 1.0e-9;

  void validate() const;
};

/// Forcing-period aware defaults: driven systems get dt = T/200 and a
/// 50-period transient; Henon-Heiles dt = 0.005; magnetic pendulum dt = 0.01.
IntegratorConfig default_config(const SystemSpec& spec);

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

State<2> duffing_field(const DuffingParams& p, double t, const State<2>& s);
State<2> pendulum_field(const PendulumParams& p, double t, const State<2>& s);
State<4> henon_heiles_field(const State<4>& s);
double henon_heiles_potential(double x, double y);
double henon_heiles_energy(const State<4>& s);
State<4> magnetic_field(const MagneticPendulumParams& p, std::span<const std::array<double, 2>> magnets,
                        const State<4>& s);
std::vector<std::array<double, 2>> magnet_positions(const MagneticPendulumParams& p);

// ---------------------------------------------------------------------------
// Per-trajectory classification
// ---------------------------------------------------------------------------

/// What one driven trajectory looks like on the stroboscopic section.
struct DrivenSignature {
  enum class Kind { Unresolved, Cycle, Cloud };
  Kind kind = Kind::Unresolved;
  // Cycle: the p points of the periodic orbit. Cloud: every sample taken.
  std::vector<std::array<double, 2>> points;
};

/// Integrates the transient, then samples the state once per forcing period
/// until the last `snapshot_count` samples repeat within cycle_tol with some
/// period p <= snapshot_count/2 (Cycle) or `chaos_samples` samples pass without
/// repetition (Cloud). Pendulum angles are wrapped to [-pi, pi).
DrivenSignature trace_driven(const SystemSpec& spec, const State<2>& initial, const IntegratorConfig& cfg);

/// trace_driven for many initial states at once; bit-identical results.
void trace_driven_batch(const SystemSpec& spec, std::span<const State<2>> initials, const IntegratorConfig& cfg,
                        std::span<DrivenSignature> out);

class ForbiddenRegion : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};
class UndefinedTangent : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Tangential shooting: |p| = sqrt(2(E - V)), direction (-y, x)/r.
State<4> hh_initial_state(double x, double y, double energy);

/// Exit sector of a Henon-Heiles trajectory: 0 (90 deg), 1 (210 deg),
/// 2 (330 deg); kUnresolved if still bounded at t_max.
Label classify_escape(const State<4>& initial, const IntegratorConfig& cfg);
/// Sector for an escape angle in radians.
Label exit_sector(double angle);

struct NewtonOutcome {
  Label label = kUnresolved;
  int iterations = 0;
  Complex final_z{};
};

/// Relaxed Newton iteration from z0; label is the index into `roots` of the
/// nearest root within match_tol.
NewtonOutcome classify_newton(Complex z0, const NewtonParams& params, std::span<const Complex> roots,
                              const IntegratorConfig& cfg);

/// Magnet index where the bob comes to rest, or kUnresolved at t_max.
Label classify_magnetic(const State<4>& initial, const MagneticPendulumParams& params, const IntegratorConfig& cfg);

}  // namespace basinlab

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace basinlab {

class NumericalBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
inline bool all_finite(const State<N>& s) {
  for (double v : s) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Classical four-stage Runge-Kutta step for ds/dt = f(t, s).
/// Throws NumericalBlowup when the update is not finite.
template <std::size_t N, class F>
State<N> rk4_step(const State<N>& s, double t, double dt, F&& f) {
  const State<N> k1 = f(t, s);
  State<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
  const State<N> k2 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
  const State<N> k3 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + dt * k3[i];
  const State<N> k4 = f(t + dt, tmp);
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (!all_finite(out)) throw NumericalBlowup("RK4 step produced a non-finite state");
  return out;
}

}  // namespace basinlab

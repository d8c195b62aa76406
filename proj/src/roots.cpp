#include "basinlab/roots.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace basinlab {

Complex poly_eval(std::span<const double> coeffs, Complex z) {
  Complex p = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) p = p * z + *it;
  return p;
}

void poly_eval_deriv(std::span<const double> coeffs, Complex z, Complex& p, Complex& dp) {
  p = 0.0;
  dp = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
}

namespace {

double sort_angle(Complex z) {
  double a = std::arg(z);
  // Real roots come out of the iteration with a stray imaginary part of
  // either sign; pin them to the axis so the ordering is stable.
  if (std::abs(z.imag()) <= 1e-10 * std::max(1.0, std::abs(z))) a = z.real() >= 0.0 ? 0.0 : std::numbers::pi;
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

std::vector<Complex> polynomial_roots(std::span<const double> coeffs_in) {
  std::vector<double> a(coeffs_in.begin(), coeffs_in.end());
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  if (a.size() < 2) throw RootFindingFailed("polynomial must have degree >= 1");
  const auto n = a.size() - 1;

  double max_abs = 0.0;
  for (double c : a) max_abs = std::max(max_abs, std::abs(c));
  double cauchy = 0.0;
  for (std::size_t i = 0; i < n; ++i) cauchy = std::max(cauchy, std::abs(a[i] / a[n]));
  const double radius = 1.0 + cauchy;

  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(radius, theta);
  }

  constexpr int kMaxIter = 500;
  bool converged = false;
  for (int it = 0; it < kMaxIter && !converged; ++it) {
    double max_step = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex p, dp;
      poly_eval_deriv(a, z[k], p, dp);
      if (p == 0.0) continue;
      const Complex ratio = p / dp;
      Complex sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      }
      const Complex w = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
      z[k] -= w;
      max_step = std::max(max_step, std::abs(w) / std::max(1.0, std::abs(z[k])));
    }
    converged = max_step < 1e-15;
  }

  // Polish with plain Newton; harmless for simple roots, helps clustered ones.
  for (auto& root : z) {
    for (int it = 0; it < 3; ++it) {
      Complex p, dp;
      poly_eval_deriv(a, root, p, dp);
      if (p == 0.0 || dp == 0.0) break;
      const Complex next = root - p / dp;
      Complex pn = poly_eval(a, next);
      if (std::abs(pn) >= std::abs(p)) break;
      root = next;
    }
  }

  const double tol = 1e-9 * max_abs;
  for (const auto& root : z) {
    if (!(std::abs(poly_eval(a, root)) < tol)) {
      throw RootFindingFailed("root residual above tolerance");
    }
  }

  std::sort(z.begin(), z.end(), [](Complex l, Complex r) {
    const double al = sort_angle(l), ar = sort_angle(r);
    if (al != ar) return al < ar;
    return std::abs(l) < std::abs(r);
  });
  return z;
}

}  // namespace basinlab

#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace basinlab {

using Complex = std::complex<double>;

class RootFindingFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// p(z) = sum a_n z^n, coefficients in ascending order.
Complex poly_eval(std::span<const double> coeffs, Complex z);
/// Evaluates p and p' together (Horner).
void poly_eval_deriv(std::span<const double> coeffs, Complex z, Complex& p, Complex& dp);

/// All roots of a real polynomial via Aberth-Ehrlich simultaneous iteration.
/// Trailing zero coefficients are dropped; the remaining leading coefficient
/// must be nonzero and the degree >= 1. Every returned root satisfies
/// |p(root)| < 1e-9 * max|a_n| or RootFindingFailed is thrown. Roots come back
/// sorted by argument in [0, 2pi), then by modulus.
std::vector<Complex> polynomial_roots(std::span<const double> coeffs);

}  // namespace basinlab

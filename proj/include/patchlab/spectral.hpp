#pragma once

// Discrete-Fourier operators on uniformly sampled 2π-periodic real data.
//
// Samples f_j = f(2πj/n), n even. The trigonometric interpolant is
//   f(ξ) = Σ_{|k|<n/2} c_k e^{ikξ} + c_{n/2} cos(nξ/2),
// and every operator below acts on that interpolant through a Fourier
// multiplier. The Nyquist mode is kept as a cosine: operators that map it
// to a sine (∂ξ, ℋ, antiderivative) send it to zero on the grid.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace patchlab::spectral {

using Coefficients = std::vector<std::complex<double>>;

/// Unnormalized forward real DFT, k = 0..n/2.
Coefficients forward(std::span<const double> f);

/// Inverse of forward() (including the 1/n normalization).
std::vector<double> inverse(const Coefficients& c, std::size_t n);

/// Applies mult(k) (k = 0..n/2) to the coefficients of f. mult(n/2) is
/// applied to the real Nyquist coefficient; its imaginary part is dropped.
template <class Multiplier>
std::vector<double> apply(std::span<const double> f, Multiplier mult) {
  Coefficients c = forward(f);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mult(k);
  return inverse(c, f.size());
}

/// ∂ξ f.
std::vector<double> derivative(std::span<const double> f);

/// Periodic Hilbert transform, multiplier −i·sgn(k).
std::vector<double> hilbert(std::span<const double> f);

/// ∫_𝕋 f(η) ln|2 sin((ξ−η)/2)| dη, multiplier −π/|k| (zero on k = 0).
std::vector<double> log_kernel(std::span<const double> f);

/// ∫₀^ξ f(η) dη = mean(f)·ξ + P(ξ) − P(0), P the mean-free antiderivative.
std::vector<double> cumulative_integral(std::span<const double> f);

/// Trapezoid quadrature over 𝕋 (spectrally accurate for smooth f).
double integrate(std::span<const double> f);

/// Arithmetic mean of the samples, pairwise-summed.
double mean(std::span<const double> f);

/// Energy fraction carried by modes k > n/3 relative to all k ≥ 1.
double tail_energy_fraction(std::span<const double> f);

/// Evaluates the trigonometric interpolant of samples with coefficients c
/// (as returned by forward()) at an arbitrary point.
double evaluate(const Coefficients& c, std::size_t n, double xi);

/// Derivative of the interpolant at an arbitrary point.
double evaluate_derivative(const Coefficients& c, std::size_t n, double xi);

}  // namespace patchlab::spectral

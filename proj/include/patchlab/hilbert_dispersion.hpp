#pragma once

#include <span>
#include <vector>

namespace patchlab {

/// Real samples of a 2π-periodic function on the uniform label grid.
class PeriodicScalarField {
 public:
  PeriodicScalarField() = default;
  explicit PeriodicScalarField(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double mean() const noexcept { return mean_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
};

/// ℋf(ξ) = (1/2π) P.V.∫ f(η) cot((ξ−η)/2) dη as the multiplier −i·sgn(k).
PeriodicScalarField hilbert(const PeriodicScalarField& f);

/// Alternate-point rule: (h/π) Σ_{i−j odd} f_j cot((ξ_i − ξ_j)/2). Independent
/// of the FFT route.
PeriodicScalarField pv_cot_quadrature(const PeriodicScalarField& f);

/// e^{tπℋ}f = cos(πt) f + sin(πt) ℋf, applied to the full field. On the
/// mean mode this gives cos(πt)·mean, not the exponential of the multiplier.
PeriodicScalarField dispersion_group(const PeriodicScalarField& f, double t);

/// [ℋ, h]f = ℋ(hf) − hℋf.
PeriodicScalarField commutator(const PeriodicScalarField& h, const PeriodicScalarField& f);

struct CommutatorReport {
  double sup = 0.0;
  double seminorm = 0.0;
  double holder_norm() const noexcept { return sup + seminorm; }
};

/// Sup norm and grid Hölder-β seminorm of [ℋ, h]f, 0 < β < 1.
CommutatorReport commutator_diagnostic(const PeriodicScalarField& h,
                                       const PeriodicScalarField& f, double beta);

}  // namespace patchlab

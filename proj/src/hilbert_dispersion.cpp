#include "patchlab/hilbert_dispersion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "patchlab/norms.hpp"
#include "patchlab/parallel.hpp"
#include "patchlab/spectral.hpp"

namespace patchlab {

PeriodicScalarField::PeriodicScalarField(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("periodic field has non-finite entries");
  mean_ = spectral::mean(values_);
}

PeriodicScalarField hilbert(const PeriodicScalarField& f) {
  return PeriodicScalarField(spectral::hilbert(f.span()));
}

PeriodicScalarField pv_cot_quadrature(const PeriodicScalarField& f) {
  const std::size_t n = f.size();
  if (n % 2 != 0) throw std::invalid_argument("pv_cot_quadrature needs an even node count");
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  // cot((ξ_i − ξ_j)/2) depends on (i − j) mod n; only odd offsets are used.
  std::vector<double> cot(n, 0.0);
  for (std::size_t m = 1; m < n; m += 2)
    cot[m] = 1.0 / std::tan(0.5 * h * static_cast<double>(m));
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> terms;
    terms.reserve(n / 2);
    for (std::size_t i = begin; i < end; ++i) {
      terms.clear();
      for (std::size_t m = 1; m < n; m += 2) {
        std::size_t j = i >= m ? i - m : i + n - m;
        terms.push_back(f[j] * cot[m]);
      }
      out[i] = h / std::numbers::pi * pairwise_sum(terms);
    }
  });
  return PeriodicScalarField(std::move(out));
}

PeriodicScalarField dispersion_group(const PeriodicScalarField& f, double t) {
  const double c = std::cos(std::numbers::pi * t);
  const double s = std::sin(std::numbers::pi * t);
  std::vector<double> hf = spectral::hilbert(f.span());
  std::vector<double> out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = c * f[j] + s * hf[j];
  return PeriodicScalarField(std::move(out));
}

PeriodicScalarField commutator(const PeriodicScalarField& h, const PeriodicScalarField& f) {
  if (h.size() != f.size()) throw std::invalid_argument("commutator: size mismatch");
  const std::size_t n = f.size();
  std::vector<double> hf(n);
  for (std::size_t j = 0; j < n; ++j) hf[j] = h[j] * f[j];
  std::vector<double> h_of_hf = spectral::hilbert(hf);
  std::vector<double> h_of_f = spectral::hilbert(f.span());
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = h_of_hf[j] - h[j] * h_of_f[j];
  return PeriodicScalarField(std::move(out));
}

CommutatorReport commutator_diagnostic(const PeriodicScalarField& h,
                                       const PeriodicScalarField& f, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("commutator_diagnostic: beta in (0,1)");
  PeriodicScalarField c = commutator(h, f);
  return {sup_norm(c.span()), holder_seminorm(c.span(), beta)};
}

}  // namespace patchlab

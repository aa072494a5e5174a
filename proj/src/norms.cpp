#include "patchlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "patchlab/parallel.hpp"

namespace patchlab {

double sup_norm(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> lp_norms(std::span<const double> f, std::span<const double> g,
                             std::span<const double> p_grid) {
  if (f.size() != g.size()) throw std::invalid_argument("lp_norms: f and g lengths differ");
  const double mass = pairwise_sum(g);
  const double peak = sup_norm(f);
  std::vector<double> out;
  out.reserve(p_grid.size());
  std::vector<double> terms(f.size());
  for (double p : p_grid) {
    if (std::isinf(p)) {
      out.push_back(peak);
      continue;
    }
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norms: p must be >= 1");
    if (peak == 0.0) {
      out.push_back(0.0);
      continue;
    }
    for (std::size_t j = 0; j < f.size(); ++j)
      terms[j] = g[j] / mass * std::pow(std::abs(f[j]) / peak, p);
    out.push_back(peak * std::pow(pairwise_sum(terms), 1.0 / p));
  }
  return out;
}

double holder_seminorm(std::span<const double> f, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder_seminorm: beta in (0,1]");
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double osc = *hi - *lo;
  double best = 0.0;
  for (std::size_t m = 1; m <= n / 2; ++m) {
    const double scale = std::pow(h * static_cast<double>(m), -beta);
    if (osc * scale <= best) break;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t k = j + m < n ? j + m : j + m - n;
      row = std::max(row, std::abs(f[k] - f[j]));
    }
    best = std::max(best, row * scale);
  }
  return best;
}

double inflation_slope(std::span<const double> p_grid, std::span<const double> norms) {
  if (p_grid.size() != norms.size()) throw std::invalid_argument("inflation_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = p_grid.size() / 2; i < p_grid.size(); ++i) {
    if (std::isinf(p_grid[i]) || !(norms[i] > 0.0)) continue;
    lx.push_back(std::log(p_grid[i]));
    ly.push_back(std::log(norms[i]));
  }
  if (lx.size() < 2) throw std::invalid_argument("inflation_slope: need two finite p values");
  const double k = static_cast<double>(lx.size());
  double mx = pairwise_sum(lx) / k, my = pairwise_sum(ly) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace patchlab

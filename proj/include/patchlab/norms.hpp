#pragma once

#include <limits>
#include <span>
#include <vector>

namespace patchlab {

inline constexpr double kSupNorm = std::numeric_limits<double>::infinity();

/// ‖f‖_{L^p(μ)} for each p in p_grid, with μ the arc-length measure g dξ
/// normalized to unit mass. p = kSupNorm gives the maximum over nodes.
std::vector<double> lp_norms(std::span<const double> f, std::span<const double> g,
                             std::span<const double> p_grid);

/// max_{j≠k} |f_j − f_k| / d_𝕋(ξ_j, ξ_k)^β on the uniform label grid.
/// Separations are scanned upward and the scan stops once osc(f)/d^β can no
/// longer beat the running maximum.
double holder_seminorm(std::span<const double> f, double beta);

double sup_norm(std::span<const double> f);

/// Least-squares slope of log(norm) against log(p) over the finite p values
/// in the upper half of p_grid (by index).
double inflation_slope(std::span<const double> p_grid, std::span<const double> norms);

}  // namespace patchlab

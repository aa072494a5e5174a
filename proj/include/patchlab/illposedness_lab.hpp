#pragma once

#include <array>
#include <string>
#include <vector>

#include "patchlab/curve_geometry.hpp"
#include "patchlab/norms.hpp"
#include "patchlab/patch_evolution.hpp"

namespace patchlab {

struct IllposedDataSpec {
  double epsilon = 0.1;  ///< feature half-width; 0 gives the circle
  std::size_t n_nodes = 4096;
  double blend_width = 0.3;
  double base_radius = 1.0;
};

/// FeatureUnresolved if 0 < ε < 10·(2π/n); ConfigError for other bad fields.
void validate(const IllposedDataSpec& spec);

/// sign(ξ)·(ln 1/|ξ|)^{−1/2} for 0 < |ξ| < 1, zero at ξ = 0.
double rough_feature(double xi);

/// 1 on |ξ| ≤ ε, C^∞ step down to 0 across (ε, ε + width).
double blend_weight(double abs_xi, double epsilon, double width);

struct IllposedData {
  CurveState curve;
  IntrinsicState intrinsic;
  std::vector<double> feature_weight;  ///< blend weight w per node
  std::array<double, 3> coefficients{};
  int newton_iterations = 0;
  double closure_residual = 0.0;
};

/// κ = wF + (1 − w)(1/R + c₀ + c₁ cos ξ + c₂ sin ξ) on g ≡ R, anchored at
/// θ₀ = π/2, γ₀ = (R, 0), with (c₀, c₁, c₂) closing the curve.
IllposedData build_illposed_data(const IllposedDataSpec& spec);

struct ForcingTerms {
  std::vector<double> a;              ///< −∂ₛv·T
  std::vector<double> hilbert_kappa;  ///< ℋκ
  std::vector<double> f_l;
  std::vector<double> f_n;
};

/// F_L = −πℋκ + P.V.∫ κ(η) N(η)·N(ξ) (D·T(ξ))/|D|² g(η) dη and F_N from the
/// two integrable kernels.
ForcingTerms forcing_terms(const CurveState& curve, const GeometricFrame& frame);

struct ReassemblyCheck {
  /// max |aκ + πℋκ + F_L + F_N − (−2κ ∂ₛv·T − ∂²ₛv·N)|, right side from the
  /// vector routes of ∂ₛv and ∂²ₛv.
  double literal = 0.0;
  /// Same with the left side taken as 3aκ + πℋκ + F_L + F_N.
  double corrected = 0.0;
  double scale = 0.0;  ///< max |right side|
};

ReassemblyCheck reassembly_check(const CurveState& curve, const GeometricFrame& frame);

/// ∫₀^{t_k} a dτ for every logged time. Fourth-order composite rule on a
/// uniform log of at least four entries, trapezoid otherwise.
std::vector<std::vector<double>> accumulate_a(const std::vector<double>& times,
                                              const std::vector<std::vector<double>>& history);

struct RemainderRow {
  double t = 0.0;
  double sup = 0.0;
  double holder_half = 0.0;
};

/// R(t) = e^{−∫₀ᵗ a}κ(t) − e^{tπℋ}κ₀ at every curve snapshot whose time is
/// in the a log. MissingHistory if the trajectory has no a log.
std::vector<RemainderRow> duhamel_decompose(const Trajectory& trajectory);

struct ForcingNormRow {
  double t = 0.0;
  double a_sup = 0.0, a_holder = 0.0;
  double fl_sup = 0.0, fl_holder = 0.0;
  double fn_sup = 0.0, fn_holder = 0.0;
};

struct DiagnosticsReport {
  IllposedDataSpec spec;
  double dt = 0.0;
  double forcing_beta = 0.5;
  std::vector<double> p_grid;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> lp_table;         ///< [t][p], nonlinear run
  std::vector<double> slopes;
  std::vector<std::vector<double>> linear_lp_table;  ///< [t][p], e^{tπℋ}κ₀
  std::vector<double> linear_slopes;
  std::vector<RemainderRow> remainder;
  std::vector<ForcingNormRow> forcing;
  int newton_iterations = 0;
  double closure_residual = 0.0;
  bool nonlinear = true;
};

struct InflationOptions {
  IllposedDataSpec spec;
  std::vector<double> t_grid;
  std::vector<double> p_grid;
  double dt = 0.01;
  double forcing_beta = 0.5;
  bool nonlinear = true;  ///< false: linear prediction only
};

std::vector<double> default_p_grid();  ///< 1, 2, 4, …, 1024, sup
std::vector<double> default_t_grid();  ///< 0, 0.05, …, 1.2

DiagnosticsReport inflation_experiment(const InflationOptions& options);

/// lp_table.csv, slopes.csv, remainder.csv, linear_lp_table.csv,
/// linear_slopes.csv, forcing.csv and report.json.
void write_report(const DiagnosticsReport& report, const std::string& directory);

}  // namespace patchlab

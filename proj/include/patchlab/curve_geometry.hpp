#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace patchlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform label grid ξ_j = 2πj/n on 𝕋. n must be even and at least 16.
class LagrangianGrid {
 public:
  explicit LagrangianGrid(std::size_t n_nodes);

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept;
  double label(std::size_t j) const noexcept;
  std::vector<double> labels() const;

  /// Torus distance between the labels of nodes j and k.
  double torus_distance(std::size_t j, std::size_t k) const noexcept;

  friend bool operator==(const LagrangianGrid&, const LagrangianGrid&) = default;

 private:
  std::size_t n_;
};

/// Boundary positions on the label grid. Positions are stored
/// counterclockwise; from_points() reverses clockwise input.
struct CurveState {
  LagrangianGrid grid;
  std::vector<double> x;
  std::vector<double> y;
  double time = 0.0;
  bool orientation_flipped = false;

  /// Builds a curve, reversing the node order (node 0 kept) if the signed
  /// area is negative.
  static CurveState from_points(std::vector<double> x, std::vector<double> y,
                                double time = 0.0);

  std::size_t size() const noexcept { return x.size(); }
  Vec2 point(std::size_t j) const noexcept { return {x[j], y[j]}; }
};

struct GeometricFrame {
  std::vector<double> g;      ///< metric |γ̇|
  std::vector<double> theta;  ///< tangent angle, continuous lift
  std::vector<double> tx, ty; ///< unit tangent
  std::vector<double> nx, ny; ///< outer normal, N = −T⊥
  std::vector<double> kappa;  ///< signed curvature ∂ₛθ

  std::size_t size() const noexcept { return g.size(); }
};

/// Metric, curvature and anchors; enough to rebuild the curve.
struct IntrinsicState {
  LagrangianGrid grid;
  std::vector<double> g;
  std::vector<double> kappa;
  double theta0 = 0.0;
  Vec2 gamma0;
  double time = 0.0;
};

struct FrameOptions {
  double arc_chord_cap = 1.0e3;
  /// Relative energy allowed in the top third of the position spectrum.
  double tail_fraction = 1.0e-6;
  bool check_arc_chord = true;
  bool check_spectral_tail = true;
};

/// Spectral frame of a sampled curve.
GeometricFrame build_frame(const CurveState& curve, const FrameOptions& options = {});

/// max_{j≠k} d_𝕋(ξ_j, ξ_k) / |γ_j − γ_k|. Throws DegenerateCurve if two
/// nodes are closer than 1e−14·diameter.
double arc_chord_ratio(const CurveState& curve);

struct ClosureResidual {
  Vec2 position;  ///< ∫ (cos θ, sin θ) g dξ
  double turning; ///< ∫ κ g dξ − 2π
};

/// θ(ξ) = θ₀ + ∫₀^ξ κg, computed spectrally.
std::vector<double> tangent_angle(std::span<const double> g,
                                  std::span<const double> kappa, double theta0);

ClosureResidual closure_residual(const IntrinsicState& state);

struct ClosureFit {
  std::vector<double> kappa;
  std::array<double, 3> coefficients{};  ///< c₀, c₁, c₂
  int iterations = 0;
  double residual = 0.0;  ///< max of |turning|/2π and |position|/length
};

/// Replaces κ by κ + w·(c₀ + c₁ cos ξ + c₂ sin ξ) with (c₀, c₁, c₂) from a
/// damped Newton solve of the three closure conditions. Throws
/// ClosureSolveFailed after max_iterations.
ClosureFit project_closure(std::span<const double> g, std::span<const double> kappa,
                           std::span<const double> weight, double theta0,
                           int max_iterations = 50, double tolerance = 1.0e-13);

struct ReconstructOptions {
  /// Accepted |position residual| / length and |turning residual| / 2π.
  double closure_tolerance = 1.0e-8;
};

/// Rebuilds positions from (g, κ, θ₀, γ₀). The mean of T·g (closure
/// defect below tolerance) is removed before integration.
CurveState reconstruct_curve(const IntrinsicState& state,
                             const ReconstructOptions& options = {});

/// Frame computed directly from intrinsic data (no position differentiation).
GeometricFrame frame_from_intrinsic(const IntrinsicState& state);

/// Intrinsic state of a curve, anchors read from node 0.
IntrinsicState intrinsic_from_curve(const CurveState& curve, const GeometricFrame& frame);

/// Reparametrizes the curve so that the discrete metric is constant,
/// keeping node 0 fixed.
CurveState resample_arclength(const CurveState& curve, const FrameOptions& options = {});

/// Signed area enclosed by the trigonometric interpolant of the nodes.
double signed_area(std::span<const double> x, std::span<const double> y);

}  // namespace patchlab

#pragma once

#include <string>
#include <vector>

#include "patchlab/curve_geometry.hpp"

namespace patchlab {

/// Boundary velocity of a patch with vorticity 2π and its arc-length
/// derivatives. Vector fields are stored component-wise.
struct BoundaryVelocity {
  std::vector<double> vx, vy;
  std::vector<double> dsvx, dsvy;
  std::vector<double> d2svx, d2svy;
  std::vector<double> a;       ///< −∂ₛv·T
  std::vector<double> dsv_n;   ///< ∂ₛv·N
  std::vector<double> d2sv_n;  ///< ∂²ₛv·N
};

struct VectorField {
  std::vector<double> x, y;
};

/// v(ξ) = ∫ γ̇(η) ln|γ(ξ) − γ(η)| dη. The ln|2 sin((ξ−η)/2)| part is applied
/// as a Fourier multiplier; the smooth remainder by the trapezoid rule.
VectorField velocity(const CurveState& curve, const GeometricFrame& frame);

/// Velocity at a single node (same quadrature as velocity()).
Vec2 velocity_at(const CurveState& curve, const GeometricFrame& frame, std::size_t node);

/// ∂ₛv = P.V.∫ T(η) (D·T(ξ))/|D|² g(η) dη with D = γ(ξ) − γ(η). The model
/// term T(ξ)·½cot((ξ−η)/2) is subtracted and the diagonal filled with the
/// analytic limit.
VectorField ds_velocity(const CurveState& curve, const GeometricFrame& frame);

/// ∂ₛv·T via the area-form identity
///   −∫ (T(η)·N(ξ)) (D·N(ξ))/|D|² g(η) dη,
/// whose kernel is bounded.
std::vector<double> ds_velocity_tangential(const CurveState& curve, const GeometricFrame& frame);

/// The four kernels of ∂²ₛv evaluated separately.
struct SecondDerivativeTerms {
  VectorField k1, k2, k3, k4;
};

SecondDerivativeTerms d2s_velocity_terms(const CurveState& curve, const GeometricFrame& frame);

/// ∂²ₛv = K1 + K2 + K3 + K4.
VectorField d2s_velocity(const CurveState& curve, const GeometricFrame& frame);

/// Normal projections of the ∂²ₛv kernels, one pass over node pairs.
struct NormalKernelTerms {
  std::vector<double> dsv_t;  ///< ∂ₛv·T, area form
  std::vector<double> pv;     ///< P.V.∫ κ(η) N(η)·N(ξ) (D·T(ξ))/|D|² g(η) dη  (= −K1·N)
  std::vector<double> k2_n;   ///< K2·N
  std::vector<double> k4_n;   ///< K4·N
};

NormalKernelTerms normal_kernel_terms(const CurveState& curve, const GeometricFrame& frame);

/// ∂ₛv at a single node (same quadrature as ds_velocity()).
Vec2 ds_velocity_at(const CurveState& curve, const GeometricFrame& frame, std::size_t node);

/// a = −∂ₛv·T (area-form route).
std::vector<double> tangential_coefficient(const CurveState& curve, const GeometricFrame& frame);

/// All fields of BoundaryVelocity in one call.
BoundaryVelocity boundary_velocity(const CurveState& curve, const GeometricFrame& frame);

/// True when κ carries more than `fraction` of its energy in the top third
/// of the spectrum; second-derivative quadrature accuracy degrades then.
bool rough_curvature(const GeometricFrame& frame, double fraction = 1.0e-6);

/// CSV with columns xi,vx,vy,dsv_t,dsv_n,d2sv_n,a.
void write_velocity_csv(const std::string& path, const LagrangianGrid& grid,
                        const BoundaryVelocity& bv);

}  // namespace patchlab

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchlab/curve_geometry.hpp"

namespace patchlab {

enum class Formulation { CDE, Intrinsic, Both };

struct InvariantRecord {
  double time = 0.0;
  double area = 0.0;
  double length = 0.0;
  double turning = 0.0;
  Vec2 centroid;
};

/// Area (Green formula), length ∫g, turning ∫κg and area centroid.
InvariantRecord invariants(const CurveState& curve);

/// Principal-axis angle of the enclosed region from its area second
/// moments, in (−π/2, π/2].
double orientation_angle(const CurveState& curve);

struct SimulationConfig {
  std::size_t n_nodes = 256;
  double dt = 0.0;  ///< ≤ 0 selects the CFL-capped automatic step
  double t_end = 1.0;
  Formulation formulation = Formulation::CDE;
  int resample_every = 20;  ///< CDE only; 0 disables
  int snapshot_stride = 1;
  /// Keys: "area" (relative drift), "length" (relative drift), "turning"
  /// (absolute deviation from 2π). Exceedances are logged, not fatal.
  std::map<std::string, double> invariant_tolerances;
  bool closure_projection = false;
  double closure_tolerance = 1.0e-8;
  bool record_a = false;  ///< store a = −∂ₛv·T at every CDE step
  FrameOptions frame;
};

struct StepOptions {
  FrameOptions frame;
  double closure_tolerance = 1.0e-8;  ///< enforced on completed intrinsic steps
  /// RK stage states break closure at O(dt²); stages are rebuilt under this
  /// looser tolerance.
  double stage_closure_tolerance = 1.0e-3;
  bool closure_projection = false;
};

/// Classical RK4 step of ∂ₜγ = v(γ). dt may be negative.
CurveState step_cde(const CurveState& curve, double dt, const StepOptions& options = {});

/// Time derivatives of the intrinsic variables.
struct IntrinsicRate {
  std::vector<double> g, kappa;
  double theta0 = 0.0;
  Vec2 gamma0;
};

/// ∂ₜκ = −2κ ∂ₛv·T − ∂²ₛv·N, ∂ₜg = g ∂ₛv·T, ∂ₜθ₀ = −(∂ₛv·N)(0),
/// ∂ₜγ₀ = v(γ(0)), with the curve rebuilt from the intrinsic data.
IntrinsicRate intrinsic_rate(const IntrinsicState& state, const StepOptions& options = {});

/// RK4 step of the (g, κ, θ₀, γ₀) system.
IntrinsicState step_intrinsic(const IntrinsicState& state, double dt,
                              const StepOptions& options = {});

/// Automatic step: 0.5·(shortest neighbour chord)/max|v|.
double cfl_time_step(const CurveState& curve);

struct Snapshot {
  double time = 0.0;
  std::optional<CurveState> curve;
  std::optional<IntrinsicState> intrinsic;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Snapshot> snapshots;
  std::vector<InvariantRecord> invariant_log;           ///< CDE curve, every step
  std::vector<InvariantRecord> intrinsic_invariant_log; ///< reconstructed curve, every step
  std::vector<double> a_times;
  std::vector<std::vector<double>> a_history;
  std::vector<std::string> warnings;
};

Trajectory run(const SimulationConfig& config, const CurveState& initial);
Trajectory run(const SimulationConfig& config, const IntrinsicState& initial);

/// One snapshot JSON per stored snapshot plus invariants.csv.
void write_trajectory(const Trajectory& trajectory, const std::string& directory);

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

}  // namespace patchlab

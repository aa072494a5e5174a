#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchlab/illposedness_lab.hpp"
#include "patchlab/patch_evolution.hpp"

namespace patchlab {

enum class ExperimentKind { Simulate, Diagnose, Inflation, CompareFormulations, HilbertCheck };

enum class ShapeKind { Circle, Ellipse, Illposed, File };

struct InitialShape {
  ShapeKind kind = ShapeKind::Circle;
  double radius = 1.0;
  double a = 2.0, b = 1.0;
  IllposedDataSpec illposed;
  std::string path;
};

struct DiagnosticsConfig {
  std::vector<double> p_grid = default_p_grid();
  std::vector<double> t_grid = default_t_grid();
  std::vector<double> beta = {0.5};
  double dt = 0.01;        ///< inflation runs
  bool nonlinear = true;   ///< inflation runs
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Simulate;
  InitialShape initial;
  SimulationConfig simulation;
  DiagnosticsConfig diagnostics;
  std::string output_dir = "patchlab_out";
  std::int64_t seed = 0;  ///< reserved
};

/// Parses a JSON config. Missing fields take defaults; unknown fields,
/// wrong types and out-of-range values throw ConfigError naming the field
/// and, where it can be located, the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Cross-field checks (shape parameters, grids, kind/shape pairing).
void validate(const ExperimentConfig& config);

/// Canonical JSON of the resolved config.
std::string config_to_json(const ExperimentConfig& config);

std::string to_string(ExperimentKind kind);
std::string to_string(ShapeKind kind);

/// Initial curve on config.simulation.n_nodes nodes (illposed shapes use
/// their own node count).
CurveState initial_curve(const ExperimentConfig& config);
CurveState circle(std::size_t n, double radius);
CurveState ellipse(std::size_t n, double a, double b);

struct HilbertCheckRow {
  std::string identity;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass() const noexcept { return error <= tolerance; }
};

/// ℋ² = −Id, group law, e^{πℋ} = −Id, L² isometry (mean-zero test field)
/// and the alternate-point rule against the FFT route.
std::vector<HilbertCheckRow> hilbert_identities(std::size_t n);

struct ExperimentSummary {
  std::vector<std::string> files;  ///< relative to output_dir
  std::vector<std::string> lines; ///< human-readable results
};

/// Writes manifest.json, then the pipeline outputs under output_dir.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Text summary of a curve or intrinsic snapshot file.
std::string describe_snapshot(const std::string& path);

}  // namespace patchlab

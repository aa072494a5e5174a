#include "patchlab/patch_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "patchlab/boundary_velocity.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/io.hpp"
#include "patchlab/spectral.hpp"

namespace patchlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FrameOptions unchecked() {
  FrameOptions o;
  o.check_arc_chord = false;
  o.check_spectral_tail = false;
  return o;
}

InvariantRecord record_from(const CurveState& curve, std::span<const double> g,
                            std::span<const double> kappa) {
  const std::size_t n = curve.size();
  InvariantRecord r;
  r.time = curve.time;
  r.area = signed_area(curve.x, curve.y);
  r.length = spectral::integrate(g);
  std::vector<double> kg(n);
  for (std::size_t j = 0; j < n; ++j) kg[j] = kappa[j] * g[j];
  r.turning = spectral::integrate(kg);
  std::vector<double> dx = spectral::derivative(curve.x), dy = spectral::derivative(curve.y);
  std::vector<double> mx(n), my(n);
  for (std::size_t j = 0; j < n; ++j) {
    mx[j] = 0.5 * curve.x[j] * curve.x[j] * dy[j];
    my[j] = -0.5 * curve.y[j] * curve.y[j] * dx[j];
  }
  r.centroid = {spectral::integrate(mx) / r.area, spectral::integrate(my) / r.area};
  return r;
}

CurveState shifted(const CurveState& base, const VectorField& k, double c) {
  CurveState s = base;
  for (std::size_t j = 0; j < s.size(); ++j) {
    s.x[j] += c * k.x[j];
    s.y[j] += c * k.y[j];
  }
  return s;
}

VectorField cde_rate(const CurveState& curve, const FrameOptions& frame_options) {
  GeometricFrame frame = build_frame(curve, frame_options);
  return velocity(curve, frame);
}

IntrinsicState combine(const IntrinsicState& base, const IntrinsicRate& k, double c) {
  IntrinsicState s = base;
  for (std::size_t j = 0; j < s.g.size(); ++j) {
    s.g[j] += c * k.g[j];
    s.kappa[j] += c * k.kappa[j];
  }
  s.theta0 += c * k.theta0;
  s.gamma0.x += c * k.gamma0.x;
  s.gamma0.y += c * k.gamma0.y;
  return s;
}

// Re-raises the active exception with a context prefix, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const ClosureSolveFailed& e) {
    throw ClosureSolveFailed(ctx + e.what(), e.residual());
  } catch (const NonSimpleCurve& e) {
    throw NonSimpleCurve(ctx + e.what());
  } catch (const GridTooCoarse& e) {
    throw GridTooCoarse(ctx + e.what());
  } catch (const DegenerateCurve& e) {
    throw DegenerateCurve(ctx + e.what());
  } catch (const ClosureViolated& e) {
    throw ClosureViolated(ctx + e.what());
  } catch (const MissingHistory& e) {
    throw MissingHistory(ctx + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + e.what());
  } catch (const InputError& e) {
    throw InputError(ctx + e.what());
  }
}

std::string context(std::size_t step, double t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "step %zu, t = %.6g: ", step, t);
  return buf;
}

void check_tolerances(const SimulationConfig& cfg, const InvariantRecord& r0,
                      const InvariantRecord& r, const char* label,
                      std::vector<std::string>& warnings) {
  auto report = [&](const char* name, double value, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s t = %.6g: %s drift %.3e exceeds %.3e", label, r.time, name,
                  value, tol);
    warnings.emplace_back(buf);
  };
  for (const auto& [name, tol] : cfg.invariant_tolerances) {
    double d = 0.0;
    if (name == "area")
      d = std::abs(r.area - r0.area) / std::abs(r0.area);
    else if (name == "length")
      d = std::abs(r.length - r0.length) / r0.length;
    else if (name == "turning")
      d = std::abs(r.turning - kTwoPi);
    else
      continue;
    if (d > tol) report(name.c_str(), d, tol);
  }
}

struct StepPlan {
  std::size_t steps = 0;
  double dt = 0.0;
};

StepPlan plan_steps(const SimulationConfig& cfg, const CurveState& initial) {
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("t_end must be >= 0");
  if (cfg.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (cfg.resample_every < 0) throw ConfigError("resample_every must be >= 0");
  StepPlan p;
  if (cfg.t_end == 0.0) return p;
  double dt = cfg.dt > 0.0 ? cfg.dt : cfl_time_step(initial);
  p.steps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt - 1e-9));
  p.steps = std::max<std::size_t>(p.steps, 1);
  p.dt = cfg.t_end / static_cast<double>(p.steps);
  return p;
}

StepOptions step_options(const SimulationConfig& cfg) {
  StepOptions o;
  o.frame = cfg.frame;
  o.closure_tolerance = cfg.closure_tolerance;
  o.closure_projection = cfg.closure_projection;
  return o;
}

}  // namespace

InvariantRecord invariants(const CurveState& curve) {
  GeometricFrame f = build_frame(curve, unchecked());
  return record_from(curve, f.g, f.kappa);
}

double orientation_angle(const CurveState& curve) {
  const std::size_t n = curve.size();
  std::vector<double> dx = spectral::derivative(curve.x), dy = spectral::derivative(curve.y);
  InvariantRecord r = invariants(curve);
  std::vector<double> ixx(n), iyy(n), ixy(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = curve.x[j] - r.centroid.x, y = curve.y[j] - r.centroid.y;
    ixx[j] = x * x * x / 3.0 * dy[j];
    iyy[j] = -y * y * y / 3.0 * dx[j];
    ixy[j] = 0.5 * x * x * y * dy[j];
  }
  double a = spectral::integrate(ixx), b = spectral::integrate(iyy), c = spectral::integrate(ixy);
  return 0.5 * std::atan2(2.0 * c, a - b);
}

double cfl_time_step(const CurveState& curve) {
  GeometricFrame frame = build_frame(curve);
  VectorField v = velocity(curve, frame);
  double vmax = 0.0;
  for (std::size_t j = 0; j < curve.size(); ++j) vmax = std::max(vmax, std::hypot(v.x[j], v.y[j]));
  double ds = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < curve.size(); ++j) {
    std::size_t k = (j + 1) % curve.size();
    ds = std::min(ds, std::hypot(curve.x[k] - curve.x[j], curve.y[k] - curve.y[j]));
  }
  if (vmax == 0.0) throw NumericalError("zero boundary velocity; automatic dt undefined");
  return 0.5 * ds / vmax;
}

CurveState step_cde(const CurveState& curve, double dt, const StepOptions& options) {
  VectorField k1 = cde_rate(curve, options.frame);
  VectorField k2 = cde_rate(shifted(curve, k1, 0.5 * dt), options.frame);
  VectorField k3 = cde_rate(shifted(curve, k2, 0.5 * dt), options.frame);
  VectorField k4 = cde_rate(shifted(curve, k3, dt), options.frame);
  CurveState out = curve;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out.x[j] += dt / 6.0 * (k1.x[j] + 2.0 * k2.x[j] + 2.0 * k3.x[j] + k4.x[j]);
    out.y[j] += dt / 6.0 * (k1.y[j] + 2.0 * k2.y[j] + 2.0 * k3.y[j] + k4.y[j]);
  }
  out.time = curve.time + dt;
  return out;
}

IntrinsicRate intrinsic_rate(const IntrinsicState& state, const StepOptions& options) {
  ReconstructOptions ro{options.stage_closure_tolerance};
  CurveState curve = reconstruct_curve(state, ro);
  GeometricFrame frame = frame_from_intrinsic(state);
  if (options.frame.check_arc_chord) {
    double gamma = arc_chord_ratio(curve);
    if (gamma > options.frame.arc_chord_cap)
      throw NonSimpleCurve("arc-chord ratio " + std::to_string(gamma) + " exceeds cap");
  }
  NormalKernelTerms nk = normal_kernel_terms(curve, frame);
  const std::size_t n = state.g.size();
  IntrinsicRate r;
  r.g.resize(n);
  r.kappa.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = state.kappa[j], a_t = nk.dsv_t[j];
    // ∂²ₛv·N = −pv + K2·N + κ ∂ₛv·T + K4·N
    double d2n = -nk.pv[j] + nk.k2_n[j] + k * a_t + nk.k4_n[j];
    r.kappa[j] = -2.0 * k * a_t - d2n;
    r.g[j] = state.g[j] * a_t;
  }
  Vec2 ds0 = ds_velocity_at(curve, frame, 0);
  r.theta0 = -(ds0.x * frame.nx[0] + ds0.y * frame.ny[0]);
  r.gamma0 = velocity_at(curve, frame, 0);
  return r;
}

IntrinsicState step_intrinsic(const IntrinsicState& state, double dt, const StepOptions& options) {
  IntrinsicRate k1 = intrinsic_rate(state, options);
  IntrinsicRate k2 = intrinsic_rate(combine(state, k1, 0.5 * dt), options);
  IntrinsicRate k3 = intrinsic_rate(combine(state, k2, 0.5 * dt), options);
  IntrinsicRate k4 = intrinsic_rate(combine(state, k3, dt), options);
  IntrinsicState out = state;
  const double c = dt / 6.0;
  for (std::size_t j = 0; j < out.g.size(); ++j) {
    out.g[j] += c * (k1.g[j] + 2.0 * k2.g[j] + 2.0 * k3.g[j] + k4.g[j]);
    out.kappa[j] += c * (k1.kappa[j] + 2.0 * k2.kappa[j] + 2.0 * k3.kappa[j] + k4.kappa[j]);
  }
  out.theta0 += c * (k1.theta0 + 2.0 * k2.theta0 + 2.0 * k3.theta0 + k4.theta0);
  out.gamma0.x += c * (k1.gamma0.x + 2.0 * k2.gamma0.x + 2.0 * k3.gamma0.x + k4.gamma0.x);
  out.gamma0.y += c * (k1.gamma0.y + 2.0 * k2.gamma0.y + 2.0 * k3.gamma0.y + k4.gamma0.y);
  out.time = state.time + dt;
  if (options.closure_projection) {
    std::vector<double> ones(out.g.size(), 1.0);
    out.kappa = project_closure(out.g, out.kappa, ones, out.theta0).kappa;
  }
  reconstruct_curve(out, {options.closure_tolerance});
  return out;
}

Trajectory run(const SimulationConfig& cfg, const CurveState& initial) {
  if (initial.size() != cfg.n_nodes)
    throw ConfigError("initial curve has " + std::to_string(initial.size()) +
                      " nodes, config asks for " + std::to_string(cfg.n_nodes));
  const bool cde = cfg.formulation != Formulation::Intrinsic;
  const bool intr = cfg.formulation != Formulation::CDE;
  StepPlan plan = plan_steps(cfg, initial);
  StepOptions opts = step_options(cfg);

  Trajectory traj;
  traj.dt = plan.dt;
  CurveState curve = initial;
  std::optional<IntrinsicState> state;
  try {
    GeometricFrame f0 = build_frame(curve, cfg.frame);
    if (intr) state = intrinsic_from_curve(curve, f0);
  } catch (const Error&) {
    rethrow_with_context(context(0, initial.time));
  }

  auto log_step = [&](std::size_t step) {
    if (cde) {
      GeometricFrame f = build_frame(curve, unchecked());
      traj.invariant_log.push_back(record_from(curve, f.g, f.kappa));
      check_tolerances(cfg, traj.invariant_log.front(), traj.invariant_log.back(), "cde",
                       traj.warnings);
      if (cfg.record_a) {
        traj.a_times.push_back(curve.time);
        traj.a_history.push_back(tangential_coefficient(curve, f));
      }
    }
    if (intr) {
      CurveState c = reconstruct_curve(*state, {cfg.closure_tolerance});
      traj.intrinsic_invariant_log.push_back(record_from(c, state->g, state->kappa));
      check_tolerances(cfg, traj.intrinsic_invariant_log.front(),
                       traj.intrinsic_invariant_log.back(), "intrinsic", traj.warnings);
    }
    if (step % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || step == plan.steps) {
      Snapshot s;
      s.time = cde ? curve.time : state->time;
      if (cde) s.curve = curve;
      if (intr) s.intrinsic = *state;
      traj.snapshots.push_back(std::move(s));
    }
  };

  std::size_t step = 0;
  try {
    log_step(0);
    for (step = 1; step <= plan.steps; ++step) {
      double t_next = initial.time + cfg.t_end * static_cast<double>(step) /
                                         static_cast<double>(plan.steps);
      if (cde) {
        curve = step_cde(curve, plan.dt, opts);
        curve.time = t_next;
        if (cfg.resample_every > 0 && step % static_cast<std::size_t>(cfg.resample_every) == 0 &&
            step != plan.steps)
          curve = resample_arclength(curve, unchecked());
      }
      if (intr) {
        state = step_intrinsic(*state, plan.dt, opts);
        state->time = t_next;
      }
      log_step(step);
    }
  } catch (const Error&) {
    double t = initial.time + plan.dt * static_cast<double>(step);
    rethrow_with_context(context(step, t));
  }
  return traj;
}

Trajectory run(const SimulationConfig& cfg, const IntrinsicState& initial) {
  if (cfg.formulation != Formulation::Intrinsic) {
    std::optional<CurveState> c;
    try {
      c = reconstruct_curve(initial, {cfg.closure_tolerance});
    } catch (const Error&) {
      rethrow_with_context(context(0, initial.time));
    }
    c->time = initial.time;
    return run(cfg, *c);
  }
  if (initial.g.size() != cfg.n_nodes) throw ConfigError("initial state node count mismatch");
  CurveState c0 = reconstruct_curve(initial, {cfg.closure_tolerance});
  StepPlan plan = plan_steps(cfg, c0);
  StepOptions opts = step_options(cfg);
  Trajectory traj;
  traj.dt = plan.dt;
  IntrinsicState state = initial;
  std::size_t step = 0;
  auto log_step = [&](std::size_t k) {
    CurveState c = reconstruct_curve(state, {cfg.closure_tolerance});
    c.time = state.time;
    traj.intrinsic_invariant_log.push_back(record_from(c, state.g, state.kappa));
    check_tolerances(cfg, traj.intrinsic_invariant_log.front(),
                     traj.intrinsic_invariant_log.back(), "intrinsic", traj.warnings);
    if (k % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || k == plan.steps)
      traj.snapshots.push_back({state.time, std::nullopt, state});
  };
  try {
    log_step(0);
    for (step = 1; step <= plan.steps; ++step) {
      state = step_intrinsic(state, plan.dt, opts);
      state.time = initial.time + cfg.t_end * static_cast<double>(step) /
                                      static_cast<double>(plan.steps);
      log_step(step);
    }
  } catch (const Error&) {
    rethrow_with_context(context(step, initial.time + plan.dt * static_cast<double>(step)));
  }
  return traj;
}

void write_trajectory(const Trajectory& traj, const std::string& directory) {
  std::filesystem::create_directories(directory);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Snapshot& s = traj.snapshots[k];
    char name[64];
    if (s.curve) {
      std::snprintf(name, sizeof name, "/snapshot_%05zu.json", k);
      save_curve(*s.curve, directory + name);
    }
    if (s.intrinsic) {
      std::snprintf(name, sizeof name, "/intrinsic_%05zu.json", k);
      save_intrinsic(*s.intrinsic, directory + name);
    }
  }
  auto write_log = [&](const std::vector<InvariantRecord>& log, const std::string& file) {
    CsvWriter csv(directory + "/" + file, {"t", "area", "length", "turning", "cx", "cy"});
    for (const auto& r : log) csv.row({r.time, r.area, r.length, r.turning, r.centroid.x, r.centroid.y});
  };
  if (!traj.invariant_log.empty()) write_log(traj.invariant_log, "invariants.csv");
  if (!traj.intrinsic_invariant_log.empty())
    write_log(traj.intrinsic_invariant_log,
              traj.invariant_log.empty() ? "invariants.csv" : "invariants_intrinsic.csv");
}

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::CDE: return "cde";
    case Formulation::Intrinsic: return "intrinsic";
    case Formulation::Both: return "both";
  }
  return "cde";
}

Formulation formulation_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "cde") return Formulation::CDE;
  if (s == "intrinsic") return Formulation::Intrinsic;
  if (s == "both") return Formulation::Both;
  throw ConfigError("unknown formulation \"" + name + "\" (cde, intrinsic, both)");
}

}  // namespace patchlab

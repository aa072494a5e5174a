#include "patchlab/experiment.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <initializer_list>
#include <numbers>
#include <set>

#include "json.hpp"

#include "patchlab/boundary_velocity.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/hilbert_dispersion.hpp"
#include "patchlab/io.hpp"
#include "patchlab/norms.hpp"
#include "patchlab/parallel.hpp"
#include "patchlab/spectral.hpp"

#ifndef PATCHLAB_VERSION
#define PATCHLAB_VERSION "0.0.0"
#endif

namespace patchlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t k = 0; k < byte; ++k)
    if (text[k] == '\n') ++line;
  return line;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    std::string key = field.substr(field.rfind('.') == std::string::npos ? 0 : field.rfind('.') + 1);
    std::size_t pos = text_.find('"' + key + '"');
    std::string where;
    if (pos != std::string::npos) where = " (line " + std::to_string(line_of(text_, pos)) + ")";
    throw ConfigError("config field \"" + field + "\": " + message + where);
  }

  void only(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(join(prefix, it.key()), "unknown field");
  }

  const json* find(const json& obj, const char* key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& obj, const std::string& prefix, const char* key, double def) const {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_number()) fail(join(prefix, key), "expected a number");
    double x = v->get<double>();
    if (!std::isfinite(x)) fail(join(prefix, key), "must be finite");
    return x;
  }

  long long integer(const json& obj, const std::string& prefix, const char* key, long long def) const {
    const json* v = find(obj, key);
    if (!v) return def;
    if (v->is_number_integer()) return v->get<long long>();
    if (v->is_number_float()) {
      double x = v->get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    fail(join(prefix, key), "expected an integer");
  }

  bool boolean(const json& obj, const std::string& prefix, const char* key, bool def) const {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_boolean()) fail(join(prefix, key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const json& obj, const std::string& prefix, const char* key,
                     const std::string& def) const {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_string()) fail(join(prefix, key), "expected a string");
    return v->get<std::string>();
  }

  const json& object(const json& obj, const std::string& field) const {
    if (!obj.is_object()) fail(field, "expected an object");
    return obj;
  }

  /// Numbers, or "inf" when allow_inf.
  std::vector<double> numbers(const json& obj, const std::string& prefix, const char* key,
                              std::vector<double> def, bool allow_inf) const {
    const json* v = find(obj, key);
    if (!v) return def;
    std::vector<double> out;
    auto one = [&](const json& e) {
      if (e.is_number()) {
        double x = e.get<double>();
        if (!std::isfinite(x)) fail(join(prefix, key), "entries must be finite");
        out.push_back(x);
      } else if (allow_inf && e.is_string() && (e == "inf" || e == "sup")) {
        out.push_back(kSupNorm);
      } else {
        fail(join(prefix, key), allow_inf ? "entries must be numbers or \"inf\"" : "entries must be numbers");
      }
    };
    if (v->is_array()) {
      for (const auto& e : *v) one(e);
    } else {
      one(*v);
    }
    if (out.empty()) fail(join(prefix, key), "must not be empty");
    return out;
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

 private:
  const std::string& text_;
};

ExperimentKind kind_from(const Reader& r, const std::string& s) {
  if (s == "simulate") return ExperimentKind::Simulate;
  if (s == "diagnose") return ExperimentKind::Diagnose;
  if (s == "inflation") return ExperimentKind::Inflation;
  if (s == "compare_formulations") return ExperimentKind::CompareFormulations;
  if (s == "hilbert_check") return ExperimentKind::HilbertCheck;
  r.fail("kind", "unknown kind \"" + s +
                     "\" (simulate, diagnose, inflation, compare_formulations, hilbert_check)");
}

ShapeKind shape_from(const Reader& r, const std::string& s) {
  if (s == "circle") return ShapeKind::Circle;
  if (s == "ellipse") return ShapeKind::Ellipse;
  if (s == "illposed") return ShapeKind::Illposed;
  if (s == "file") return ShapeKind::File;
  r.fail("initial.shape", "unknown shape \"" + s + "\" (circle, ellipse, illposed, file)");
}

ordered_json num(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

ordered_json list(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FrameOptions unchecked(FrameOptions f) {
  f.check_arc_chord = false;
  f.check_spectral_tail = false;
  return f;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

double l2(std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * 2.0 * kPi / static_cast<double>(f.size()));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ConfigError("config field \"output_dir\": cannot create " + dir);
  std::string probe = dir + "/.patchlab_write_test";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("config field \"output_dir\": " + dir + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

struct Outputs {
  std::string dir;
  ExperimentSummary summary;
  std::string path(const std::string& name) {
    summary.files.push_back(name);
    return dir + "/" + name;
  }
};

void line(ExperimentSummary& s, const char* fmt, double v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, v);
  s.lines.emplace_back(buf);
}

ordered_json invariant_json(const InvariantRecord& r0, const InvariantRecord& r1) {
  return {{"area_drift", std::abs(r1.area - r0.area) / std::abs(r0.area)},
          {"length_drift", std::abs(r1.length - r0.length) / r0.length},
          {"turning_error", std::abs(r1.turning - 2.0 * kPi)}};
}

void simulate(const ExperimentConfig& cfg, const CurveState& initial, Outputs& out) {
  SimulationConfig sim = cfg.simulation;
  sim.n_nodes = initial.size();
  Trajectory traj = run(sim, initial);
  write_trajectory(traj, out.dir);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    char name[64];
    if (traj.snapshots[k].curve) {
      std::snprintf(name, sizeof name, "snapshot_%05zu.json", k);
      out.summary.files.emplace_back(name);
    }
    if (traj.snapshots[k].intrinsic) {
      std::snprintf(name, sizeof name, "intrinsic_%05zu.json", k);
      out.summary.files.emplace_back(name);
    }
  }
  ordered_json j;
  j["dt"] = traj.dt;
  j["steps"] = traj.invariant_log.empty() ? traj.intrinsic_invariant_log.size() - 1
                                          : traj.invariant_log.size() - 1;
  j["snapshots"] = traj.snapshots.size();
  if (!traj.invariant_log.empty()) {
    out.summary.files.emplace_back("invariants.csv");
    j["cde"] = invariant_json(traj.invariant_log.front(), traj.invariant_log.back());
    line(out.summary, "cde area drift %.3e", j["cde"]["area_drift"].get<double>());
  }
  if (!traj.intrinsic_invariant_log.empty()) {
    out.summary.files.emplace_back(traj.invariant_log.empty() ? "invariants.csv"
                                                              : "invariants_intrinsic.csv");
    j["intrinsic"] = invariant_json(traj.intrinsic_invariant_log.front(),
                                    traj.intrinsic_invariant_log.back());
    line(out.summary, "intrinsic area drift %.3e", j["intrinsic"]["area_drift"].get<double>());
  }
  j["warnings"] = traj.warnings;
  for (const auto& w : traj.warnings) out.summary.lines.push_back("warning: " + w);
  write_text(out.path("summary.json"), j.dump(2) + "\n");
}

void diagnose(const ExperimentConfig& cfg, const CurveState& curve, Outputs& out) {
  GeometricFrame frame = build_frame(curve, cfg.simulation.frame);
  BoundaryVelocity bv = boundary_velocity(curve, frame);
  write_velocity_csv(out.path("velocity.csv"), curve.grid, bv);

  ReassemblyCheck re = reassembly_check(curve, frame);
  ForcingTerms ft = forcing_terms(curve, frame);
  PeriodicScalarField a(ft.a), kappa(frame.kappa);

  CsvWriter csv(out.path("forcing.csv"), {"beta", "a_sup", "a_holder", "fl_sup", "fl_holder",
                                          "fn_sup", "fn_holder", "comm_sup", "comm_holder"});
  for (double beta : cfg.diagnostics.beta) {
    CommutatorReport c = commutator_diagnostic(a, kappa, beta);
    csv.row({beta, sup_norm(ft.a), holder_seminorm(ft.a, beta), sup_norm(ft.f_l),
             holder_seminorm(ft.f_l, beta), sup_norm(ft.f_n), holder_seminorm(ft.f_n, beta), c.sup,
             c.seminorm});
  }

  InvariantRecord inv = invariants(curve);
  ordered_json j;
  j["n"] = curve.size();
  j["area"] = inv.area;
  j["length"] = inv.length;
  j["turning"] = inv.turning;
  j["arc_chord"] = arc_chord_ratio(curve);
  j["rough_curvature"] = rough_curvature(frame);
  j["reassembly"] = {{"literal", re.literal}, {"corrected", re.corrected}, {"scale", re.scale}};
  write_text(out.path("diagnostics.json"), j.dump(2) + "\n");
  line(out.summary, "curvature reassembly residual %.3e", re.literal);
  line(out.summary, "with 3a*kappa: %.3e", re.corrected);
}

void inflation(const ExperimentConfig& cfg, Outputs& out) {
  InflationOptions opt;
  opt.spec = cfg.initial.illposed;
  opt.t_grid = cfg.diagnostics.t_grid;
  opt.p_grid = cfg.diagnostics.p_grid;
  opt.dt = cfg.diagnostics.dt;
  opt.forcing_beta = cfg.diagnostics.beta.front();
  opt.nonlinear = cfg.diagnostics.nonlinear;
  DiagnosticsReport rep = inflation_experiment(opt);
  write_report(rep, out.dir);
  for (const char* f : {"linear_lp_table.csv", "linear_slopes.csv"}) out.summary.files.emplace_back(f);
  if (rep.nonlinear)
    for (const char* f : {"lp_table.csv", "slopes.csv", "remainder.csv", "forcing.csv"})
      out.summary.files.emplace_back(f);
  out.summary.files.emplace_back("report.json");
  for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
    if (std::abs(rep.t_grid[i] - 0.5) > 1e-12) continue;
    line(out.summary, "linear slope at t = 0.5: %.4f", rep.linear_slopes[i]);
    if (rep.nonlinear) line(out.summary, "nonlinear slope at t = 0.5: %.4f", rep.slopes[i]);
  }
}

void compare(const ExperimentConfig& cfg, const CurveState& initial, Outputs& out) {
  SimulationConfig sim = cfg.simulation;
  sim.n_nodes = initial.size();
  sim.formulation = Formulation::Both;
  sim.resample_every = 0;
  Trajectory traj = run(sim, initial);
  CsvWriter csv(out.path("comparison.csv"), {"t", "max_dkappa", "max_dposition"});
  double worst = 0.0, worst_pos = 0.0;
  for (const auto& s : traj.snapshots) {
    GeometricFrame f = build_frame(*s.curve, unchecked(sim.frame));
    CurveState c = reconstruct_curve(*s.intrinsic, {sim.closure_tolerance});
    double dk = max_abs_diff(f.kappa, s.intrinsic->kappa);
    double dp = std::max(max_abs_diff(s.curve->x, c.x), max_abs_diff(s.curve->y, c.y));
    worst = std::max(worst, dk);
    worst_pos = std::max(worst_pos, dp);
    csv.row({s.time, dk, dp});
  }
  ordered_json j;
  j["dt"] = traj.dt;
  j["t_end"] = sim.t_end;
  j["max_dkappa"] = worst;
  j["max_dposition"] = worst_pos;
  j["warnings"] = traj.warnings;
  write_text(out.path("comparison.json"), j.dump(2) + "\n");
  line(out.summary, "max |dkappa| between formulations: %.3e", worst);
}

void hilbert_check(const ExperimentConfig& cfg, Outputs& out) {
  std::vector<HilbertCheckRow> rows = hilbert_identities(cfg.simulation.n_nodes);
  std::string text = "identity,error,tolerance,pass\n";
  bool all = true;
  for (const auto& r : rows) {
    text += r.identity + "," + format_double(r.error) + "," + format_double(r.tolerance) + "," +
            (r.pass() ? "1" : "0") + "\n";
    all = all && r.pass();
    out.summary.lines.push_back(std::string(r.pass() ? "pass " : "FAIL ") + r.identity);
  }
  write_text(out.path("hilbert_check.csv"), text);
  if (!all) out.summary.lines.emplace_back("some identities failed");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Diagnose: return "diagnose";
    case ExperimentKind::Inflation: return "inflation";
    case ExperimentKind::CompareFormulations: return "compare_formulations";
    case ExperimentKind::HilbertCheck: return "hilbert_check";
  }
  return "simulate";
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Illposed: return "illposed";
    case ShapeKind::File: return "file";
  }
  return "circle";
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON (line " + std::to_string(line_of(text, e.byte)) +
                      "): " + e.what());
  }
  Reader r(text);
  if (!doc.is_object()) r.fail("(top level)", "expected an object");
  r.only(doc, "", {"kind", "initial", "simulation", "diagnostics", "output_dir", "seed"});

  ExperimentConfig cfg;
  if (!doc.contains("kind")) r.fail("kind", "required");
  cfg.kind = kind_from(r, r.string(doc, "", "kind", ""));
  cfg.output_dir = r.string(doc, "", "output_dir", cfg.output_dir);
  cfg.seed = r.integer(doc, "", "seed", 0);

  if (const json* ini = r.find(doc, "initial")) {
    const json& o = r.object(*ini, "initial");
    InitialShape& s = cfg.initial;
    s.kind = shape_from(r, r.string(o, "initial", "shape", "circle"));
    switch (s.kind) {
      case ShapeKind::Circle:
        r.only(o, "initial", {"shape", "radius"});
        s.radius = r.number(o, "initial", "radius", s.radius);
        break;
      case ShapeKind::Ellipse:
        r.only(o, "initial", {"shape", "a", "b"});
        s.a = r.number(o, "initial", "a", s.a);
        s.b = r.number(o, "initial", "b", s.b);
        break;
      case ShapeKind::Illposed: {
        r.only(o, "initial", {"shape", "epsilon", "n_nodes", "blend_width", "base_radius"});
        IllposedDataSpec& sp = s.illposed;
        sp.epsilon = r.number(o, "initial", "epsilon", sp.epsilon);
        long long n = r.integer(o, "initial", "n_nodes", static_cast<long long>(sp.n_nodes));
        if (n < 16 || n % 2) r.fail("initial.n_nodes", "must be an even integer >= 16");
        sp.n_nodes = static_cast<std::size_t>(n);
        sp.blend_width = r.number(o, "initial", "blend_width", sp.blend_width);
        sp.base_radius = r.number(o, "initial", "base_radius", sp.base_radius);
        break;
      }
      case ShapeKind::File:
        r.only(o, "initial", {"shape", "path"});
        s.path = r.string(o, "initial", "path", "");
        break;
    }
  }

  if (const json* simp = r.find(doc, "simulation")) {
    const json& o = r.object(*simp, "simulation");
    const std::string p = "simulation";
    r.only(o, p, {"n_nodes", "dt", "t_end", "formulation", "resample_every", "snapshot_stride",
                  "invariant_tolerances", "closure_projection", "closure_tolerance", "record_a",
                  "arc_chord_cap", "tail_fraction"});
    SimulationConfig& sim = cfg.simulation;
    long long n = r.integer(o, p, "n_nodes", static_cast<long long>(sim.n_nodes));
    if (n < 16 || n % 2) r.fail("simulation.n_nodes", "must be an even integer >= 16");
    sim.n_nodes = static_cast<std::size_t>(n);
    sim.dt = r.number(o, p, "dt", sim.dt);
    sim.t_end = r.number(o, p, "t_end", sim.t_end);
    try {
      sim.formulation = formulation_from_string(r.string(o, p, "formulation", to_string(sim.formulation)));
    } catch (const ConfigError& e) {
      r.fail("simulation.formulation", e.what());
    }
    long long re = r.integer(o, p, "resample_every", sim.resample_every);
    if (re < 0 || re > 1000000000) r.fail("simulation.resample_every", "must be >= 0");
    sim.resample_every = static_cast<int>(re);
    long long st = r.integer(o, p, "snapshot_stride", sim.snapshot_stride);
    if (st < 1 || st > 1000000000) r.fail("simulation.snapshot_stride", "must be >= 1");
    sim.snapshot_stride = static_cast<int>(st);
    if (const json* tol = r.find(o, "invariant_tolerances")) {
      const std::string tp = "simulation.invariant_tolerances";
      const json& t = r.object(*tol, tp);
      r.only(t, tp, {"area", "length", "turning"});
      for (const char* k : {"area", "length", "turning"})
        if (t.contains(k)) {
          double v = r.number(t, tp, k, 0.0);
          if (!(v > 0.0)) r.fail(tp + "." + k, "must be positive");
          sim.invariant_tolerances[k] = v;
        }
    }
    sim.closure_projection = r.boolean(o, p, "closure_projection", sim.closure_projection);
    sim.closure_tolerance = r.number(o, p, "closure_tolerance", sim.closure_tolerance);
    sim.record_a = r.boolean(o, p, "record_a", sim.record_a);
    sim.frame.arc_chord_cap = r.number(o, p, "arc_chord_cap", sim.frame.arc_chord_cap);
    sim.frame.tail_fraction = r.number(o, p, "tail_fraction", sim.frame.tail_fraction);
  }

  if (const json* dp = r.find(doc, "diagnostics")) {
    const json& o = r.object(*dp, "diagnostics");
    const std::string p = "diagnostics";
    r.only(o, p, {"p_grid", "t_grid", "beta", "dt", "nonlinear"});
    DiagnosticsConfig& d = cfg.diagnostics;
    d.p_grid = r.numbers(o, p, "p_grid", d.p_grid, true);
    d.t_grid = r.numbers(o, p, "t_grid", d.t_grid, false);
    d.beta = r.numbers(o, p, "beta", d.beta, false);
    d.dt = r.number(o, p, "dt", d.dt);
    d.nonlinear = r.boolean(o, p, "nonlinear", d.nonlinear);
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (msg.rfind("config field \"", 0) == 0) {
      std::size_t q = msg.find('"', 14);
      std::string field = msg.substr(14, q - 14);
      if (msg.find("(line ") == std::string::npos) r.fail(field, msg.substr(q + 3));
    }
    throw;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("config field \"" + field + "\": " + msg);
  };
  const InitialShape& s = cfg.initial;
  switch (s.kind) {
    case ShapeKind::Circle:
      if (!(s.radius > 0.0)) fail("initial.radius", "must be positive");
      break;
    case ShapeKind::Ellipse:
      if (!(s.a > 0.0)) fail("initial.a", "must be positive");
      if (!(s.b > 0.0)) fail("initial.b", "must be positive");
      break;
    case ShapeKind::Illposed:
      try {
        validate(s.illposed);
      } catch (const FeatureUnresolved&) {
        throw;
      } catch (const ConfigError& e) {
        std::string msg = e.what();
        std::string field = "initial." + msg.substr(9, msg.find(' ') - 9);
        fail(field, msg.substr(msg.find(' ') + 1));
      }
      break;
    case ShapeKind::File:
      if (s.path.empty()) fail("initial.path", "required for shape \"file\"");
      break;
  }
  const SimulationConfig& sim = cfg.simulation;
  if (sim.n_nodes < 16 || sim.n_nodes % 2) fail("simulation.n_nodes", "must be an even integer >= 16");
  if (!(sim.t_end >= 0.0) || !std::isfinite(sim.t_end)) fail("simulation.t_end", "must be >= 0");
  if (!std::isfinite(sim.dt)) fail("simulation.dt", "must be finite");
  if (sim.dt > 0.0 && sim.t_end / sim.dt > 1e8) fail("simulation.dt", "more than 1e8 steps requested");
  if (sim.resample_every < 0) fail("simulation.resample_every", "must be >= 0");
  if (sim.snapshot_stride < 1) fail("simulation.snapshot_stride", "must be >= 1");
  if (!(sim.closure_tolerance > 0.0)) fail("simulation.closure_tolerance", "must be positive");
  if (!(sim.frame.arc_chord_cap > 1.0)) fail("simulation.arc_chord_cap", "must exceed 1");
  if (!(sim.frame.tail_fraction > 0.0)) fail("simulation.tail_fraction", "must be positive");

  const DiagnosticsConfig& d = cfg.diagnostics;
  if (d.p_grid.empty()) fail("diagnostics.p_grid", "must not be empty");
  for (double p : d.p_grid)
    if (!(p >= 1.0) || (std::isfinite(p) && p > 1024.0))
      fail("diagnostics.p_grid", "entries must lie in [1, 1024] or be \"inf\"");
  if (d.t_grid.empty()) fail("diagnostics.t_grid", "must not be empty");
  for (std::size_t k = 0; k < d.t_grid.size(); ++k) {
    if (!(d.t_grid[k] >= 0.0 && d.t_grid[k] <= 2.0)) fail("diagnostics.t_grid", "entries must lie in [0, 2]");
    if (k && !(d.t_grid[k] > d.t_grid[k - 1])) fail("diagnostics.t_grid", "must be strictly increasing");
  }
  if (d.beta.empty()) fail("diagnostics.beta", "must not be empty");
  for (double b : d.beta)
    if (!(b > 0.0 && b < 1.0)) fail("diagnostics.beta", "entries must lie in (0, 1)");
  if (!(d.dt > 0.0)) fail("diagnostics.dt", "must be positive");
  if (cfg.kind == ExperimentKind::Inflation) {
    if (s.kind != ShapeKind::Illposed) fail("initial.shape", "inflation needs shape \"illposed\"");
    if (d.nonlinear && d.t_grid.back() > 0.0) {
      double steps = std::round(d.t_grid.back() / d.dt);
      for (double t : d.t_grid) {
        double k = t / d.t_grid.back() * steps;
        if (std::abs(k - std::round(k)) > 1e-6 || std::abs(steps * d.dt - d.t_grid.back()) > 1e-9)
          fail("diagnostics.t_grid", "entries must be multiples of diagnostics.dt");
      }
    }
  }
  if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["kind"] = to_string(cfg.kind);
  ordered_json ini;
  ini["shape"] = to_string(cfg.initial.kind);
  switch (cfg.initial.kind) {
    case ShapeKind::Circle: ini["radius"] = cfg.initial.radius; break;
    case ShapeKind::Ellipse:
      ini["a"] = cfg.initial.a;
      ini["b"] = cfg.initial.b;
      break;
    case ShapeKind::Illposed:
      ini["epsilon"] = cfg.initial.illposed.epsilon;
      ini["n_nodes"] = cfg.initial.illposed.n_nodes;
      ini["blend_width"] = cfg.initial.illposed.blend_width;
      ini["base_radius"] = cfg.initial.illposed.base_radius;
      break;
    case ShapeKind::File: ini["path"] = cfg.initial.path; break;
  }
  j["initial"] = ini;
  const SimulationConfig& s = cfg.simulation;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : s.invariant_tolerances) tol[k] = v;
  j["simulation"] = {{"n_nodes", s.n_nodes},
                     {"dt", s.dt},
                     {"t_end", s.t_end},
                     {"formulation", to_string(s.formulation)},
                     {"resample_every", s.resample_every},
                     {"snapshot_stride", s.snapshot_stride},
                     {"invariant_tolerances", tol},
                     {"closure_projection", s.closure_projection},
                     {"closure_tolerance", s.closure_tolerance},
                     {"record_a", s.record_a},
                     {"arc_chord_cap", s.frame.arc_chord_cap},
                     {"tail_fraction", s.frame.tail_fraction}};
  const DiagnosticsConfig& d = cfg.diagnostics;
  j["diagnostics"] = {{"p_grid", list(d.p_grid)},
                      {"t_grid", list(d.t_grid)},
                      {"beta", list(d.beta)},
                      {"dt", d.dt},
                      {"nonlinear", d.nonlinear}};
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

CurveState circle(std::size_t n, double radius) {
  LagrangianGrid grid(n);
  std::vector<double> x(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = radius * std::cos(grid.label(j));
    y[j] = radius * std::sin(grid.label(j));
  }
  return CurveState::from_points(std::move(x), std::move(y));
}

CurveState ellipse(std::size_t n, double a, double b) {
  LagrangianGrid grid(n);
  std::vector<double> x(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = a * std::cos(grid.label(j));
    y[j] = b * std::sin(grid.label(j));
  }
  return CurveState::from_points(std::move(x), std::move(y));
}

CurveState initial_curve(const ExperimentConfig& cfg) {
  const InitialShape& s = cfg.initial;
  switch (s.kind) {
    case ShapeKind::Circle: return circle(cfg.simulation.n_nodes, s.radius);
    case ShapeKind::Ellipse: return ellipse(cfg.simulation.n_nodes, s.a, s.b);
    case ShapeKind::Illposed: return build_illposed_data(s.illposed).curve;
    case ShapeKind::File: {
      AnySnapshot snap = load_snapshot(s.path);
      if (auto* c = std::get_if<CurveState>(&snap)) return *c;
      const IntrinsicState& st = std::get<IntrinsicState>(snap);
      CurveState c = reconstruct_curve(st, {cfg.simulation.closure_tolerance});
      c.time = st.time;
      return c;
    }
  }
  return circle(cfg.simulation.n_nodes, 1.0);
}

std::vector<HilbertCheckRow> hilbert_identities(std::size_t n) {
  LagrangianGrid grid(n);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    double xi = grid.label(j);
    v[j] = std::exp(std::sin(xi)) + 0.5 * std::cos(3.0 * xi) * std::sin(xi) + 0.25 * std::sin(7.0 * xi);
  }
  double m = spectral::mean(v);
  for (double& x : v) x -= m;
  PeriodicScalarField f(v);
  std::vector<double> minus_f(n);
  for (std::size_t j = 0; j < n; ++j) minus_f[j] = -v[j];

  PeriodicScalarField hf = hilbert(f);
  std::vector<HilbertCheckRow> rows;
  rows.push_back({"hilbert_squared_is_minus_identity", max_abs_diff(hilbert(hf).span(), minus_f), 1e-12});
  const double s = 0.3, t = 0.45;
  PeriodicScalarField composed = dispersion_group(dispersion_group(f, t), s);
  rows.push_back({"group_law", max_abs_diff(composed.span(), dispersion_group(f, s + t).span()), 1e-12});
  rows.push_back({"half_period_is_minus_identity", max_abs_diff(dispersion_group(f, 1.0).span(), minus_f), 1e-12});
  rows.push_back({"full_period_is_identity", max_abs_diff(dispersion_group(f, 2.0).span(), v), 1e-12});
  rows.push_back({"l2_isometry", std::abs(l2(hf.span()) - l2(v)), 1e-12});
  rows.push_back({"alternate_point_rule", max_abs_diff(pv_cot_quadrature(f).span(), hf.span()), 1e-10});
  return rows;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ensure_dir(cfg.output_dir);
  const auto start = std::chrono::steady_clock::now();

  ordered_json manifest;
  manifest["config"] = ordered_json::parse(config_to_json(cfg));
  manifest["versions"] = {{"patchlab", PATCHLAB_VERSION},
                          {"fftw", std::string(fftw_version)},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                          {"compiler", std::string(__VERSION__)}};
  manifest["threads"] = worker_count();
  manifest["started"] = utc_now();
  manifest["status"] = "running";
  const std::string manifest_path = cfg.output_dir + "/manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");

  Outputs out{cfg.output_dir, {}};
  auto finish = [&](const std::string& status, const std::string& error) {
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["status"] = status;
    if (!error.empty()) manifest["error"] = error;
    manifest["outputs"] = out.summary.files;
    manifest["wall_time_seconds"] = wall;
    write_text(manifest_path, manifest.dump(2) + "\n");
  };
  try {
    switch (cfg.kind) {
      case ExperimentKind::Simulate: simulate(cfg, initial_curve(cfg), out); break;
      case ExperimentKind::Diagnose: diagnose(cfg, initial_curve(cfg), out); break;
      case ExperimentKind::Inflation: inflation(cfg, out); break;
      case ExperimentKind::CompareFormulations: compare(cfg, initial_curve(cfg), out); break;
      case ExperimentKind::HilbertCheck: hilbert_check(cfg, out); break;
    }
  } catch (const std::exception& e) {
    finish("failed", e.what());
    throw;
  }
  finish("ok", "");
  return out.summary;
}

std::string describe_snapshot(const std::string& path) {
  AnySnapshot snap = load_snapshot(path);
  std::string text;
  auto add = [&](const char* fmt, auto... v) {
    char buf[200];
    std::snprintf(buf, sizeof buf, fmt, v...);
    text += buf;
    text += '\n';
  };
  auto range = [](const std::vector<double>& k) {
    return std::pair(*std::min_element(k.begin(), k.end()), *std::max_element(k.begin(), k.end()));
  };
  if (const auto* c = std::get_if<CurveState>(&snap)) {
    add("%s", "kind        curve");
    add("n           %zu", c->size());
    add("time        %.17g", c->time);
    if (c->orientation_flipped) add("%s", "orientation reversed to counterclockwise");
    InvariantRecord inv = invariants(*c);
    GeometricFrame f = build_frame(*c, unchecked({}));
    auto [lo, hi] = range(f.kappa);
    add("area        %.17g", inv.area);
    add("length      %.17g", inv.length);
    add("turning     %.17g", inv.turning);
    add("centroid    %.17g %.17g", inv.centroid.x, inv.centroid.y);
    add("kappa       [%.6g, %.6g]", lo, hi);
    add("arc-chord   %.6g", arc_chord_ratio(*c));
    add("tail        %.3e", std::max(spectral::tail_energy_fraction(c->x),
                                     spectral::tail_energy_fraction(c->y)));
  } else {
    const auto& s = std::get<IntrinsicState>(snap);
    add("%s", "kind        intrinsic");
    add("n           %zu", s.g.size());
    add("time        %.17g", s.time);
    ClosureResidual cr = closure_residual(s);
    double length = spectral::integrate(s.g);
    auto [lo, hi] = range(s.kappa);
    add("length      %.17g", length);
    add("turning     %.17g", cr.turning + 2.0 * kPi);
    add("closure     position %.3e, turning %.3e", std::hypot(cr.position.x, cr.position.y),
        std::abs(cr.turning));
    add("kappa       [%.6g, %.6g]", lo, hi);
    add("theta0      %.17g", s.theta0);
    add("gamma0      %.17g %.17g", s.gamma0.x, s.gamma0.y);
  }
  return text;
}

}  // namespace patchlab

#include "patchlab/illposedness_lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "json.hpp"

#include "patchlab/boundary_velocity.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/hilbert_dispersion.hpp"
#include "patchlab/io.hpp"
#include "patchlab/spectral.hpp"

namespace patchlab {

namespace {

constexpr double kPi = std::numbers::pi;

FrameOptions unchecked() {
  FrameOptions o;
  o.check_arc_chord = false;
  o.check_spectral_tail = false;
  return o;
}

double smooth_step(double t) {
  auto phi = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  double a = phi(t), b = phi(1.0 - t);
  return a / (a + b);
}

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace

void validate(const IllposedDataSpec& spec) {
  LagrangianGrid grid(spec.n_nodes);
  if (!(spec.epsilon >= 0.0 && spec.epsilon <= 0.5))
    throw ConfigError("illposed.epsilon must lie in [0, 0.5]");
  if (!(spec.base_radius > 0.0)) throw ConfigError("illposed.base_radius must be positive");
  if (!(spec.blend_width > 0.0)) throw ConfigError("illposed.blend_width must be positive");
  if (spec.epsilon + spec.blend_width >= 1.0)
    throw ConfigError("illposed.epsilon + blend_width must be below 1");
  if (spec.epsilon > 0.0 && spec.epsilon < 10.0 * grid.spacing())
    throw FeatureUnresolved("feature half-width " + std::to_string(spec.epsilon) +
                            " spans fewer than 10 grid spacings at n = " +
                            std::to_string(spec.n_nodes));
}

double rough_feature(double xi) {
  double r = std::abs(xi);
  if (r == 0.0) return 0.0;
  if (r >= 1.0) throw std::domain_error("rough_feature needs |xi| < 1");
  return std::copysign(1.0 / std::sqrt(-std::log(r)), xi);
}

double blend_weight(double abs_xi, double epsilon, double width) {
  if (abs_xi <= epsilon) return 1.0;
  if (abs_xi >= epsilon + width) return 0.0;
  return 1.0 - smooth_step((abs_xi - epsilon) / width);
}

IllposedData build_illposed_data(const IllposedDataSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_nodes;
  const double R = spec.base_radius;
  LagrangianGrid grid(n);
  std::vector<double> w(n, 0.0), kappa(n), corr(n), g(n, R);
  for (std::size_t j = 0; j < n; ++j) {
    double xi = grid.label(j);
    if (xi > kPi) xi -= 2.0 * kPi;
    if (spec.epsilon > 0.0) w[j] = blend_weight(std::abs(xi), spec.epsilon, spec.blend_width);
    double f = w[j] > 0.0 ? rough_feature(xi) : 0.0;
    corr[j] = 1.0 - w[j];
    kappa[j] = w[j] * f + corr[j] / R;
  }
  const double theta0 = 0.5 * kPi;
  ClosureFit fit = project_closure(g, kappa, corr, theta0);
  IntrinsicState intrinsic{grid, std::move(g), std::move(fit.kappa), theta0, {R, 0.0}, 0.0};
  CurveState curve = reconstruct_curve(intrinsic, {1.0e-10});
  return {std::move(curve), std::move(intrinsic), std::move(w), fit.coefficients, fit.iterations,
          fit.residual};
}

ForcingTerms forcing_terms(const CurveState& curve, const GeometricFrame& frame) {
  NormalKernelTerms nk = normal_kernel_terms(curve, frame);
  const std::size_t n = curve.size();
  ForcingTerms f;
  f.hilbert_kappa = spectral::hilbert(frame.kappa);
  f.a.resize(n);
  f.f_l.resize(n);
  f.f_n.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    f.a[j] = -nk.dsv_t[j];
    f.f_l[j] = -kPi * f.hilbert_kappa[j] + nk.pv[j];
    f.f_n[j] = -nk.k2_n[j] - nk.k4_n[j];
  }
  return f;
}

ReassemblyCheck reassembly_check(const CurveState& curve, const GeometricFrame& frame) {
  ForcingTerms f = forcing_terms(curve, frame);
  VectorField ds = ds_velocity(curve, frame);
  VectorField d2 = d2s_velocity(curve, frame);
  ReassemblyCheck r;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    double dsv_t = ds.x[j] * frame.tx[j] + ds.y[j] * frame.ty[j];
    double d2sv_n = d2.x[j] * frame.nx[j] + d2.y[j] * frame.ny[j];
    double rhs = -2.0 * frame.kappa[j] * dsv_t - d2sv_n;
    double rest = kPi * f.hilbert_kappa[j] + f.f_l[j] + f.f_n[j];
    double ak = f.a[j] * frame.kappa[j];
    r.literal = std::max(r.literal, std::abs(ak + rest - rhs));
    r.corrected = std::max(r.corrected, std::abs(3.0 * ak + rest - rhs));
    r.scale = std::max(r.scale, std::abs(rhs));
  }
  return r;
}

std::vector<std::vector<double>> accumulate_a(const std::vector<double>& times,
                                              const std::vector<std::vector<double>>& history) {
  if (times.size() != history.size()) throw InputError("a log: times and fields differ in length");
  std::vector<std::vector<double>> out;
  if (history.empty()) return out;
  const std::size_t m = history.size(), n = history.front().size();
  out.assign(m, std::vector<double>(n, 0.0));
  bool uniform = m >= 4;
  const double h = m > 1 ? times[1] - times[0] : 0.0;
  for (std::size_t k = 1; uniform && k < m; ++k)
    uniform = std::abs((times[k] - times[k - 1]) - h) <= 1e-9 * std::abs(h);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const auto& a0 = history[k];
    const auto& a1 = history[k + 1];
    for (std::size_t j = 0; j < n; ++j) {
      double inc;
      if (!uniform) {
        inc = 0.5 * (times[k + 1] - times[k]) * (a0[j] + a1[j]);
      } else if (k == 0) {
        inc = h / 24.0 * (9.0 * a0[j] + 19.0 * a1[j] - 5.0 * history[2][j] + history[3][j]);
      } else if (k + 2 == m) {
        inc = h / 24.0 * (history[k - 2][j] - 5.0 * history[k - 1][j] + 19.0 * a0[j] + 9.0 * a1[j]);
      } else {
        inc = h / 24.0 * (-history[k - 1][j] + 13.0 * a0[j] + 13.0 * a1[j] - history[k + 2][j]);
      }
      out[k + 1][j] = out[k][j] + inc;
    }
  }
  return out;
}

std::vector<RemainderRow> duhamel_decompose(const Trajectory& traj) {
  if (traj.a_history.empty() || traj.a_history.size() != traj.a_times.size())
    throw MissingHistory("trajectory has no log of a; run with record_a enabled");
  std::vector<std::vector<double>> integral = accumulate_a(traj.a_times, traj.a_history);
  const Snapshot* first = nullptr;
  for (const auto& s : traj.snapshots)
    if (s.curve) {
      first = &s;
      break;
    }
  if (!first) throw MissingHistory("trajectory has no curve snapshots");
  const std::vector<double> kappa0 = build_frame(*first->curve, unchecked()).kappa;
  PeriodicScalarField k0(kappa0);
  std::vector<RemainderRow> rows;
  for (const auto& s : traj.snapshots) {
    if (!s.curve) continue;
    auto it = std::find_if(traj.a_times.begin(), traj.a_times.end(),
                           [&](double t) { return same_time(t, s.time); });
    if (it == traj.a_times.end()) continue;
    const auto& A = integral[static_cast<std::size_t>(it - traj.a_times.begin())];
    GeometricFrame f = build_frame(*s.curve, unchecked());
    PeriodicScalarField lin = dispersion_group(k0, s.time - first->time);
    std::vector<double> r(f.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = std::exp(-A[j]) * f.kappa[j] - lin[j];
    rows.push_back({s.time, sup_norm(r), holder_seminorm(r, 0.5)});
  }
  return rows;
}

std::vector<double> default_p_grid() {
  std::vector<double> p;
  for (double v = 1.0; v <= 1024.0; v *= 2.0) p.push_back(v);
  p.push_back(kSupNorm);
  return p;
}

std::vector<double> default_t_grid() {
  std::vector<double> t;
  for (int k = 0; k <= 24; ++k) t.push_back(k / 20.0);
  return t;
}

DiagnosticsReport inflation_experiment(const InflationOptions& opt) {
  validate(opt.spec);
  if (opt.t_grid.empty() || opt.p_grid.empty()) throw ConfigError("t_grid and p_grid must be non-empty");
  for (std::size_t k = 0; k < opt.t_grid.size(); ++k) {
    double t = opt.t_grid[k];
    if (!(t >= 0.0 && t <= 2.0)) throw ConfigError("t_grid entries must lie in [0, 2]");
    if (k && !(t > opt.t_grid[k - 1])) throw ConfigError("t_grid must be strictly increasing");
  }
  for (double p : opt.p_grid)
    if (!(p >= 1.0) || (std::isfinite(p) && p > 1024.0))
      throw ConfigError("p_grid entries must lie in [1, 1024] or be the sup sentinel");
  if (!(opt.forcing_beta > 0.0 && opt.forcing_beta <= 1.0))
    throw ConfigError("forcing beta must lie in (0, 1]");

  DiagnosticsReport rep;
  rep.spec = opt.spec;
  rep.p_grid = opt.p_grid;
  rep.t_grid = opt.t_grid;
  rep.forcing_beta = opt.forcing_beta;
  rep.nonlinear = opt.nonlinear;

  IllposedData data = build_illposed_data(opt.spec);
  rep.newton_iterations = data.newton_iterations;
  rep.closure_residual = data.closure_residual;

  PeriodicScalarField k0(data.intrinsic.kappa);
  for (double t : opt.t_grid) {
    PeriodicScalarField kt = dispersion_group(k0, t);
    rep.linear_lp_table.push_back(lp_norms(kt.span(), data.intrinsic.g, opt.p_grid));
    rep.linear_slopes.push_back(inflation_slope(opt.p_grid, rep.linear_lp_table.back()));
  }
  if (!opt.nonlinear) return rep;

  if (!(opt.dt > 0.0)) throw ConfigError("inflation dt must be positive");
  const double t_end = opt.t_grid.back();
  SimulationConfig cfg;
  cfg.n_nodes = opt.spec.n_nodes;
  cfg.dt = opt.dt;
  cfg.t_end = t_end;
  cfg.formulation = Formulation::CDE;
  cfg.resample_every = 0;
  cfg.snapshot_stride = 1;
  cfg.record_a = true;
  cfg.frame.check_spectral_tail = false;
  if (t_end > 0.0) {
    double steps = std::round(t_end / opt.dt);
    for (double t : opt.t_grid) {
      double k = t / t_end * steps;
      if (std::abs(k - std::round(k)) > 1e-6)
        throw ConfigError("t_grid entry " + std::to_string(t) + " is not a multiple of dt");
    }
  }
  Trajectory traj = run(cfg, data.curve);
  rep.dt = traj.dt;

  std::vector<RemainderRow> rem = duhamel_decompose(traj);
  for (double t : opt.t_grid) {
    auto s = std::find_if(traj.snapshots.begin(), traj.snapshots.end(),
                          [&](const Snapshot& sn) { return same_time(sn.time, t); });
    if (s == traj.snapshots.end()) throw NumericalError("no snapshot at t = " + std::to_string(t));
    GeometricFrame f = build_frame(*s->curve, unchecked());
    rep.lp_table.push_back(lp_norms(f.kappa, f.g, opt.p_grid));
    rep.slopes.push_back(inflation_slope(opt.p_grid, rep.lp_table.back()));
    ForcingTerms ft = forcing_terms(*s->curve, f);
    ForcingNormRow row;
    row.t = t;
    row.a_sup = sup_norm(ft.a);
    row.a_holder = holder_seminorm(ft.a, opt.forcing_beta);
    row.fl_sup = sup_norm(ft.f_l);
    row.fl_holder = holder_seminorm(ft.f_l, opt.forcing_beta);
    row.fn_sup = sup_norm(ft.f_n);
    row.fn_holder = holder_seminorm(ft.f_n, opt.forcing_beta);
    rep.forcing.push_back(row);
    auto r = std::find_if(rem.begin(), rem.end(), [&](const RemainderRow& x) { return same_time(x.t, t); });
    if (r != rem.end()) rep.remainder.push_back(*r);
  }
  return rep;
}

void write_report(const DiagnosticsReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto table = [&](const std::string& name, const std::vector<std::vector<double>>& tab) {
    CsvWriter csv(dir + "/" + name, {"t", "p", "norm"});
    for (std::size_t i = 0; i < tab.size(); ++i)
      for (std::size_t k = 0; k < rep.p_grid.size(); ++k) csv.row({rep.t_grid[i], rep.p_grid[k], tab[i][k]});
  };
  auto slopes = [&](const std::string& name, const std::vector<double>& s) {
    CsvWriter csv(dir + "/" + name, {"t", "slope"});
    for (std::size_t i = 0; i < s.size(); ++i) csv.row({rep.t_grid[i], s[i]});
  };
  table("linear_lp_table.csv", rep.linear_lp_table);
  slopes("linear_slopes.csv", rep.linear_slopes);
  if (rep.nonlinear) {
    table("lp_table.csv", rep.lp_table);
    slopes("slopes.csv", rep.slopes);
    CsvWriter rem(dir + "/remainder.csv", {"t", "sup", "holder_half"});
    for (const auto& r : rep.remainder) rem.row({r.t, r.sup, r.holder_half});
    CsvWriter frc(dir + "/forcing.csv",
                  {"t", "a_sup", "a_holder", "fl_sup", "fl_holder", "fn_sup", "fn_holder"});
    for (const auto& r : rep.forcing)
      frc.row({r.t, r.a_sup, r.a_holder, r.fl_sup, r.fl_holder, r.fn_sup, r.fn_holder});
  }

  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  auto list = [&](const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  ordered_json j;
  j["spec"] = {{"epsilon", rep.spec.epsilon},
               {"n_nodes", rep.spec.n_nodes},
               {"blend_width", rep.spec.blend_width},
               {"base_radius", rep.spec.base_radius}};
  j["newton_iterations"] = rep.newton_iterations;
  j["closure_residual"] = rep.closure_residual;
  j["nonlinear"] = rep.nonlinear;
  j["dt"] = rep.dt;
  j["forcing_beta"] = rep.forcing_beta;
  j["p_grid"] = list(rep.p_grid);
  j["t_grid"] = list(rep.t_grid);
  j["linear_slopes"] = list(rep.linear_slopes);
  if (rep.nonlinear) {
    j["slopes"] = list(rep.slopes);
    ordered_json r = ordered_json::array();
    for (const auto& x : rep.remainder) r.push_back({{"t", x.t}, {"sup", x.sup}, {"holder_half", x.holder_half}});
    j["remainder"] = r;
  }
  write_text(dir + "/report.json", j.dump(2) + "\n");
}

}  // namespace patchlab

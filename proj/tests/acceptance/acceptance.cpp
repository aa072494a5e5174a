// Acceptance run: one line per criterion, exit status 1 if any fails.
// usage: acceptance <patchlab executable> <work directory>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "patchlab/boundary_velocity.hpp"
#include "patchlab/experiment.hpp"
#include "patchlab/illposedness_lab.hpp"
#include "patchlab/io.hpp"
#include "patchlab/patch_evolution.hpp"
#include "patchlab/spectral.hpp"

using namespace patchlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) r.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(r);
  }
  return rows;
}

bool same_t(double a, double b) { return std::abs(a - b) < 1e-9; }

int run_cli(const std::string& exe, const fs::path& config) {
  std::string cmd = "\"" + exe + "\" run -q \"" + config.string() + "\"";
  return std::system(cmd.c_str());
}

struct Drift {
  double area = 0.0;
  double turning = 0.0;
};

Drift drift(const std::vector<InvariantRecord>& log) {
  Drift d;
  for (const auto& r : log) {
    d.area = std::max(d.area, std::abs(r.area - log.front().area) / std::abs(log.front().area));
    d.turning = std::max(d.turning, std::abs(r.turning - 2.0 * kPi));
  }
  return d;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <patchlab> <workdir>\n");
    return 2;
  }
  const std::string exe = argv[1];
  const fs::path work = argv[2];
  fs::remove_all(work);
  fs::create_directories(work);

  // 1: Rankine circle
  Drift circle_drift;
  {
    auto t0 = std::chrono::steady_clock::now();
    SimulationConfig cfg;
    cfg.n_nodes = 256;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    cfg.snapshot_stride = 10;
    Trajectory tr = run(cfg, circle(256, 1.0));
    double secs = seconds_since(t0);
    double kerr = 0.0, angle = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      const CurveState& c = *tr.snapshots[k].curve;
      GeometricFrame f = build_frame(c);
      for (double v : f.kappa) kerr = std::max(kerr, std::abs(v - 1.0));
      double a = std::atan2(c.y[0], c.x[0]);
      if (k) angle += std::remainder(a - prev, 2.0 * kPi);
      prev = a;
    }
    circle_drift = drift(tr.invariant_log);
    bool pass = kerr <= 1e-6 && std::abs(std::abs(angle) - kPi) <= 1e-4 && secs <= 30.0;
    verdict(1, pass, fmt("max|kappa-1| = %.2e, rotation angle %.10f (|pi - |angle|| = %.2e), %.1f s", kerr,
                         angle, std::abs(std::abs(angle) - kPi), secs));
  }

  // 2: Kirchhoff ellipse, run to t = 1 for criterion 3
  Drift ellipse_drift;
  {
    SimulationConfig cfg;
    cfg.n_nodes = 512;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    cfg.snapshot_stride = 250;
    Trajectory tr = run(cfg, ellipse(512, 2.0, 1.0));
    const Snapshot* quarter = nullptr;
    for (const auto& s : tr.snapshots)
      if (same_t(s.time, 0.25)) quarter = &s;
    double angle = orientation_angle(*quarter->curve) - orientation_angle(*tr.snapshots.front().curve);
    double expected = 4.0 * kPi / 9.0 * 0.25;
    double rel = std::abs(std::abs(angle) - expected) / expected;
    ellipse_drift = drift(tr.invariant_log);
    verdict(2, rel <= 0.005, fmt("angle %.8f vs %.8f, relative error %.2e", angle, expected, rel));
  }

  // 3: conservation over [0, 1]
  {
    bool pass = circle_drift.area <= 1e-6 && ellipse_drift.area <= 1e-6 && circle_drift.turning <= 1e-8 &&
                ellipse_drift.turning <= 1e-8;
    verdict(3, pass, fmt("area drift %.2e / %.2e, turning error %.2e / %.2e (circle / ellipse)",
                         circle_drift.area, ellipse_drift.area, circle_drift.turning, ellipse_drift.turning));
  }

  // 4: operator identities
  {
    std::vector<HilbertCheckRow> rows = hilbert_identities(1024);
    double worst = 0.0;
    for (const auto& r : rows)
      if (r.identity == "hilbert_squared_is_minus_identity" || r.identity == "group_law" ||
          r.identity == "half_period_is_minus_identity")
        worst = std::max(worst, r.error);
    verdict(4, worst <= 1e-12, fmt("worst identity error %.2e at n = 1024", worst));
  }

  // 5: formula cross-checks
  {
    CurveState e = ellipse(512, 2.0, 1.0);
    GeometricFrame f = build_frame(e);
    VectorField d = ds_velocity(e, f);
    std::vector<double> alt = ds_velocity_tangential(e, f);
    double a_err = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j)
      a_err = std::max(a_err, std::abs(d.x[j] * f.tx[j] + d.y[j] * f.ty[j] - alt[j]));

    std::vector<double> errs;
    for (std::size_t n = 256; n <= 2048; n *= 2) {
      CurveState c = ellipse(n, 2.0, 1.0);
      GeometricFrame g = build_frame(c);
      VectorField ds = ds_velocity(c, g), d2 = d2s_velocity(c, g);
      std::vector<double> dx = spectral::derivative(ds.x), dy = spectral::derivative(ds.y);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double rx = dx[j] / g.g[j] - d2.x[j], ry = dy[j] / g.g[j] - d2.y[j];
        num += rx * rx + ry * ry;
        den += d2.x[j] * d2.x[j] + d2.y[j] * d2.y[j];
      }
      errs.push_back(std::sqrt(num / den));
    }
    double worst_ratio = 1e300;
    for (std::size_t k = 1; k < errs.size(); ++k) worst_ratio = std::min(worst_ratio, errs[k - 1] / errs[k]);

    CurveState big = ellipse(1024, 2.0, 1.0);
    ReassemblyCheck re = reassembly_check(big, build_frame(big));

    bool pa = a_err <= 1e-8, pb = worst_ratio >= 4.0, pc = re.literal <= 1e-6;
    std::string detail = fmt("(a) %.2e; (b) errors %.2e %.2e %.2e", a_err, errs[0], errs[1], errs[2]) +
                         fmt(" %.2e, worst ratio %.2f; ", errs[3], worst_ratio) +
                         fmt("(c) residual %.2e (scale %.2f), with 3a*kappa in place of a*kappa %.2e", re.literal,
                             re.scale, re.corrected);
    detail += std::string(" [") + (pa ? "a ok" : "a fails") + ", " + (pb ? "b ok" : "b fails") + ", " +
              (pc ? "c ok" : "c fails") + "]";
    verdict(5, pa && pb && pc, detail);
  }

  // 6: formulation equivalence
  {
    SimulationConfig cfg;
    cfg.n_nodes = 512;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    cfg.formulation = Formulation::Both;
    cfg.resample_every = 0;
    cfg.snapshot_stride = 100;
    Trajectory tr = run(cfg, ellipse(512, 2.0, 1.0));
    double worst = 0.0;
    for (const auto& s : tr.snapshots) {
      FrameOptions fo;
      GeometricFrame f = build_frame(*s.curve, fo);
      worst = std::max(worst, max_abs_diff(f.kappa, s.intrinsic->kappa));
    }
    verdict(6, worst <= 1e-5, fmt("max |dkappa| = %.2e at t = 0.1", worst));
  }

  // 7: linear norm inflation
  {
    auto t0 = std::chrono::steady_clock::now();
    InflationOptions opt;
    opt.spec.n_nodes = 8192;
    opt.t_grid = {0.0, 0.5, 1.0};
    opt.p_grid = default_p_grid();
    opt.nonlinear = false;
    DiagnosticsReport rep = inflation_experiment(opt);
    double secs = seconds_since(t0);
    double s0 = rep.linear_slopes[0], s5 = rep.linear_slopes[1], s1 = rep.linear_slopes[2];
    bool pass = s5 >= 0.4 && s5 <= 0.6 && s0 <= 0.1 && s1 <= 0.1 && secs <= 300.0;
    verdict(7, pass, fmt("slopes t=0: %.4f, t=0.5: %.4f, t=1: %.4f (%.1f s)", s0, s5, s1, secs));
  }

  // 8 and 9: full nonlinear runs through the CLI
  const fs::path c4096 = work / "inflation_4096.json";
  write_text(c4096.string(), "{\"kind\": \"inflation\", \"initial\": {\"shape\": \"illposed\"}, \"output_dir\": \"" +
                                 (work / "inflation_4096").string() + "\"}\n");
  auto t8 = std::chrono::steady_clock::now();
  int rc4096 = run_cli(exe, c4096);
  double secs8 = seconds_since(t8);
  {
    if (rc4096 != 0) {
      verdict(8, false, "inflation run failed with status " + std::to_string(rc4096));
    } else {
      auto lp = read_csv(work / "inflation_4096" / "lp_table.csv");
      auto sl = read_csv(work / "inflation_4096" / "slopes.csv");
      double l05 = NAN, l095 = NAN;
      for (const auto& r : lp) {
        if (r[1] != 256.0) continue;
        if (same_t(r[0], 0.5)) l05 = r[2];
        if (same_t(r[0], 0.95)) l095 = r[2];
      }
      bool pa = l05 > l095;
      bool pb = false;
      double tmin = NAN;
      for (std::size_t i = 1; i + 1 < sl.size(); ++i) {
        double t = sl[i][0];
        if (t < 0.9 - 1e-9 || t > 1.1 + 1e-9) continue;
        if (sl[i][1] < sl[i - 1][1] && sl[i][1] <= sl[i + 1][1]) {
          pb = true;
          tmin = t;
        }
      }
      std::string profile;
      for (const auto& r : sl)
        if (r[0] > 0.75 && r[0] < 1.15) profile += fmt(" %.2f:%.4f", r[0], r[1]);
      verdict(8, pa && pb,
              fmt("L256 at t=0.5: %.4f, at t=0.95: %.4f; slope minimum in [0.9,1.1]: %s", l05, l095) +
                  (pb ? fmt("t = %.2f", tmin) : std::string("none")) + "; slopes" + profile +
                  fmt(" (%.0f s)", secs8));
    }
  }

  {
    const fs::path c8192 = work / "inflation_8192.json";
    write_text(c8192.string(),
               "{\"kind\": \"inflation\", \"initial\": {\"shape\": \"illposed\", \"n_nodes\": 8192},\n"
               " \"diagnostics\": {\"t_grid\": [0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6,"
               " 0.65, 0.7, 0.75, 0.8, 0.85, 0.9]},\n \"output_dir\": \"" +
                   (work / "inflation_8192").string() + "\"}\n");
    auto t0 = std::chrono::steady_clock::now();
    int rc = run_cli(exe, c8192);
    double secs = seconds_since(t0);
    if (rc != 0 || rc4096 != 0) {
      verdict(9, false, "inflation run failed");
    } else {
      auto sup_until = [](const fs::path& p) {
        double s = 0.0;
        for (const auto& r : read_csv(p))
          if (r[0] <= 0.9 + 1e-9) s = std::max(s, r[1]);
        return s;
      };
      double s4 = sup_until(work / "inflation_4096" / "remainder.csv");
      double s8 = sup_until(work / "inflation_8192" / "remainder.csv");
      double change = std::abs(s8 - s4) / s4;
      verdict(9, change < 0.1,
              fmt("sup |R| over [0, 0.9]: %.6f (n = 4096), %.6f (n = 8192), change %.2f%% (%.0f s)", s4, s8,
                  100.0 * change, secs));
    }
  }

  // 10: determinism
  {
    const char* configs[] = {
        "{\"kind\": \"simulate\", \"initial\": {\"shape\": \"ellipse\", \"a\": 2, \"b\": 1},"
        " \"simulation\": {\"n_nodes\": 128, \"dt\": 0.005, \"t_end\": 0.1, \"formulation\": \"both\","
        " \"snapshot_stride\": 5}, \"output_dir\": \"%s\"}",
        "{\"kind\": \"inflation\", \"initial\": {\"shape\": \"illposed\", \"n_nodes\": 1024},"
        " \"diagnostics\": {\"t_grid\": [0, 0.1, 0.2]}, \"output_dir\": \"%s\"}",
        "{\"kind\": \"diagnose\", \"initial\": {\"shape\": \"ellipse\"}, \"output_dir\": \"%s\"}"};
    bool pass = true;
    int compared = 0;
    std::string detail;
    for (int k = 0; k < 3; ++k) {
      fs::path dirs[2];
      for (int rep = 0; rep < 2; ++rep) {
        dirs[rep] = work / ("determinism_" + std::to_string(k) + "_" + std::to_string(rep));
        char text[1024];
        std::snprintf(text, sizeof text, configs[k], dirs[rep].string().c_str());
        fs::path cfg = work / ("determinism_" + std::to_string(k) + "_" + std::to_string(rep) + ".json");
        write_text(cfg.string(), text);
        if (run_cli(exe, cfg) != 0) pass = false;
      }
      for (const auto& entry : fs::directory_iterator(dirs[0])) {
        std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        ++compared;
        if (!fs::exists(dirs[1] / name) || read_text(entry.path().string()) != read_text((dirs[1] / name).string())) {
          pass = false;
          detail += " differs: " + name;
        }
      }
    }
    verdict(10, pass && compared > 0, std::to_string(compared) + " data files compared byte for byte" + detail);
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

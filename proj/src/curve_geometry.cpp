#include "patchlab/curve_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "patchlab/errors.hpp"
#include "patchlab/parallel.hpp"
#include "patchlab/spectral.hpp"

namespace patchlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  return a - kTwoPi * std::round(a / kTwoPi);
}

std::vector<double> product(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

double spectral_energy(const spectral::Coefficients& c, std::size_t n, bool tail_only) {
  std::vector<double> e;
  e.reserve(c.size());
  for (std::size_t k = 1; k < c.size(); ++k)
    if (!tail_only || 3 * k > n) e.push_back(std::norm(c[k]));
  return pairwise_sum(e);
}

}  // namespace

LagrangianGrid::LagrangianGrid(std::size_t n_nodes) : n_(n_nodes) {
  if (n_nodes < 16 || n_nodes % 2 != 0)
    throw InputError("label grid needs an even node count >= 16, got " +
                     std::to_string(n_nodes));
}

double LagrangianGrid::spacing() const noexcept {
  return kTwoPi / static_cast<double>(n_);
}

double LagrangianGrid::label(std::size_t j) const noexcept {
  return spacing() * static_cast<double>(j);
}

std::vector<double> LagrangianGrid::labels() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = label(j);
  return out;
}

double LagrangianGrid::torus_distance(std::size_t j, std::size_t k) const noexcept {
  std::size_t m = j > k ? j - k : k - j;
  return spacing() * static_cast<double>(std::min(m, n_ - m));
}

double signed_area(std::span<const double> x, std::span<const double> y) {
  std::vector<double> xd = spectral::derivative(x);
  std::vector<double> yd = spectral::derivative(y);
  std::vector<double> integrand(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) integrand[j] = 0.5 * (x[j] * yd[j] - y[j] * xd[j]);
  return spectral::integrate(integrand);
}

CurveState CurveState::from_points(std::vector<double> x, std::vector<double> y, double time) {
  if (x.size() != y.size()) throw InputError("x and y must have the same length");
  LagrangianGrid grid(x.size());
  if (!(time >= 0.0)) throw InputError("curve time must be nonnegative");
  CurveState c{grid, std::move(x), std::move(y), time, false};
  if (signed_area(c.x, c.y) < 0.0) {
    std::reverse(c.x.begin() + 1, c.x.end());
    std::reverse(c.y.begin() + 1, c.y.end());
    c.orientation_flipped = true;
  }
  return c;
}

double arc_chord_ratio(const CurveState& curve) {
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> label_dist2(n);
  for (std::size_t m = 0; m < n; ++m) {
    double d = h * static_cast<double>(std::min(m, n - m));
    label_dist2[m] = d * d;
  }
  std::vector<double> row_ratio(n, 0.0), row_min(n, std::numeric_limits<double>::infinity()),
      row_max(n, 0.0);
  const double* x = curve.x.data();
  const double* y = curve.y.data();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double best = 0.0, rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
      for (std::size_t k = j + 1; k < n; ++k) {
        double dx = x[j] - x[k];
        double dy = y[j] - y[k];
        double r2 = dx * dx + dy * dy;
        best = std::max(best, label_dist2[k - j] / r2);
        rmin = std::min(rmin, r2);
        rmax = std::max(rmax, r2);
      }
      row_ratio[j] = best;
      row_min[j] = rmin;
      row_max[j] = rmax;
    }
  });
  double diam2 = *std::max_element(row_max.begin(), row_max.end());
  double min2 = *std::min_element(row_min.begin(), row_min.end());
  if (!(min2 > 1.0e-28 * diam2))
    throw DegenerateCurve("two boundary nodes coincide (min chord " +
                          std::to_string(std::sqrt(min2)) + ")");
  return std::sqrt(*std::max_element(row_ratio.begin(), row_ratio.end()));
}

GeometricFrame build_frame(const CurveState& curve, const FrameOptions& options) {
  const std::size_t n = curve.size();
  if (curve.y.size() != n || n != curve.grid.size())
    throw InputError("curve arrays do not match the label grid");

  spectral::Coefficients cx = spectral::forward(curve.x);
  spectral::Coefficients cy = spectral::forward(curve.y);
  if (options.check_spectral_tail) {
    double total = spectral_energy(cx, n, false) + spectral_energy(cy, n, false);
    double tail = spectral_energy(cx, n, true) + spectral_energy(cy, n, true);
    if (total > 0.0 && tail > options.tail_fraction * total)
      throw GridTooCoarse("position spectrum tail fraction " + std::to_string(tail / total) +
                          " exceeds " + std::to_string(options.tail_fraction));
  }

  std::vector<double> xd = spectral::derivative(curve.x);
  std::vector<double> yd = spectral::derivative(curve.y);
  std::vector<double> xdd = spectral::derivative(xd);
  std::vector<double> ydd = spectral::derivative(yd);

  GeometricFrame f;
  f.g.resize(n);
  f.tx.resize(n);
  f.ty.resize(n);
  f.nx.resize(n);
  f.ny.resize(n);
  f.kappa.resize(n);
  f.theta.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double g = std::hypot(xd[j], yd[j]);
    if (!(g > 0.0))
      throw NonSimpleCurve("metric vanishes at node " + std::to_string(j));
    f.g[j] = g;
    f.tx[j] = xd[j] / g;
    f.ty[j] = yd[j] / g;
    f.nx[j] = f.ty[j];
    f.ny[j] = -f.tx[j];
    f.kappa[j] = (xd[j] * ydd[j] - yd[j] * xdd[j]) / (g * g * g);
  }
  f.theta[0] = std::atan2(f.ty[0], f.tx[0]);
  double prev = f.theta[0];
  for (std::size_t j = 1; j < n; ++j) {
    double raw = std::atan2(f.ty[j], f.tx[j]);
    f.theta[j] = f.theta[j - 1] + wrap_angle(raw - prev);
    prev = raw;
  }

  if (options.check_arc_chord) {
    double ratio = arc_chord_ratio(curve);
    if (!(ratio <= options.arc_chord_cap))
      throw NonSimpleCurve("arc-chord ratio " + std::to_string(ratio) + " exceeds cap " +
                           std::to_string(options.arc_chord_cap));
  }
  return f;
}

std::vector<double> tangent_angle(std::span<const double> g, std::span<const double> kappa,
                                  double theta0) {
  std::vector<double> theta = spectral::cumulative_integral(product(kappa, g));
  for (double& t : theta) t += theta0;
  return theta;
}

ClosureResidual closure_residual(const IntrinsicState& state) {
  const std::size_t n = state.g.size();
  if (state.kappa.size() != n) throw InputError("g and kappa lengths differ");
  std::vector<double> theta = tangent_angle(state.g, state.kappa, state.theta0);
  std::vector<double> cx(n), cy(n);
  for (std::size_t j = 0; j < n; ++j) {
    cx[j] = std::cos(theta[j]) * state.g[j];
    cy[j] = std::sin(theta[j]) * state.g[j];
  }
  ClosureResidual r;
  r.position = {spectral::integrate(cx), spectral::integrate(cy)};
  r.turning = spectral::integrate(product(state.kappa, state.g)) - kTwoPi;
  return r;
}

namespace {

struct ClosureEval {
  Eigen::Vector3d r;
  double norm;
};

ClosureEval closure_eval(std::span<const double> g, std::span<const double> kappa, double theta0,
                         double length) {
  IntrinsicState st{LagrangianGrid(g.size()), {g.begin(), g.end()},
                    {kappa.begin(), kappa.end()}, theta0, {}, 0.0};
  ClosureResidual c = closure_residual(st);
  Eigen::Vector3d r(c.turning / kTwoPi, c.position.x / length, c.position.y / length);
  return {r, r.cwiseAbs().maxCoeff()};
}

}  // namespace

ClosureFit project_closure(std::span<const double> g, std::span<const double> kappa,
                           std::span<const double> weight, double theta0, int max_iterations,
                           double tolerance) {
  const std::size_t n = g.size();
  if (kappa.size() != n || weight.size() != n)
    throw InputError("project_closure: field lengths differ");
  const double length = spectral::integrate(g);
  const double h = kTwoPi / static_cast<double>(n);
  // Basis φ_m·w·g for m = 0 (constant), 1 (cos), 2 (sin).
  std::array<std::vector<double>, 3> basis;
  for (auto& b : basis) b.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double xi = h * static_cast<double>(j);
    basis[0][j] = weight[j];
    basis[1][j] = weight[j] * std::cos(xi);
    basis[2][j] = weight[j] * std::sin(xi);
  }
  ClosureFit fit;
  fit.kappa.assign(kappa.begin(), kappa.end());
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  auto kappa_for = [&](const Eigen::Vector3d& cc) {
    std::vector<double> k(kappa.begin(), kappa.end());
    for (std::size_t j = 0; j < n; ++j)
      k[j] += cc[0] * basis[0][j] + cc[1] * basis[1][j] + cc[2] * basis[2][j];
    return k;
  };
  ClosureEval cur = closure_eval(g, fit.kappa, theta0, length);
  for (int it = 1; it <= max_iterations; ++it) {
    fit.iterations = it;
    if (cur.norm <= tolerance) break;
    if (it == max_iterations)
      throw ClosureSolveFailed("closure Newton solve did not converge, residual " +
                                   std::to_string(cur.norm),
                               cur.norm);
    std::vector<double> theta = tangent_angle(g, fit.kappa, theta0);
    Eigen::Matrix3d jac;
    for (int m = 0; m < 3; ++m) {
      std::vector<double> bg = product(basis[m], g);
      std::vector<double> dtheta = spectral::cumulative_integral(bg);
      std::vector<double> sx(n), sy(n);
      for (std::size_t j = 0; j < n; ++j) {
        sx[j] = -std::sin(theta[j]) * g[j] * dtheta[j];
        sy[j] = std::cos(theta[j]) * g[j] * dtheta[j];
      }
      jac(0, m) = spectral::integrate(bg) / kTwoPi;
      jac(1, m) = spectral::integrate(sx) / length;
      jac(2, m) = spectral::integrate(sy) / length;
    }
    Eigen::Vector3d step = jac.colPivHouseholderQr().solve(-cur.r);
    double lambda = 1.0;
    for (int k = 0; k < 30; ++k) {
      Eigen::Vector3d trial = c + lambda * step;
      std::vector<double> kt = kappa_for(trial);
      ClosureEval next = closure_eval(g, kt, theta0, length);
      if (next.norm < cur.norm || k == 29) {
        c = trial;
        fit.kappa = std::move(kt);
        cur = next;
        break;
      }
      lambda *= 0.5;
    }
  }
  fit.coefficients = {c[0], c[1], c[2]};
  fit.residual = cur.norm;
  return fit;
}

CurveState reconstruct_curve(const IntrinsicState& state, const ReconstructOptions& options) {
  const std::size_t n = state.g.size();
  ClosureResidual r = closure_residual(state);
  double length = spectral::integrate(state.g);
  double pos = std::hypot(r.position.x, r.position.y);
  if (pos > options.closure_tolerance * length ||
      std::abs(r.turning) > options.closure_tolerance * kTwoPi)
    throw ClosureViolated("closure residual (" + std::to_string(pos) + ", " +
                          std::to_string(r.turning) + ") exceeds tolerance");

  std::vector<double> theta = tangent_angle(state.g, state.kappa, state.theta0);
  std::vector<double> vx(n), vy(n);
  for (std::size_t j = 0; j < n; ++j) {
    vx[j] = std::cos(theta[j]) * state.g[j];
    vy[j] = std::sin(theta[j]) * state.g[j];
  }
  double mx = spectral::mean(vx), my = spectral::mean(vy);
  for (std::size_t j = 0; j < n; ++j) {
    vx[j] -= mx;
    vy[j] -= my;
  }
  CurveState c{state.grid, spectral::cumulative_integral(vx), spectral::cumulative_integral(vy),
               state.time, false};
  for (std::size_t j = 0; j < n; ++j) {
    c.x[j] += state.gamma0.x;
    c.y[j] += state.gamma0.y;
  }
  return c;
}

GeometricFrame frame_from_intrinsic(const IntrinsicState& state) {
  const std::size_t n = state.g.size();
  GeometricFrame f;
  f.g = state.g;
  f.kappa = state.kappa;
  f.theta = tangent_angle(state.g, state.kappa, state.theta0);
  f.tx.resize(n);
  f.ty.resize(n);
  f.nx.resize(n);
  f.ny.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    f.tx[j] = std::cos(f.theta[j]);
    f.ty[j] = std::sin(f.theta[j]);
    f.nx[j] = f.ty[j];
    f.ny[j] = -f.tx[j];
  }
  return f;
}

IntrinsicState intrinsic_from_curve(const CurveState& curve, const GeometricFrame& frame) {
  return IntrinsicState{curve.grid, frame.g, frame.kappa, frame.theta[0], curve.point(0),
                        curve.time};
}

namespace {

// s(ξ) − s(0) for the interpolant of g, including the Nyquist cosine.
struct ArcLengthMap {
  spectral::Coefficients cg;
  std::size_t n;
  double mean_g;
  double base;

  double raw(double xi) const {
    const std::size_t half = n / 2;
    std::complex<double> step = std::polar(1.0, xi);
    std::complex<double> e = step;
    double acc = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
      // Re(c e^{ikξ} / (ik)) = Im(c e^{ikξ}) / k
      acc += 2.0 * (cg[k] * e).imag() / static_cast<double>(k);
      e *= step;
    }
    double hd = static_cast<double>(half);
    acc += cg[half].real() * std::sin(hd * xi) / hd;
    return acc / static_cast<double>(n);
  }
  double operator()(double xi) const { return mean_g * xi + raw(xi) - base; }
  double slope(double xi) const { return spectral::evaluate(cg, n, xi); }
};

double evaluate_fast(const spectral::Coefficients& c, std::size_t n, double xi) {
  const std::size_t half = n / 2;
  std::complex<double> step = std::polar(1.0, xi);
  std::complex<double> e = step;
  double acc = c[0].real();
  for (std::size_t k = 1; k < half; ++k) {
    acc += 2.0 * (c[k] * e).real();
    e *= step;
  }
  acc += c[half].real() * std::cos(static_cast<double>(half) * xi);
  return acc / static_cast<double>(n);
}

}  // namespace

CurveState resample_arclength(const CurveState& curve, const FrameOptions& options) {
  const std::size_t n = curve.size();
  GeometricFrame frame = build_frame(curve, options);
  ArcLengthMap s{spectral::forward(frame.g), n, spectral::mean(frame.g), 0.0};
  s.base = s.raw(0.0);
  const double length = kTwoPi * s.mean_g;
  const double h = curve.grid.spacing();

  std::vector<double> node_s = spectral::cumulative_integral(frame.g);
  spectral::Coefficients cx = spectral::forward(curve.x);
  spectral::Coefficients cy = spectral::forward(curve.y);
  CurveState out = curve;
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::size_t cursor = 0;
    for (std::size_t j = begin; j < end; ++j) {
      double target = length * static_cast<double>(j) / static_cast<double>(n);
      while (cursor + 1 < n && node_s[cursor + 1] <= target) ++cursor;
      double s0 = node_s[cursor];
      double s1 = cursor + 1 < n ? node_s[cursor + 1] : length;
      double xi = h * (static_cast<double>(cursor) + (target - s0) / (s1 - s0));
      for (int it = 0; it < 30; ++it) {
        double step = (s(xi) - target) / s.slope(xi);
        xi -= step;
        if (std::abs(step) < 1.0e-15 * kTwoPi) break;
      }
      out.x[j] = evaluate_fast(cx, n, xi);
      out.y[j] = evaluate_fast(cy, n, xi);
    }
  });
  return out;
}

}  // namespace patchlab

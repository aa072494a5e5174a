#include "patchlab/boundary_velocity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "patchlab/errors.hpp"
#include "patchlab/parallel.hpp"
#include "patchlab/spectral.hpp"

namespace patchlab {

namespace {

// Tables indexed by e = j − i ∈ (−n, n), stored at offset n.
struct OffsetTables {
  std::size_t n;
  std::vector<double> sin2;      // 4 sin²(π e / n)
  std::vector<double> half_cot;  // ½ cot((ξ_i − ξ_j)/2) = −½ cot(π e / n), 0 at e = 0

  explicit OffsetTables(std::size_t n_nodes) : n(n_nodes), sin2(2 * n_nodes), half_cot(2 * n_nodes) {
    std::vector<double> cot(n, 0.0);
    for (std::size_t e = 1; e < n; ++e) {
      if (2 * e < n)
        cot[e] = 1.0 / std::tan(std::numbers::pi * static_cast<double>(e) / static_cast<double>(n));
      else if (2 * e > n)
        cot[e] = -cot[n - e];
    }
    for (std::size_t e = 0; e < n; ++e) {
      double s = std::sin(std::numbers::pi * static_cast<double>(std::min(e, n - e)) /
                          static_cast<double>(n));
      sin2[n + e] = 4.0 * s * s;
      sin2[n - e] = sin2[n + e];
      half_cot[n + e] = -0.5 * cot[e];
      half_cot[n - e] = 0.5 * cot[e];
    }
  }
  // Pointers p such that p[j] is the entry for the pair (i, j).
  const double* sin2_row(std::size_t i) const { return sin2.data() + n - i; }
  const double* half_cot_row(std::size_t i) const { return half_cot.data() + n - i; }
};

void check_inputs(const CurveState& curve, const GeometricFrame& frame) {
  if (frame.size() != curve.size() || curve.y.size() != curve.size())
    throw InputError("curve and frame sizes differ");
}

[[noreturn]] void coincident_nodes(std::size_t i) {
  throw NonSimpleCurve("boundary nodes coincide with node " + std::to_string(i) +
                       "; singular quadrature undefined");
}

double row_sum(std::vector<double>& buf) { return pairwise_sum(buf); }

}  // namespace

VectorField velocity(const CurveState& curve, const GeometricFrame& frame) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> gx(n), gy(n);
  for (std::size_t j = 0; j < n; ++j) {
    gx[j] = frame.g[j] * frame.tx[j];
    gy[j] = frame.g[j] * frame.ty[j];
  }
  VectorField v{spectral::log_kernel(gx), spectral::log_kernel(gy)};
  OffsetTables tables(n);
  const double* x = curve.x.data();
  const double* y = curve.y.data();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> bx(n), by(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double* s2 = tables.sin2_row(i);
      const double xi = x[i], yi = y[i];
      double* bxp = bx.data();
      double* byp = by.data();
      for (std::size_t j = 0; j < n; ++j) {
        double dx = xi - x[j], dy = yi - y[j];
        double lr = 0.5 * std::log((dx * dx + dy * dy) / s2[j]);
        bxp[j] = gx[j] * lr;
        byp[j] = gy[j] * lr;
      }
      double lg = std::log(frame.g[i]);
      bx[i] = gx[i] * lg;
      by[i] = gy[i] * lg;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && !std::isfinite(bx[j] + by[j])) coincident_nodes(i);
      v.x[i] += h * row_sum(bx);
      v.y[i] += h * row_sum(by);
    }
  });
  return v;
}

Vec2 velocity_at(const CurveState& curve, const GeometricFrame& frame, std::size_t node) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> gx(n), gy(n);
  for (std::size_t j = 0; j < n; ++j) {
    gx[j] = frame.g[j] * frame.tx[j];
    gy[j] = frame.g[j] * frame.ty[j];
  }
  std::vector<double> sx = spectral::log_kernel(gx), sy = spectral::log_kernel(gy);
  std::vector<double> bx(n), by(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == node) {
      double lg = std::log(frame.g[j]);
      bx[j] = gx[j] * lg;
      by[j] = gy[j] * lg;
      continue;
    }
    double dx = curve.x[node] - curve.x[j], dy = curve.y[node] - curve.y[j];
    std::size_t m = j > node ? j - node : node - j;
    double s = std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
    double lr = 0.5 * std::log((dx * dx + dy * dy) / (4.0 * s * s));
    if (!std::isfinite(lr)) coincident_nodes(node);
    bx[j] = gx[j] * lr;
    by[j] = gy[j] * lr;
  }
  return {sx[node] + h * pairwise_sum(bx), sy[node] + h * pairwise_sum(by)};
}

VectorField ds_velocity(const CurveState& curve, const GeometricFrame& frame) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> dg = spectral::derivative(frame.g);
  OffsetTables tables(n);
  VectorField out{std::vector<double>(n), std::vector<double>(n)};
  const double *x = curve.x.data(), *y = curve.y.data();
  const double *tx = frame.tx.data(), *ty = frame.ty.data(), *g = frame.g.data();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> bx(n), by(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double* hc = tables.half_cot_row(i);
      const double xi = x[i], yi = y[i], txi = tx[i], tyi = ty[i];
      for (std::size_t j = 0; j < n; ++j) {
        double dx = xi - x[j], dy = yi - y[j];
        double w = g[j] * (dx * txi + dy * tyi) / (dx * dx + dy * dy);
        bx[j] = tx[j] * w - txi * hc[j];
        by[j] = ty[j] * w - tyi * hc[j];
      }
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && !std::isfinite(bx[j] + by[j])) coincident_nodes(i);
      double c_t = -dg[i] / (2.0 * g[i]);
      double c_n = g[i] * frame.kappa[i];
      bx[i] = c_t * txi + c_n * frame.nx[i];
      by[i] = c_t * tyi + c_n * frame.ny[i];
      out.x[i] = h * row_sum(bx);
      out.y[i] = h * row_sum(by);
    }
  });
  return out;
}

std::vector<double> ds_velocity_tangential(const CurveState& curve, const GeometricFrame& frame) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> out(n);
  const double *x = curve.x.data(), *y = curve.y.data();
  const double *tx = frame.tx.data(), *ty = frame.ty.data(), *g = frame.g.data();
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> b(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double xi = x[i], yi = y[i], nxi = frame.nx[i], nyi = frame.ny[i];
      for (std::size_t j = 0; j < n; ++j) {
        double dx = xi - x[j], dy = yi - y[j];
        double dn = dx * nxi + dy * nyi;
        double tn = tx[j] * nxi + ty[j] * nyi;
        b[j] = -tn * dn * g[j] / (dx * dx + dy * dy);
      }
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && !std::isfinite(b[j])) coincident_nodes(i);
      b[i] = 0.0;
      out[i] = h * row_sum(b);
    }
  });
  return out;
}

SecondDerivativeTerms d2s_velocity_terms(const CurveState& curve, const GeometricFrame& frame) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> kg(n);
  for (std::size_t j = 0; j < n; ++j) kg[j] = frame.kappa[j] * frame.g[j];
  std::vector<double> dg = spectral::derivative(frame.g);
  std::vector<double> dkg = spectral::derivative(kg);
  OffsetTables tables(n);

  auto zeros = [n] { return VectorField{std::vector<double>(n), std::vector<double>(n)}; };
  SecondDerivativeTerms out{zeros(), zeros(), zeros(), zeros()};
  const double *x = curve.x.data(), *y = curve.y.data();
  const double *tx = frame.tx.data(), *ty = frame.ty.data();
  const double *nx = frame.nx.data(), *ny = frame.ny.data();
  const double *g = frame.g.data(), *kappa = frame.kappa.data();

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> b1x(n), b1y(n), b2x(n), b2y(n), b3x(n), b3y(n), b4x(n), b4y(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double* hc = tables.half_cot_row(i);
      const double xi = x[i], yi = y[i];
      const double txi = tx[i], tyi = ty[i], nxi = nx[i], nyi = ny[i];
      const double ki = kappa[i], gi = g[i];
      for (std::size_t j = 0; j < n; ++j) {
        double dx = xi - x[j], dy = yi - y[j];
        double inv_r2 = 1.0 / (dx * dx + dy * dy);
        double dt = dx * txi + dy * tyi;
        double dn = dx * nxi + dy * nyi;
        double ux = txi - tx[j], uy = tyi - ty[j];
        double gtx = g[j] * tx[j], gty = g[j] * ty[j];
        // K1 integrand without its leading minus, model term subtracted.
        double q = kappa[j] * g[j] * dt * inv_r2;
        b1x[j] = q * nx[j] - ki * nxi * hc[j];
        b1y[j] = q * ny[j] - ki * nyi * hc[j];
        double w2 = 0.5 * (ux * ux + uy * uy) * inv_r2;
        b2x[j] = gtx * w2;
        b2y[j] = gty * w2;
        double w3 = dn * inv_r2;
        b3x[j] = gtx * w3;
        b3y[j] = gty * w3;
        double w4 = dt * (dx * ux + dy * uy) * inv_r2 * inv_r2;
        b4x[j] = gtx * w4;
        b4y[j] = gty * w4;
      }
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && !std::isfinite(b1x[j] + b1y[j] + b4x[j] + b4y[j])) coincident_nodes(i);
      // Diagonal limits from the local expansion at ξ_i.
      double c1_n = ki * dg[i] / (2.0 * gi) - dkg[i] / gi;
      double c1_t = -ki * ki * gi;
      b1x[i] = c1_n * nxi + c1_t * txi;
      b1y[i] = c1_n * nyi + c1_t * tyi;
      b2x[i] = 0.5 * gi * ki * ki * txi;
      b2y[i] = 0.5 * gi * ki * ki * tyi;
      b3x[i] = 0.5 * gi * ki * txi;
      b3y[i] = 0.5 * gi * ki * tyi;
      b4x[i] = 0.0;
      b4y[i] = 0.0;
      out.k1.x[i] = -h * row_sum(b1x);
      out.k1.y[i] = -h * row_sum(b1y);
      out.k2.x[i] = h * row_sum(b2x);
      out.k2.y[i] = h * row_sum(b2y);
      out.k3.x[i] = -ki * h * row_sum(b3x);
      out.k3.y[i] = -ki * h * row_sum(b3y);
      out.k4.x[i] = -2.0 * h * row_sum(b4x);
      out.k4.y[i] = -2.0 * h * row_sum(b4y);
    }
  });
  return out;
}

NormalKernelTerms normal_kernel_terms(const CurveState& curve, const GeometricFrame& frame) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> kg(n);
  for (std::size_t j = 0; j < n; ++j) kg[j] = frame.kappa[j] * frame.g[j];
  std::vector<double> dg = spectral::derivative(frame.g);
  std::vector<double> dkg = spectral::derivative(kg);
  OffsetTables tables(n);
  NormalKernelTerms out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                        std::vector<double>(n)};
  const double *x = curve.x.data(), *y = curve.y.data();
  const double *tx = frame.tx.data(), *ty = frame.ty.data();
  const double *nx = frame.nx.data(), *ny = frame.ny.data();
  const double *g = frame.g.data(), *kappa = frame.kappa.data();

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> ba(n), bp(n), b2(n), b4(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double* hc = tables.half_cot_row(i);
      const double xi = x[i], yi = y[i];
      const double txi = tx[i], tyi = ty[i], nxi = nx[i], nyi = ny[i];
      const double ki = kappa[i], gi = g[i];
      for (std::size_t j = 0; j < n; ++j) {
        double dx = xi - x[j], dy = yi - y[j];
        double inv_r2 = 1.0 / (dx * dx + dy * dy);
        double dt = dx * txi + dy * tyi;
        double dn = dx * nxi + dy * nyi;
        double ux = txi - tx[j], uy = tyi - ty[j];
        double tn = g[j] * (tx[j] * nxi + ty[j] * nyi);
        ba[j] = -tn * dn * inv_r2;
        bp[j] = kappa[j] * g[j] * (nx[j] * nxi + ny[j] * nyi) * dt * inv_r2 - ki * hc[j];
        b2[j] = tn * 0.5 * (ux * ux + uy * uy) * inv_r2;
        b4[j] = tn * dt * (dx * ux + dy * uy) * inv_r2 * inv_r2;
      }
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && !std::isfinite(ba[j] + bp[j] + b2[j] + b4[j])) coincident_nodes(i);
      ba[i] = 0.0;
      bp[i] = ki * dg[i] / (2.0 * gi) - dkg[i] / gi;
      b2[i] = 0.0;
      b4[i] = 0.0;
      out.dsv_t[i] = h * row_sum(ba);
      out.pv[i] = h * row_sum(bp);
      out.k2_n[i] = h * row_sum(b2);
      out.k4_n[i] = -2.0 * h * row_sum(b4);
    }
  });
  return out;
}

Vec2 ds_velocity_at(const CurveState& curve, const GeometricFrame& frame, std::size_t node) {
  check_inputs(curve, frame);
  const std::size_t n = curve.size();
  const double h = curve.grid.spacing();
  std::vector<double> dg = spectral::derivative(frame.g);
  std::vector<double> bx(n), by(n);
  const std::size_t i = node;
  const double txi = frame.tx[i], tyi = frame.ty[i];
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    double dx = curve.x[i] - curve.x[j], dy = curve.y[i] - curve.y[j];
    long e = static_cast<long>(j) - static_cast<long>(i);
    if (e < 0) e += static_cast<long>(n);
    double hc = 2 * static_cast<std::size_t>(e) == n
                    ? 0.0
                    : -0.5 / std::tan(std::numbers::pi * static_cast<double>(e) /
                                      static_cast<double>(n));
    double w = frame.g[j] * (dx * txi + dy * tyi) / (dx * dx + dy * dy);
    bx[j] = frame.tx[j] * w - txi * hc;
    by[j] = frame.ty[j] * w - tyi * hc;
    if (!std::isfinite(bx[j] + by[j])) coincident_nodes(i);
  }
  double c_t = -dg[i] / (2.0 * frame.g[i]);
  double c_n = frame.g[i] * frame.kappa[i];
  bx[i] = c_t * txi + c_n * frame.nx[i];
  by[i] = c_t * tyi + c_n * frame.ny[i];
  return {h * pairwise_sum(bx), h * pairwise_sum(by)};
}

VectorField d2s_velocity(const CurveState& curve, const GeometricFrame& frame) {
  SecondDerivativeTerms t = d2s_velocity_terms(curve, frame);
  const std::size_t n = curve.size();
  VectorField out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = t.k1.x[i] + t.k2.x[i] + t.k3.x[i] + t.k4.x[i];
    out.y[i] = t.k1.y[i] + t.k2.y[i] + t.k3.y[i] + t.k4.y[i];
  }
  return out;
}

std::vector<double> tangential_coefficient(const CurveState& curve, const GeometricFrame& frame) {
  std::vector<double> a = ds_velocity_tangential(curve, frame);
  for (double& v : a) v = -v;
  return a;
}

BoundaryVelocity boundary_velocity(const CurveState& curve, const GeometricFrame& frame) {
  const std::size_t n = curve.size();
  BoundaryVelocity bv;
  VectorField v = velocity(curve, frame);
  VectorField ds = ds_velocity(curve, frame);
  VectorField d2 = d2s_velocity(curve, frame);
  bv.vx = std::move(v.x);
  bv.vy = std::move(v.y);
  bv.a = tangential_coefficient(curve, frame);
  bv.dsv_n.resize(n);
  bv.d2sv_n.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bv.dsv_n[i] = ds.x[i] * frame.nx[i] + ds.y[i] * frame.ny[i];
    bv.d2sv_n[i] = d2.x[i] * frame.nx[i] + d2.y[i] * frame.ny[i];
  }
  bv.dsvx = std::move(ds.x);
  bv.dsvy = std::move(ds.y);
  bv.d2svx = std::move(d2.x);
  bv.d2svy = std::move(d2.y);
  return bv;
}

bool rough_curvature(const GeometricFrame& frame, double fraction) {
  return spectral::tail_energy_fraction(frame.kappa) > fraction;
}

void write_velocity_csv(const std::string& path, const LagrangianGrid& grid,
                        const BoundaryVelocity& bv) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "xi,vx,vy,dsv_t,dsv_n,d2sv_n,a\n";
  char line[512];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  grid.label(j), bv.vx[j], bv.vy[j], -bv.a[j], bv.dsv_n[j], bv.d2sv_n[j],
                  bv.a[j]);
    out << line;
  }
}

}  // namespace patchlab

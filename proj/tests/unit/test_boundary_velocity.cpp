#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "patchlab/boundary_velocity.hpp"
#include "patchlab/experiment.hpp"
#include "patchlab/spectral.hpp"

using namespace patchlab;
using oracle::pi;

namespace {

CurveState rotated(const CurveState& c, double phi) {
  std::vector<double> x(c.size()), y(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    x[j] = std::cos(phi) * c.x[j] - std::sin(phi) * c.y[j];
    y[j] = std::sin(phi) * c.x[j] + std::cos(phi) * c.y[j];
  }
  return CurveState::from_points(x, y);
}

}  // namespace

TEST_CASE("Rankine circle velocity") {
  for (double R : {1.0, 2.5}) {
    CurveState c = circle(128, R);
    GeometricFrame f = build_frame(c);
    VectorField v = velocity(c, f);
    for (std::size_t j = 0; j < c.size(); ++j) {
      CHECK(v.x[j] == doctest::Approx(-pi * R * f.tx[j]).epsilon(1e-12).scale(1.0));
      CHECK(v.y[j] == doctest::Approx(-pi * R * f.ty[j]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("velocity is translation covariant") {
  CurveState e = ellipse(128, 2.0, 1.0);
  CurveState t = e;
  for (double& v : t.x) v += 3.0;
  for (double& v : t.y) v -= 7.0;
  VectorField a = velocity(e, build_frame(e)), b = velocity(t, build_frame(t));
  CHECK(oracle::max_abs_diff(a.x, b.x) < 1e-12);
  CHECK(oracle::max_abs_diff(a.y, b.y) < 1e-12);
}

TEST_CASE("normal velocity of the Kirchhoff ellipse is a rigid rotation") {
  CurveState e = ellipse(256, 2.0, 1.0);
  GeometricFrame f = build_frame(e);
  VectorField v = velocity(e, f);
  const double omega = oracle::kirchhoff_rate(2.0, 1.0);
  double err = 0.0, flux = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    double vn = v.x[j] * f.nx[j] + v.y[j] * f.ny[j];
    double rigid = omega * (-e.y[j] * f.nx[j] + e.x[j] * f.ny[j]);
    err = std::max(err, std::abs(vn - rigid));
    flux += vn * f.g[j];
  }
  CHECK(err < 1e-10);
  CHECK(std::abs(flux * 2.0 * pi / 256.0) < 1e-10);
}

TEST_CASE("single-node evaluation matches the full field") {
  CurveState e = ellipse(128, 2.0, 1.0);
  GeometricFrame f = build_frame(e);
  VectorField v = velocity(e, f), d = ds_velocity(e, f);
  for (std::size_t j : {0u, 17u, 64u, 127u}) {
    Vec2 p = velocity_at(e, f, j), q = ds_velocity_at(e, f, j);
    CHECK(std::abs(p.x - v.x[j]) < 1e-13);
    CHECK(std::abs(p.y - v.y[j]) < 1e-13);
    CHECK(std::abs(q.x - d.x[j]) < 1e-13);
    CHECK(std::abs(q.y - d.y[j]) < 1e-13);
  }
}

TEST_CASE("Rankine circle arc-length derivatives") {
  CurveState c = circle(128, 1.0);
  GeometricFrame f = build_frame(c);
  BoundaryVelocity bv = boundary_velocity(c, f);
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(std::abs(bv.dsvx[j] - pi * f.nx[j]) < 1e-11);
    CHECK(std::abs(bv.dsvy[j] - pi * f.ny[j]) < 1e-11);
    CHECK(std::abs(bv.a[j]) < 1e-11);
    CHECK(bv.dsv_n[j] == doctest::Approx(pi).epsilon(1e-11));
    CHECK(std::abs(bv.d2svx[j] - pi * f.tx[j]) < 1e-10);
    CHECK(std::abs(bv.d2svy[j] - pi * f.ty[j]) < 1e-10);
    CHECK(std::abs(bv.d2sv_n[j]) < 1e-10);
  }
  CurveState c2 = circle(128, 2.5);
  BoundaryVelocity b2 = boundary_velocity(c2, build_frame(c2));
  for (double v : b2.d2sv_n) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("two formulas for the tangential derivative agree") {
  CurveState e = ellipse(512, 2.0, 1.0);
  GeometricFrame f = build_frame(e);
  VectorField d = ds_velocity(e, f);
  std::vector<double> area_form = ds_velocity_tangential(e, f);
  double err = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j)
    err = std::max(err, std::abs(d.x[j] * f.tx[j] + d.y[j] * f.ty[j] - area_form[j]));
  CHECK(err < 1e-8);
  std::vector<double> a = tangential_coefficient(e, f);
  for (std::size_t j = 0; j < e.size(); ++j) CHECK(a[j] == -area_form[j]);
}

TEST_CASE("rotation covariance of the derivatives") {
  const double phi = 0.7;
  CurveState e = ellipse(256, 2.0, 1.0);
  CurveState r = rotated(e, phi);
  GeometricFrame fe = build_frame(e), fr = build_frame(r);
  BoundaryVelocity be = boundary_velocity(e, fe), br = boundary_velocity(r, fr);
  double rot = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    double x = std::cos(phi) * be.dsvx[j] - std::sin(phi) * be.dsvy[j];
    double y = std::sin(phi) * be.dsvx[j] + std::cos(phi) * be.dsvy[j];
    rot = std::max(rot, std::hypot(x - br.dsvx[j], y - br.dsvy[j]));
  }
  CHECK(rot < 1e-12);
  CHECK(oracle::max_abs_diff(be.a, br.a) < 1e-12);
  CHECK(oracle::max_abs_diff(be.dsv_n, br.dsv_n) < 1e-12);
  CHECK(oracle::max_abs_diff(be.d2sv_n, br.d2sv_n) < 1e-10);
}

TEST_CASE("second derivative agrees with differentiating the first") {
  for (std::size_t n : {256u, 512u, 1024u}) {
    CurveState e = ellipse(n, 2.0, 1.0);
    GeometricFrame f = build_frame(e);
    VectorField ds = ds_velocity(e, f), d2 = d2s_velocity(e, f);
    std::vector<double> dx = spectral::derivative(ds.x), dy = spectral::derivative(ds.y);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double rx = dx[j] / f.g[j] - d2.x[j], ry = dy[j] / f.g[j] - d2.y[j];
      num += rx * rx + ry * ry;
      den += d2.x[j] * d2.x[j] + d2.y[j] * d2.y[j];
    }
    CHECK(std::sqrt(num / den) < 1e-10);
  }
}

TEST_CASE("normal kernel terms assemble the normal second derivative") {
  CurveState e = ellipse(256, 2.0, 1.0);
  GeometricFrame f = build_frame(e);
  NormalKernelTerms k = normal_kernel_terms(e, f);
  VectorField d2 = d2s_velocity(e, f);
  SecondDerivativeTerms t = d2s_velocity_terms(e, f);
  std::vector<double> a = tangential_coefficient(e, f);
  for (std::size_t j = 0; j < e.size(); ++j) {
    double d2n = d2.x[j] * f.nx[j] + d2.y[j] * f.ny[j];
    double assembled = -k.pv[j] + k.k2_n[j] + f.kappa[j] * k.dsv_t[j] + k.k4_n[j];
    CHECK(std::abs(assembled - d2n) < 1e-10);
    CHECK(std::abs(k.pv[j] + t.k1.x[j] * f.nx[j] + t.k1.y[j] * f.ny[j]) < 1e-10);
    CHECK(k.dsv_t[j] == doctest::Approx(-a[j]).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("velocity table") {
  CurveState c = circle(32, 1.0);
  BoundaryVelocity bv = boundary_velocity(c, build_frame(c));
  std::string path = (std::filesystem::temp_directory_path() / "patchlab_velocity_test.csv").string();
  write_velocity_csv(path, c.grid, bv);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "xi,vx,vy,dsv_t,dsv_n,d2sv_n,a");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 32);
  std::filesystem::remove(path);
}

TEST_CASE("rough curvature flag") {
  CHECK_FALSE(rough_curvature(build_frame(ellipse(128, 2.0, 1.0))));
}

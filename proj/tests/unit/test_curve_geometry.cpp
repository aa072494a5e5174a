#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracle.hpp"
#include "patchlab/curve_geometry.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/experiment.hpp"
#include "patchlab/patch_evolution.hpp"

using namespace patchlab;
using oracle::pi;

TEST_CASE("unit circle frame") {
  GeometricFrame f = build_frame(circle(128, 1.0));
  for (std::size_t j = 0; j < f.size(); ++j) {
    CHECK(f.g[j] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(f.kappa[j] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(f.nx[0] == doctest::Approx(1.0));
  CHECK(std::abs(f.ny[0]) < 1e-14);
}

TEST_CASE("circle of radius R") {
  const double R = 3.5;
  GeometricFrame f = build_frame(circle(64, R));
  for (std::size_t j = 0; j < f.size(); ++j) {
    CHECK(f.g[j] == doctest::Approx(R).epsilon(1e-13));
    CHECK(f.kappa[j] == doctest::Approx(1.0 / R).epsilon(1e-12));
  }
}

TEST_CASE("ellipse curvature matches closed form") {
  const std::size_t n = 256;
  GeometricFrame f = build_frame(ellipse(n, 2.0, 1.0));
  CHECK(f.kappa[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.kappa[n / 4] == doctest::Approx(0.25).epsilon(1e-10));
  LagrangianGrid grid(n);
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    err = std::max(err, std::abs(f.kappa[j] - oracle::ellipse_curvature(2.0, 1.0, grid.label(j))));
  CHECK(err < 1e-9);
}

TEST_CASE("clockwise input is reversed") {
  CurveState c = circle(32, 1.0);
  std::vector<double> x(c.x), y(c.y);
  for (double& v : y) v = -v;
  CurveState r = CurveState::from_points(x, y);
  CHECK(r.orientation_flipped);
  CHECK(signed_area(r.x, r.y) > 0.0);
  CHECK(r.x[0] == x[0]);
}

TEST_CASE("arc-chord ratio") {
  CHECK(arc_chord_ratio(circle(256, 1.0)) == doctest::Approx(pi / 2.0).epsilon(1e-12));
  CHECK(arc_chord_ratio(circle(256, 2.0)) == doctest::Approx(pi / 4.0).epsilon(1e-12));
  CurveState e = ellipse(128, 2.0, 1.0);
  CurveState t = e;
  for (double& v : t.x) v += 5.25;
  for (double& v : t.y) v -= 1.5;
  CHECK(arc_chord_ratio(t) == doctest::Approx(arc_chord_ratio(e)).epsilon(1e-13));
}

TEST_CASE("coincident nodes are rejected") {
  CurveState c = circle(32, 1.0);
  c.x[5] = c.x[4];
  c.y[5] = c.y[4];
  CHECK_THROWS_AS(arc_chord_ratio(c), DegenerateCurve);
}

TEST_CASE("figure eight is not simple") {
  std::vector<double> x(64), y(64);
  for (std::size_t j = 0; j < 64; ++j) {
    double t = 2.0 * pi * j / 64.0;
    x[j] = std::sin(t);
    y[j] = std::sin(t) * std::cos(t) + 1e-3 * std::cos(t);
  }
  CHECK_THROWS_AS(build_frame(CurveState::from_points(x, y)), NumericalError);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(LagrangianGrid(15), InputError);
  CHECK_THROWS_AS(LagrangianGrid(8), InputError);
  CHECK(LagrangianGrid(16).spacing() == doctest::Approx(pi / 8.0));
}

TEST_CASE("reconstruct circle from constant data") {
  const std::size_t n = 64;
  IntrinsicState s{LagrangianGrid(n), std::vector<double>(n, 1.0), std::vector<double>(n, 1.0),
                   pi / 2.0, {1.0, 0.0}, 0.0};
  CurveState c = reconstruct_curve(s);
  CurveState ref = circle(n, 1.0);
  CHECK(oracle::max_abs_diff(c.x, ref.x) < 1e-13);
  CHECK(oracle::max_abs_diff(c.y, ref.y) < 1e-13);
}

TEST_CASE("ellipse round trip through intrinsic data") {
  CurveState e = ellipse(256, 2.0, 1.0);
  GeometricFrame f = build_frame(e);
  IntrinsicState s = intrinsic_from_curve(e, f);
  CurveState c = reconstruct_curve(s);
  CHECK(oracle::max_abs_diff(c.x, e.x) < 1e-10);
  CHECK(oracle::max_abs_diff(c.y, e.y) < 1e-10);
  ClosureResidual r = closure_residual(s);
  CHECK(std::hypot(r.position.x, r.position.y) < 1e-10);
  CHECK(std::abs(r.turning) < 1e-10);
}

TEST_CASE("closure residuals of simple data") {
  const std::size_t n = 64;
  IntrinsicState s{LagrangianGrid(n), std::vector<double>(n, 1.0), std::vector<double>(n, 1.0),
                   0.0, {}, 0.0};
  ClosureResidual r = closure_residual(s);
  CHECK(std::abs(r.position.x) < 1e-14);
  CHECK(std::abs(r.position.y) < 1e-14);
  CHECK(std::abs(r.turning) < 1e-14);
  s.g.assign(n, 1.1);
  CHECK(closure_residual(s).turning == doctest::Approx(0.2 * pi).epsilon(1e-13));
}

TEST_CASE("open data fails reconstruction") {
  const std::size_t n = 64;
  IntrinsicState s{LagrangianGrid(n), std::vector<double>(n, 1.0),
                   std::vector<double>(n, 1.0 + 0.1 / (2.0 * pi)), 0.0, {}, 0.0};
  CHECK(closure_residual(s).turning == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(reconstruct_curve(s), ClosureViolated);
}

TEST_CASE("closure projection") {
  const std::size_t n = 128;
  LagrangianGrid grid(n);
  std::vector<double> g(n, 1.0), w(n, 1.0);
  std::vector<double> k = oracle::sample(n, [](double xi) { return 1.05 + 0.1 * std::cos(xi); });
  ClosureFit fit = project_closure(g, k, w, pi / 2.0);
  CHECK(fit.residual < 1e-13);
  CHECK(fit.coefficients[0] == doctest::Approx(-0.05).epsilon(1e-10));
  IntrinsicState s{grid, g, fit.kappa, pi / 2.0, {1.0, 0.0}, 0.0};
  CHECK_NOTHROW(reconstruct_curve(s, {1e-12}));

  std::vector<double> one(n, 1.0);
  CHECK(project_closure(g, one, w, 0.0).iterations == 1);
}

TEST_CASE("arc-length resampling") {
  CurveState c = circle(128, 1.0);
  CurveState r = resample_arclength(c);
  CHECK(oracle::max_abs_diff(c.x, r.x) < 1e-12);
  CHECK(oracle::max_abs_diff(c.y, r.y) < 1e-12);

  CurveState e = ellipse(512, 2.0, 1.0);
  CurveState re = resample_arclength(e);
  GeometricFrame f = build_frame(re);
  double lo = *std::min_element(f.g.begin(), f.g.end());
  double hi = *std::max_element(f.g.begin(), f.g.end());
  CHECK((hi - lo) / lo < 1e-8);
  double a0 = signed_area(e.x, e.y), a1 = signed_area(re.x, re.y);
  CHECK(std::abs(a1 - a0) / a0 < 1e-10);
  CHECK(re.x[0] == e.x[0]);
}

TEST_CASE("invariants") {
  InvariantRecord c = invariants(circle(128, 1.0));
  CHECK(c.area == doctest::Approx(pi).epsilon(1e-13));
  CHECK(c.length == doctest::Approx(2.0 * pi).epsilon(1e-13));
  CHECK(c.turning == doctest::Approx(2.0 * pi).epsilon(1e-13));

  InvariantRecord e = invariants(ellipse(256, 2.0, 1.0));
  CHECK(e.area == doctest::Approx(2.0 * pi).epsilon(1e-13));
  double L = oracle::ellipse_perimeter(2.0, 1.0);
  CHECK(L == doctest::Approx(oracle::ellipse_perimeter_elliptic(2.0, 1.0)).epsilon(1e-11));
  CHECK(e.length == doctest::Approx(L).epsilon(1e-11));

  CurveState t = ellipse(256, 2.0, 1.0);
  for (double& v : t.x) v += 1.0;
  for (double& v : t.y) v -= 2.0;
  InvariantRecord s = invariants(t);
  CHECK(s.area == doctest::Approx(e.area).epsilon(1e-13));
  CHECK(s.length == doctest::Approx(e.length).epsilon(1e-13));
  CHECK(s.centroid.x == doctest::Approx(e.centroid.x + 1.0));
  CHECK(s.centroid.y == doctest::Approx(e.centroid.y - 2.0));
}

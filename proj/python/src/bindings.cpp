#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "patchlab/boundary_velocity.hpp"
#include "patchlab/errors.hpp"
#include "patchlab/experiment.hpp"
#include "patchlab/hilbert_dispersion.hpp"
#include "patchlab/illposedness_lab.hpp"
#include "patchlab/io.hpp"
#include "patchlab/norms.hpp"
#include "patchlab/parallel.hpp"
#include "patchlab/patch_evolution.hpp"

namespace py = pybind11;
using namespace patchlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

py::dict velocity_dict(const BoundaryVelocity& bv) {
  py::dict d;
  d["vx"] = to_array(bv.vx);
  d["vy"] = to_array(bv.vy);
  d["dsvx"] = to_array(bv.dsvx);
  d["dsvy"] = to_array(bv.dsvy);
  d["d2svx"] = to_array(bv.d2svx);
  d["d2svy"] = to_array(bv.d2svy);
  d["a"] = to_array(bv.a);
  d["dsv_n"] = to_array(bv.dsv_n);
  d["d2sv_n"] = to_array(bv.d2sv_n);
  return d;
}

py::dict invariant_dict(const InvariantRecord& r) {
  py::dict d;
  d["time"] = r.time;
  d["area"] = r.area;
  d["length"] = r.length;
  d["turning"] = r.turning;
  d["centroid"] = py::make_tuple(r.centroid.x, r.centroid.y);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vortex patch contour dynamics and curvature diagnostics";
  m.attr("__version__") = PATCHLAB_VERSION;

  // most recently registered translators are tried first: bases go first
  auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto& input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  auto& numerical_error = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  (void)error;
  py::register_exception<ConfigError>(m, "ConfigError", input_error.ptr());
  py::register_exception<MalformedFile>(m, "MalformedFile", input_error.ptr());
  py::register_exception<FeatureUnresolved>(m, "FeatureUnresolved", input_error.ptr());
  py::register_exception<NonSimpleCurve>(m, "NonSimpleCurve", numerical_error.ptr());
  py::register_exception<ClosureViolated>(m, "ClosureViolated", numerical_error.ptr());
  py::register_exception<GridTooCoarse>(m, "GridTooCoarse", numerical_error.ptr());

  py::class_<CurveState>(m, "CurveState")
      .def(py::init([](const Array& x, const Array& y, double time) {
             return CurveState::from_points(to_vector(x), to_vector(y), time);
           }),
           py::arg("x"), py::arg("y"), py::arg("time") = 0.0)
      .def_property_readonly("x", [](const CurveState& c) { return to_array(c.x); })
      .def_property_readonly("y", [](const CurveState& c) { return to_array(c.y); })
      .def_readwrite("time", &CurveState::time)
      .def_readonly("orientation_flipped", &CurveState::orientation_flipped)
      .def("__len__", &CurveState::size);

  py::class_<IntrinsicState>(m, "IntrinsicState")
      .def(py::init([](const Array& g, const Array& kappa, double theta0, std::pair<double, double> gamma0,
                       double time) {
             std::vector<double> gv = to_vector(g);
             IntrinsicState s{LagrangianGrid(gv.size()), gv, to_vector(kappa), theta0,
                              {gamma0.first, gamma0.second}, time};
             return s;
           }),
           py::arg("g"), py::arg("kappa"), py::arg("theta0"), py::arg("gamma0"), py::arg("time") = 0.0)
      .def_property_readonly("g", [](const IntrinsicState& s) { return to_array(s.g); })
      .def_property_readonly("kappa", [](const IntrinsicState& s) { return to_array(s.kappa); })
      .def_readwrite("theta0", &IntrinsicState::theta0)
      .def_property_readonly("gamma0", [](const IntrinsicState& s) { return py::make_tuple(s.gamma0.x, s.gamma0.y); })
      .def_readwrite("time", &IntrinsicState::time);

  py::class_<GeometricFrame>(m, "GeometricFrame")
      .def_property_readonly("g", [](const GeometricFrame& f) { return to_array(f.g); })
      .def_property_readonly("theta", [](const GeometricFrame& f) { return to_array(f.theta); })
      .def_property_readonly("tx", [](const GeometricFrame& f) { return to_array(f.tx); })
      .def_property_readonly("ty", [](const GeometricFrame& f) { return to_array(f.ty); })
      .def_property_readonly("nx", [](const GeometricFrame& f) { return to_array(f.nx); })
      .def_property_readonly("ny", [](const GeometricFrame& f) { return to_array(f.ny); })
      .def_property_readonly("kappa", [](const GeometricFrame& f) { return to_array(f.kappa); });

  m.def("circle", &circle, py::arg("n"), py::arg("radius") = 1.0);
  m.def("ellipse", &ellipse, py::arg("n"), py::arg("a"), py::arg("b"));
  m.def("build_frame", [](const CurveState& c) { return build_frame(c); });
  m.def("arc_chord_ratio", &arc_chord_ratio);
  m.def("reconstruct_curve", [](const IntrinsicState& s, double tol) { return reconstruct_curve(s, {tol}); },
        py::arg("state"), py::arg("closure_tolerance") = 1e-8);
  m.def("intrinsic_from_curve", [](const CurveState& c) { return intrinsic_from_curve(c, build_frame(c)); });
  m.def("resample_arclength", [](const CurveState& c) { return resample_arclength(c); });
  m.def("invariants", [](const CurveState& c) { return invariant_dict(invariants(c)); });
  m.def("orientation_angle", &orientation_angle);

  m.def("boundary_velocity", [](const CurveState& c) { return velocity_dict(boundary_velocity(c, build_frame(c))); });

  m.def("hilbert", [](const Array& f) { return to_array(hilbert(PeriodicScalarField(to_vector(f))).values()); });
  m.def("pv_cot_quadrature",
        [](const Array& f) { return to_array(pv_cot_quadrature(PeriodicScalarField(to_vector(f))).values()); });
  m.def("dispersion_group", [](const Array& f, double t) {
    return to_array(dispersion_group(PeriodicScalarField(to_vector(f)), t).values());
  });
  m.def("lp_norms", [](const Array& f, const Array& g, const std::vector<double>& p) {
    return to_array(lp_norms(to_vector(f), to_vector(g), p));
  });
  m.def("holder_seminorm", [](const Array& f, double beta) { return holder_seminorm(to_vector(f), beta); });
  m.def("inflation_slope", [](const std::vector<double>& p, const std::vector<double>& norms) {
    return inflation_slope(p, norms);
  });

  m.def("build_illposed_data",
        [](double epsilon, std::size_t n_nodes, double blend_width, double base_radius) {
          IllposedData d = build_illposed_data({epsilon, n_nodes, blend_width, base_radius});
          return py::make_tuple(d.curve, d.intrinsic);
        },
        py::arg("epsilon") = 0.1, py::arg("n_nodes") = 4096, py::arg("blend_width") = 0.3,
        py::arg("base_radius") = 1.0);

  m.def("simulate",
        [](const CurveState& c, double dt, double t_end, const std::string& formulation, int snapshot_stride) {
          SimulationConfig cfg;
          cfg.n_nodes = c.size();
          cfg.dt = dt;
          cfg.t_end = t_end;
          cfg.formulation = formulation_from_string(formulation);
          cfg.snapshot_stride = snapshot_stride;
          Trajectory tr;
          {
            py::gil_scoped_release release;
            tr = run(cfg, c);
          }
          py::list snaps;
          for (const auto& s : tr.snapshots) {
            py::dict d;
            d["time"] = s.time;
            d["curve"] = s.curve ? py::cast(*s.curve) : py::none();
            d["intrinsic"] = s.intrinsic ? py::cast(*s.intrinsic) : py::none();
            snaps.append(d);
          }
          return snaps;
        },
        py::arg("curve"), py::arg("dt"), py::arg("t_end"), py::arg("formulation") = "cde",
        py::arg("snapshot_stride") = 1);

  m.def("save_curve", &save_curve);
  m.def("load_curve", &load_curve);
  m.def("describe_snapshot", &describe_snapshot);
  m.def("validate_config", [](const std::string& text) { return config_to_json(parse_config(text)); });
  m.def("run_experiment", [](const std::string& text) {
    ExperimentConfig cfg = parse_config(text);
    ExperimentSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(cfg);
    }
    py::dict d;
    d["files"] = s.files;
    d["lines"] = s.lines;
    return d;
  });
  m.def("set_worker_count", &set_worker_count);
  m.def("worker_count", &worker_count);
}

// Python bindings for the main operations: expression fields, metrics,
// curves, problem loading, developments, reconstruction, and audits.

#include "devmap/config.hpp"
#include "devmap/errors.hpp"
#include "devmap/fundeq.hpp"
#include "devmap/reconstruct.hpp"
#include "devmap/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace devmap;

namespace {

CurvePolicy policy_from_name(const std::string& name)
{
    if (name == "polyline") return CurvePolicy::CoordinatePolyline;
    if (name == "radial") return CurvePolicy::Radial;
    if (name == "normal") return CurvePolicy::NormalGeodesic;
    throw ValidationError("unknown curve policy '" + name
                          + "': expected polyline, radial, or normal");
}

ReconstructOptions make_options(double step, int jobs)
{
    ReconstructOptions opt;
    opt.step = step;
    opt.jobs = jobs;
    return opt;
}

} // namespace

PYBIND11_MODULE(devmap, m)
{
    m.doc() = "curve developments and isometric immersion reconstruction from "
              "first and second fundamental form data";

    py::register_exception<ParseError>(m, "FieldParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<EvalError>(m, "EvalError", PyExc_ArithmeticError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<ScalarField>(m, "ScalarField")
        .def("__call__",
             [](const ScalarField& f, const std::vector<double>& x) { return f.eval(x); },
             py::arg("x"))
        .def("derivative", &ScalarField::derivative, py::arg("index"),
             "symbolic partial derivative with respect to x_{index+1}")
        .def("is_constant", &ScalarField::is_constant)
        .def("__str__", &ScalarField::to_string)
        .def("__repr__",
             [](const ScalarField& f) { return "ScalarField('" + f.to_string() + "')"; });

    m.def("parse_field", &parse_scalar_field, py::arg("source"), py::arg("dim"),
          "parse an expression in x1..x<dim> into a ScalarField");

    py::class_<CurvatureValue>(m, "CurvatureValue")
        .def("at",
             [](const CurvatureValue& r, int i, int j, int k, int l) { return r.at(i, j, k, l); },
             py::arg("i"), py::arg("j"), py::arg("k"), py::arg("l"))
        .def("sup_norm", &CurvatureValue::sup_norm);

    py::class_<MetricField>(m, "MetricField")
        .def_static("euclidean", &MetricField::euclidean, py::arg("dim"))
        .def_property_readonly("dim", &MetricField::dim)
        .def("eval", &MetricField::eval, py::arg("x"))
        .def("inverse", &MetricField::inverse, py::arg("x"))
        .def("inner", &MetricField::inner, py::arg("x"), py::arg("u"), py::arg("v"))
        .def("christoffel",
             [](const MetricField& g, const Eigen::VectorXd& x) { return christoffel(g, x); },
             py::arg("x"), "list of matrices, entry c is Gamma^c_ab")
        .def("curvature",
             [](const MetricField& g, const Eigen::VectorXd& x) {
                 return riemann_curvature(g, x);
             },
             py::arg("x"), "fully lowered curvature tensor R_abcd");

    py::class_<Curve>(m, "Curve")
        .def_static("from_expressions",
                    [](const std::vector<std::string>& components, double t0, double t1) {
                        std::vector<ScalarField> fields;
                        fields.reserve(components.size());
                        for (const auto& c : components)
                            fields.push_back(parse_scalar_field(c, 1));
                        return Curve::from_expressions(std::move(fields), t0, t1);
                    },
                    py::arg("components"), py::arg("t0"), py::arg("t1"),
                    "curve from expressions in the parameter x1")
        .def_static("line", &Curve::line, py::arg("a"), py::arg("b"),
                    "straight chart segment over t in [0, 1]")
        .def_static("bezier3",
                    [](const std::vector<Eigen::VectorXd>& control) {
                        if (control.size() != 4)
                            throw ValidationError("bezier3 needs exactly 4 control points");
                        return Curve::bezier3({control[0], control[1], control[2], control[3]});
                    },
                    py::arg("control"))
        .def_static("from_samples", &Curve::from_samples, py::arg("times"), py::arg("points"))
        .def_property_readonly("dim", &Curve::dim)
        .def_property_readonly("t0", &Curve::t0)
        .def_property_readonly("t1", &Curve::t1)
        .def("position", &Curve::position, py::arg("t"))
        .def("velocity", &Curve::velocity, py::arg("t"));

    m.def("read_curve_file",
          [](const std::string& path) {
              std::ifstream in(path);
              if (!in) throw ValidationError("cannot open curve file: " + path);
              return read_curve_csv(in);
          },
          py::arg("path"), "load a sampled curve from CSV (t, x1, ...)");

    py::class_<Problem>(m, "Problem")
        .def_property_readonly("n", &Problem::n)
        .def_property_readonly("s", &Problem::s)
        .def_property_readonly("ambient_dim", &Problem::ambient_dim)
        .def_property_readonly("point_seeded", &Problem::point_seeded)
        .def_property_readonly("base", &Problem::base)
        .def_property_readonly("ambient", &Problem::ambient)
        .def("submanifold_speed", &Problem::submanifold_speed, py::arg("u"));

    m.def("load_problem",
          [](const std::string& text) { return build_problem(ProblemConfig::parse(text)); },
          py::arg("text"), "build a Problem from config text");
    m.def("load_problem_file",
          [](const std::string& path) {
              std::ifstream in(path);
              if (!in) throw ValidationError("cannot open config file: " + path);
              return build_problem(ProblemConfig::parse(in));
          },
          py::arg("path"));

    py::class_<TauMap>(m, "TauMap")
        .def_readonly("x", &TauMap::x)
        .def_readonly("target", &TauMap::target)
        .def_readonly("map", &TauMap::map)
        .def_readonly("gram_defect", &TauMap::gram_defect)
        .def("chart_matrix", &TauMap::chart_matrix)
        .def("apply", &TauMap::apply, py::arg("w"))
        .def("reframed", &TauMap::reframed, py::arg("qt"), py::arg("qv"));

    py::class_<ResidualReport>(m, "ResidualReport")
        .def_readonly("point", &ResidualReport::point)
        .def_readonly("gauss", &ResidualReport::gauss)
        .def_readonly("codazzi", &ResidualReport::codazzi)
        .def_readonly("ricci", &ResidualReport::ricci)
        .def("max_residual", &ResidualReport::max_residual);

    py::class_<CurveDevelopment>(m, "CurveDevelopment")
        .def_property_readonly(
            "gram_drift",
            [](const CurveDevelopment& d) { return d.development.gram_drift; })
        .def("point_at",
             [](const CurveDevelopment& d, double t) { return d.development.point_at(t); },
             py::arg("t"))
        .def("frame_at",
             [](const CurveDevelopment& d, double t) { return d.development.frame_at(t); },
             py::arg("t"))
        .def("point", [](const CurveDevelopment& d) { return d.development.point(); })
        .def("frame", [](const CurveDevelopment& d) { return d.development.frame(); });

    m.def("develop_curve",
          [](const Problem& prob, const Curve& gamma, double step) {
              return develop_curve(prob, gamma, start_frames_for(prob, gamma), step);
          },
          py::arg("problem"), py::arg("curve"), py::arg("step") = 1e-3,
          py::call_guard<py::gil_scoped_release>(),
          "develop a base curve from the problem seed into the ambient chart");
    m.def("tau_at", &tau_at, py::arg("problem"), py::arg("development"), py::arg("t"),
          "frame map at parameter t of a developed curve");
    m.def("compatibility_residuals", &compatibility_residuals, py::arg("problem"),
          py::arg("tau"), "Gauss, Codazzi, and Ricci defects at one curve point");

    py::class_<PointReconstruction>(m, "PointReconstruction")
        .def_readonly("point", &PointReconstruction::point)
        .def_readonly("tau", &PointReconstruction::tau)
        .def_readonly("residuals", &PointReconstruction::residuals);

    m.def("reconstruct_point",
          [](const Problem& prob, const Curve& gamma, double step) {
              return reconstruct_point(prob, gamma, make_options(step, 1));
          },
          py::arg("problem"), py::arg("curve"), py::arg("step") = 1e-3,
          py::call_guard<py::gil_scoped_release>());

    py::class_<CurveCheck>(m, "CurveCheck")
        .def_readonly("endpoint", &CurveCheck::endpoint)
        .def_readonly("gram_defect", &CurveCheck::gram_defect)
        .def_readonly("samples", &CurveCheck::samples)
        .def_readonly("max_gauss", &CurveCheck::max_gauss)
        .def_readonly("max_codazzi", &CurveCheck::max_codazzi)
        .def_readonly("max_ricci", &CurveCheck::max_ricci)
        .def("max_residual", &CurveCheck::max_residual);

    m.def("check_along_curve",
          [](const Problem& prob, const Curve& gamma, int samples, double step) {
              return check_along_curve(prob, gamma, samples, make_options(step, 1));
          },
          py::arg("problem"), py::arg("curve"), py::arg("samples") = 9,
          py::arg("step") = 1e-3, py::call_guard<py::gil_scoped_release>(),
          "develop the curve and evaluate compatibility residuals along it");

    py::class_<ImmersionRecord>(m, "ImmersionRecord")
        .def_readonly("valid", &ImmersionRecord::valid)
        .def_readonly("node", &ImmersionRecord::node)
        .def_readonly("x", &ImmersionRecord::x)
        .def_readonly("point", &ImmersionRecord::point)
        .def_readonly("residuals", &ImmersionRecord::residuals)
        .def_readonly("error", &ImmersionRecord::error);

    py::class_<ImmersionSample>(m, "ImmersionSample")
        .def_readonly("base_dim", &ImmersionSample::base_dim)
        .def_readonly("ambient_dim", &ImmersionSample::ambient_dim)
        .def_readonly("counts", &ImmersionSample::counts)
        .def_readonly("records", &ImmersionSample::records)
        .def_readonly("faces", &ImmersionSample::faces)
        .def("valid_count", &ImmersionSample::valid_count)
        .def("max_gram_defect", &ImmersionSample::max_gram_defect)
        .def("max_residual", &ImmersionSample::max_residual);

    m.def("reconstruct_grid",
          [](const Problem& prob, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
             const std::vector<int>& counts, const std::string& policy, double step,
             int jobs) {
              GridSpec grid;
              grid.lo = lo;
              grid.hi = hi;
              grid.counts = counts;
              return reconstruct_grid(prob, grid, policy_from_name(policy),
                                      make_options(step, jobs));
          },
          py::arg("problem"), py::arg("lo"), py::arg("hi"), py::arg("counts"),
          py::arg("policy") = "polyline", py::arg("step") = 1e-3, py::arg("jobs") = 1,
          py::call_guard<py::gil_scoped_release>(),
          "reconstruct the immersion over a chart grid, one curve per node");

    py::class_<AuditReport>(m, "AuditReport")
        .def_readonly("target", &AuditReport::target)
        .def_readonly("k", &AuditReport::k)
        .def_readonly("spread", &AuditReport::spread)
        .def_readonly("endpoints", &AuditReport::endpoints);

    m.def("path_independence_audit",
          [](const Problem& prob, const Eigen::VectorXd& target, int k, std::uint64_t seed,
             double step) {
              return path_independence_audit(prob, target, k, seed, make_options(step, 1));
          },
          py::arg("problem"), py::arg("target"), py::arg("k") = 10, py::arg("seed") = 0,
          py::arg("step") = 1e-3, py::call_guard<py::gil_scoped_release>(),
          "endpoint spread over k random curves to the same target");

    py::class_<RigidAlignment>(m, "RigidAlignment")
        .def_readonly("rotation", &RigidAlignment::rotation)
        .def_readonly("translation", &RigidAlignment::translation)
        .def_readonly("rms", &RigidAlignment::rms)
        .def_readonly("degenerate", &RigidAlignment::degenerate)
        .def("apply", &RigidAlignment::apply, py::arg("a"));

    m.def("align_rigid", &align_rigid, py::arg("a"), py::arg("b"),
          "proper-rotation Procrustes fit of b ~ R a + t");

    m.def("parallel_transport",
          [](const MetricField& metric, const Curve& gamma, const Eigen::VectorXd& v0,
             double from_t, double to_t, double step) {
              return parallel_transport(metric, gamma, v0, from_t, to_t, step);
          },
          py::arg("metric"), py::arg("curve"), py::arg("v0"), py::arg("from_t"),
          py::arg("to_t"), py::arg("step") = 1e-3,
          "chart components of v0 moved along the curve between parameters");

    m.def("shoot_geodesic", &shoot_geodesic, py::arg("metric"), py::arg("x"), py::arg("v"),
          py::arg("step") = 1e-3, "geodesic from x with velocity v over t in [0, 1]");
}

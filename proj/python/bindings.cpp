#include <pybind11/functional.h>
#include <pybind11/iostream.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "soliton/cli.hpp"
#include "soliton/construct.hpp"
#include "soliton/elliptic.hpp"
#include "soliton/field_io.hpp"
#include "soliton/flow.hpp"
#include "soliton/geometry.hpp"
#include "soliton/radial.hpp"
#include "soliton/smooth_min.hpp"

namespace py = pybind11;
using namespace soliton;

namespace {

using PyHeight = std::function<double(double, double)>;

HeightFn wrap(const PyHeight& fn) {
  return [fn](const Vec2& x) { return fn(x.x(), x.y()); };
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_points(const std::vector<Vec2>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    m(k, 0) = pts[k].x();
    m(k, 1) = pts[k].y();
  }
  return out;
}

std::vector<Vec2> positions(const ScalarField& f) {
  std::vector<Vec2> pts;
  pts.reserve(f.size());
  for (int k = 0; k < f.grid->unknown_count(); ++k) pts.push_back(f.grid->position(k));
  return pts;
}

std::shared_ptr<const Grid2> square_grid(double half, double h) {
  const int n = static_cast<int>(std::lround(2.0 * half / h)) + 1;
  return std::make_shared<const Grid2>(Grid2::rectangle(Vec2(-half, -half), h, n, n));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical lab for entire translating solitons in Minkowski space";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<RangeError>(m, "RangeError", error.ptr());
  py::register_exception<NotSpacelike>(m, "NotSpacelike", error.ptr());
  py::register_exception<IntegrationFailure>(m, "IntegrationFailure", error.ptr());
  py::register_exception<RefinementError>(m, "RefinementError", error.ptr());
  py::register_exception<BadCurvatureBound>(m, "BadCurvatureBound", error.ptr());
  py::register_exception<ConstructionFailure>(m, "ConstructionFailure", error.ptr());
  py::register_exception<NotConvex>(m, "NotConvex", error.ptr());
  py::register_exception<FlowBlowup>(m, "FlowBlowup", error.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", error.ptr());

  py::class_<SolitonParams>(m, "Params")
      .def(py::init(&SolitonParams::make), py::arg("C"), py::arg("n") = 2)
      .def_readonly("C", &SolitonParams::c)
      .def_readonly("n", &SolitonParams::dim)
      .def_readonly("ctilde", &SolitonParams::ctilde)
      .def("reduced_constant", &SolitonParams::reduced_constant, py::arg("a_norm"))
      .def("__repr__", [](const SolitonParams& p) {
        return "Params(C=" + std::to_string(p.c) + ", n=" + std::to_string(p.dim) + ")";
      });

  py::class_<ScalarField>(m, "Field")
      .def_property_readonly("h", [](const ScalarField& f) { return f.grid->spacing(); })
      .def_property_readonly("values", [](const ScalarField& f) { return to_array(f.values); })
      .def_property_readonly("positions", [](const ScalarField& f) { return to_points(positions(f)); })
      .def("__len__", &ScalarField::size)
      .def("residual", [](const ScalarField& f, const SolitonParams& p) { return to_array(residual(f, p).values); },
           py::arg("params"))
      .def("gradient", [](const ScalarField& f) { return to_points(gradient(f)); })
      .def("mean_curvature", [](const ScalarField& f, const SolitonParams& p) {
        return to_array(bundle(f, p).mean_h);
      }, py::arg("params"))
      .def("min_eigenvalue", [](const ScalarField& f, const SolitonParams& p) {
        return to_array(bundle(f, p).lam_min);
      }, py::arg("params"))
      .def("interpolate", [](const ScalarField& f, double x, double y) { return FieldInterpolator(f)(Vec2(x, y)); },
           py::arg("x"), py::arg("y"))
      .def("write", [](const ScalarField& f, const std::string& path, const SolitonParams& p) { write_field(path, f, p); },
           py::arg("path"), py::arg("params"))
      .def_static("read", [](const std::string& path) { return read_field(path).field; }, py::arg("path"));

  m.def("sample_square", [](const PyHeight& fn, double half_width, double h) {
    return ScalarField::sample(square_grid(half_width, h), wrap(fn));
  }, py::arg("fn"), py::arg("half_width"), py::arg("h"), "Samples fn(x, y) on [-a, a]^2.");
  m.def("sample_disk", [](const PyHeight& fn, const SolitonParams& p, double radius, double h) {
    return ScalarField::sample(discretize({p, ConvexDomain::disk(Vec2::Zero(), radius), BoundaryData::constant(0.0), h}).grid,
                               wrap(fn));
  }, py::arg("fn"), py::arg("params"), py::arg("radius"), py::arg("h"), "Samples fn(x, y) on a disk grid.");

  m.def("smooth_min", [](const std::vector<double>& xs, double delta) { return smooth_min(xs, delta); },
        py::arg("xs"), py::arg("delta"));
  m.def("hessian_identity_check", [](const ScalarField& f) { return hessian_identity_check(f).max_abs_error; },
        py::arg("field"), "Max defect of the divergence identity for the inverse metric.");

  py::class_<RadialProfile, std::shared_ptr<RadialProfile>>(m, "RadialProfile")
      .def_property_readonly("r", [](const RadialProfile& p) { return to_array(p.r); })
      .def_property_readonly("phi", [](const RadialProfile& p) { return to_array(p.phi); })
      .def_property_readonly("dphi", [](const RadialProfile& p) { return to_array(p.dphi); })
      .def_property_readonly("ddphi", [](const RadialProfile& p) { return to_array(p.ddphi); })
      .def_property_readonly("r_max", &RadialProfile::r_max)
      .def("value", &RadialProfile::value, py::arg("r"))
      .def("slope", &RadialProfile::slope, py::arg("r"));
  m.def("solve_radial", [](const SolitonParams& p, double rmax, double tol) {
    return std::make_shared<RadialProfile>(solve_radial(p, rmax, tol));
  }, py::arg("params"), py::arg("rmax"), py::arg("tol") = 1e-10);

  py::class_<AsymptoticFit>(m, "AsymptoticFit")
      .def_readonly("slope", &AsymptoticFit::slope)
      .def_readonly("logcoef", &AsymptoticFit::logcoef)
      .def_readonly("offset", &AsymptoticFit::offset)
      .def_readonly("rms_residual", &AsymptoticFit::rms_residual);
  m.def("asymptotic_fit", &asymptotic_fit, py::arg("profile"), py::arg("r1"), py::arg("r2"));

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("residual_history", &SolveReport::residual_history)
      .def_readonly("spacelike_margin", &SolveReport::spacelike_margin);

  m.def("solve_dirichlet_disk", [](const SolitonParams& p, double radius, double h, std::optional<PyHeight> g) {
    const BoundaryData data = g ? BoundaryData::custom(wrap(*g)) : BoundaryData::constant(0.0);
    return solve_dirichlet({p, ConvexDomain::disk(Vec2::Zero(), radius), data, h});
  }, py::arg("params"), py::arg("radius"), py::arg("h"), py::arg("g") = py::none(),
     "Solves on the centred disk; returns (field, report).");
  m.def("solve_dirichlet_polygon", [](const SolitonParams& p, const std::vector<std::array<double, 2>>& vertices,
                                      double h, std::optional<PyHeight> g) {
    std::vector<Vec2> vs;
    for (const auto& v : vertices) vs.emplace_back(v[0], v[1]);
    const BoundaryData data = g ? BoundaryData::custom(wrap(*g)) : BoundaryData::constant(0.0);
    return solve_dirichlet({p, ConvexDomain::polygon(std::move(vs)), data, h});
  }, py::arg("params"), py::arg("vertices"), py::arg("h"), py::arg("g") = py::none());

  py::class_<SphereFunction>(m, "SphereFunction")
      .def_static("cosine", &SphereFunction::cosine, py::arg("amplitude"), py::arg("frequency"), py::arg("params"),
                  py::arg("samples") = 720)
      .def_static("constant", &SphereFunction::constant, py::arg("value"), py::arg("params"), py::arg("samples") = 720)
      .def_static("from_samples", [](const std::vector<double>& v, const SolitonParams& p, std::optional<double> mb) {
        return SphereFunction::from_samples(v, p, mb);
      }, py::arg("values"), py::arg("params"), py::arg("m_bound") = py::none())
      .def_property_readonly("m_bound", &SphereFunction::m_bound)
      .def_property_readonly("values", [](const SphereFunction& f) { return to_array(f.values()); })
      .def("value", &SphereFunction::value, py::arg("theta"));

  py::class_<ExhaustionResult>(m, "ExhaustionResult")
      .def_readonly("levels", &ExhaustionResult::levels)
      .def_readonly("solutions", &ExhaustionResult::solutions)
      .def_readonly("final", &ExhaustionResult::final)
      .def_property_readonly("lower_gaps", [](const ExhaustionResult& r) {
        std::vector<double> g;
        for (const auto& rep : r.reports) g.push_back(rep.lower_gap);
        return g;
      })
      .def_property_readonly("upper_gaps", [](const ExhaustionResult& r) {
        std::vector<double> g;
        for (const auto& rep : r.reports) g.push_back(rep.upper_gap);
        return g;
      })
      .def("angular_std", [](const ExhaustionResult& r, double radius) {
        return angular_std(FieldInterpolator(r.solutions.back()), radius);
      }, py::arg("radius"), "Angular standard deviation of the last level at a radius.");
  m.def("exhaustion_construct", [](const SphereFunction& f, const SolitonParams& p, const std::vector<double>& levels,
                                   double compact_radius, double h, int n_angles) {
    ExhaustionOptions opts;
    opts.n_angles = n_angles;
    return exhaustion_construct(f, p, levels, compact_radius, h, opts);
  }, py::arg("f"), py::arg("params"), py::arg("levels"), py::arg("compact_radius"), py::arg("h"),
     py::arg("n_angles") = 720);

  py::class_<ConeSamples>(m, "ConeSamples")
      .def_property_readonly("directions", [](const ConeSamples& c) { return to_points(c.directions); })
      .def_property_readonly("values", [](const ConeSamples& c) { return to_array(c.values); })
      .def_readonly("min_increment", &ConeSamples::min_increment);
  m.def("blowdown", [](const PyHeight& fn, int n_dirs, const std::vector<double>& h_values) {
    return blowdown(wrap(fn), uniform_directions(n_dirs), h_values);
  }, py::arg("fn"), py::arg("n_directions"), py::arg("h_values"));
  m.def("eikonal_check", [](const ConeSamples& cone, const SolitonParams& p) {
    return eikonal_check(cone, p).max_deviation;
  }, py::arg("cone"), py::arg("params"), "Max | |DV| - ctilde | over resolved directions.");

  m.def("split_lift", [](const std::function<double(std::vector<double>)>& reduced, int reduced_dim,
                         const std::vector<double>& a, const SolitonParams& p) {
    auto lifted = split_lift([reduced](std::span<const double> x) { return reduced({x.begin(), x.end()}); },
                             reduced_dim, a, p);
    return py::make_tuple(py::cpp_function([u = lifted.u](const std::vector<double>& x) { return u(x); }),
                          lifted.c_reduced, lifted.lambda);
  }, py::arg("reduced"), py::arg("reduced_dim"), py::arg("a"), py::arg("params"),
     "Returns (u, reduced constant, lambda) with u(x) = a.x'' + lambda^2 h(x'/lambda).");

  py::class_<FlowRun>(m, "FlowRun")
      .def_property_readonly("field", [](const FlowRun& r) { return r.state.field; })
      .def_property_readonly("time", [](const FlowRun& r) { return r.state.time; })
      .def_readonly("steps", &FlowRun::steps)
      .def_readonly("snapshots", &FlowRun::snapshots)
      .def_property_readonly("series", [](const FlowRun& r) {
        py::list out;
        for (const auto& s : r.series) {
          py::dict d;
          d["t"] = s.t;
          d["r"] = s.r;
          d["s"] = s.s;
          d["dt"] = s.dt;
          out.append(d);
        }
        return out;
      });
  m.def("flow", [](const ScalarField& u0, const SolitonParams& p, double t_end, int snapshots, double cfl,
                   double observe_radius) {
    FlowOptions opts;
    opts.cfl = cfl;
    opts.observe_radius = observe_radius;
    return run_to(initial_state(u0, p), t_end, p, opts, snapshots);
  }, py::arg("field"), py::arg("params"), py::arg("t_end"), py::arg("snapshots") = 5, py::arg("cfl") = 0.25,
     py::arg("observe_radius") = 0.0);

  m.def("cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "soliton");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    py::scoped_ostream_redirect out;
    return cli::main(static_cast<int>(argv.size()), argv.data());
  }, py::arg("args"), "Runs the command-line tool in-process and returns its exit status.");
}

#include "dualprox/best_approx.hpp"
#include "dualprox/imaging.hpp"
#include "dualprox/oracle.hpp"
#include "dualprox/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <sstream>

namespace py = pybind11;
using namespace dualprox;

namespace {

using RowImage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ImageGrid to_grid(const RowImage& a) {
  const Vector flat = Eigen::Map<const Vector>(a.data(), a.size());
  return ImageGrid::from_pixels(static_cast<int>(a.cols()), static_cast<int>(a.rows()), flat);
}

RowImage to_array(const ImageGrid& g) { return Eigen::Map<const RowImage>(g.pixels.data(), g.height, g.width); }

double to_float(const ExtendedReal& v) { return v.to_double(); }

SolverConfig make_config(double tol, std::size_t max_iter, std::optional<double> gamma, std::optional<double> lambda) {
  SolverConfig c;
  c.tol = tol;
  c.max_iter = max_iter;
  if (gamma) c.gamma = constant_schedule(*gamma);
  if (lambda) c.lambda = constant_schedule(*lambda);
  return c;
}

std::string trace_csv(const Trace& t) {
  std::ostringstream os;
  t.write_csv(os);
  return os.str();
}

const char* status_name(ProjectionStatus s) {
  switch (s) {
    case ProjectionStatus::converged: return "converged";
    case ProjectionStatus::max_iterations: return "max_iterations";
    case ProjectionStatus::infeasible_stagnation: return "infeasible_stagnation";
  }
  return "unknown";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Proximity operators of composite convex functions by dual splitting.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<QualificationError>(m, "QualificationError", PyExc_ValueError);
  py::register_exception<CertificationError>(m, "CertificationError", PyExc_RuntimeError);

  py::class_<LinearOperator>(m, "LinearOperator")
      .def_property_readonly("dim_in", &LinearOperator::dim_in)
      .def_property_readonly("dim_out", &LinearOperator::dim_out)
      .def_property_readonly("name", &LinearOperator::name)
      .def("apply", &LinearOperator::apply)
      .def("adjoint", &LinearOperator::adjoint)
      .def("norm_upper_bound", &LinearOperator::norm_upper_bound)
      .def("__repr__", [](const LinearOperator& L) {
        return "<LinearOperator " + L.name() + " " + std::to_string(L.dim_out()) + "x" + std::to_string(L.dim_in()) + ">";
      });
  m.def("identity_operator", &identity_operator, py::arg("n"));
  m.def("scalar_operator", &scalar_operator, py::arg("n"), py::arg("value"));
  m.def("diagonal_operator", &diagonal_operator, py::arg("values"));
  m.def("matrix_operator", &matrix_operator, py::arg("matrix"));
  m.def("estimate_operator_norm", [](const LinearOperator& L) { return estimate_operator_norm(L); });

  py::class_<ConvexSetDescriptor>(m, "ConvexSet")
      .def_static("ball", &ConvexSetDescriptor::ball, py::arg("center"), py::arg("radius"))
      .def_static("box", &ConvexSetDescriptor::box, py::arg("lo"), py::arg("hi"))
      .def_static("halfspace", &ConvexSetDescriptor::halfspace, py::arg("normal"), py::arg("offset"))
      .def_static("affine", &ConvexSetDescriptor::affine, py::arg("matrix"), py::arg("rhs"))
      .def_property_readonly("kind", [](const ConvexSetDescriptor& c) { return std::string(c.kind_name()); })
      .def_property_readonly("dim", &ConvexSetDescriptor::dim)
      .def("project", &ConvexSetDescriptor::project)
      .def("distance", &ConvexSetDescriptor::distance)
      .def("contains", &ConvexSetDescriptor::contains);

  py::class_<ProxFunction>(m, "ProxFunction")
      .def_property_readonly("name", &ProxFunction::name)
      .def("eval", [](const ProxFunction& g, const Vector& y) { return to_float(g.eval(y)); })
      .def("prox", &ProxFunction::prox, py::arg("gamma"), py::arg("y"))
      .def("prox_conjugate", &ProxFunction::prox_conjugate, py::arg("gamma"), py::arg("v"))
      .def("__repr__", [](const ProxFunction& g) { return "<ProxFunction " + g.name() + ">"; });
  m.def("zero_function", &zero_function);
  m.def("norm1", &norm1);
  m.def("norm2", &norm2);
  m.def("elastic_net", &elastic_net, py::arg("alpha"), py::arg("beta"));
  m.def("mixed_norm21", &mixed_norm21, py::arg("groups"), py::arg("group_size"));
  m.def("indicator", &make_indicator, py::arg("set"));

  py::class_<CompositeTerm>(m, "Term")
      .def(py::init([](double w, ProxFunction g, LinearOperator L, std::optional<Vector> r) {
             const Index n = L.dim_out();
             return CompositeTerm{w, std::move(g), std::move(L), r ? *r : Vector(Vector::Zero(n))};
           }),
           py::arg("weight"), py::arg("function"), py::arg("operator"), py::arg("shift") = py::none())
      .def_readonly("weight", &CompositeTerm::weight)
      .def_readonly("function", &CompositeTerm::function)
      .def_readonly("operator", &CompositeTerm::op)
      .def_readonly("shift", &CompositeTerm::shift);

  py::class_<CompositeProxProblem>(m, "Problem")
      .def(py::init([](Vector z, std::vector<CompositeTerm> terms) {
             CompositeProxProblem p{std::move(z), std::move(terms)};
             p.validate();
             return p;
           }),
           py::arg("z"), py::arg("terms"))
      .def_readonly("z", &CompositeProxProblem::z)
      .def_readonly("terms", &CompositeProxProblem::terms)
      .def("primal_objective", [](const CompositeProxProblem& p, const Vector& x) { return to_float(primal_objective(p, x)); })
      .def("dual_objective", [](const CompositeProxProblem& p, const std::vector<Vector>& v) -> std::optional<double> {
        const auto d = dual_objective(p, v);
        if (!d) return std::nullopt;
        return d->to_double();
      });

  py::class_<Solution>(m, "Solution")
      .def_readonly("x", &Solution::x)
      .def_readonly("v", &Solution::v)
      .def_readonly("iterations", &Solution::iterations)
      .def_readonly("converged", &Solution::converged);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("solution", &SolveResult::solution)
      .def("trace_csv", [](const SolveResult& r) { return trace_csv(r.trace); });

  m.def(
      "solve",
      [](const CompositeProxProblem& p, double tol, std::size_t max_iter, std::optional<double> gamma,
         std::optional<double> lambda) { return solve(p, make_config(tol, max_iter, gamma, lambda)); },
      py::arg("problem"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100000, py::arg("gamma") = py::none(),
      py::arg("lambda_") = py::none());

  m.def(
      "solve_dykstra",
      [](const Vector& z, const std::vector<double>& weights, const std::vector<ProxFunction>& fs, double tol,
         std::size_t max_iter) {
        return solve_dykstra(z, WeightVector(weights), fs, make_config(tol, max_iter, std::nullopt, std::nullopt));
      },
      py::arg("z"), py::arg("weights"), py::arg("functions"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100000);

  py::class_<CompositeConstraint>(m, "Constraint")
      .def(py::init([](ConvexSetDescriptor set, std::optional<LinearOperator> L, std::optional<Vector> r) {
             LinearOperator op = L ? *L : identity_operator(set.dim());
             const Index n = op.dim_out();
             return CompositeConstraint{std::move(op), r ? *r : Vector(Vector::Zero(n)), std::move(set)};
           }),
           py::arg("set"), py::arg("operator") = py::none(), py::arg("shift") = py::none());

  py::class_<ProjectionResult>(m, "ProjectionResult")
      .def_property_readonly("x", [](const ProjectionResult& r) { return r.solution.x; })
      .def_property_readonly("iterations", [](const ProjectionResult& r) { return r.solution.iterations; })
      .def_property_readonly("converged", [](const ProjectionResult& r) { return r.solution.converged; })
      .def_property_readonly("status", [](const ProjectionResult& r) { return status_name(r.status); })
      .def_readonly("feasibility_residual", &ProjectionResult::feasibility_residual);

  m.def(
      "project_intersection",
      [](const Vector& z, const std::vector<CompositeConstraint>& cs, double tol, std::size_t max_iter,
         std::optional<Vector> slater_point, bool assume_qualified) {
        ProjectionConfig c;
        c.tol = tol;
        c.max_iter = max_iter;
        c.slater_point = std::move(slater_point);
        c.assume_qualified = assume_qualified;
        return project_intersection(z, cs, c);
      },
      py::arg("z"), py::arg("constraints"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100000,
      py::arg("slater_point") = py::none(), py::arg("assume_qualified") = false);
  m.def("feasibility_residual", &feasibility_residual, py::arg("x"), py::arg("constraints"));

  m.def("forward_gradient", [](const RowImage& img) {
    const DualField f = forward_gradient(to_grid(img));
    const Index n = f.pixel_count();
    RowImage h = Eigen::Map<const RowImage>(f.data.data(), f.height, f.width);
    RowImage v = Eigen::Map<const RowImage>(f.data.data() + n, f.height, f.width);
    return py::make_tuple(h, v);
  });
  m.def("backward_divergence", [](const RowImage& h, const RowImage& v) {
    if (h.rows() != v.rows() || h.cols() != v.cols()) throw DimensionError("field components differ in shape");
    DualField f = DualField::zeros(static_cast<int>(h.cols()), static_cast<int>(h.rows()));
    f.data << Eigen::Map<const Vector>(h.data(), h.size()), Eigen::Map<const Vector>(v.data(), v.size());
    return to_array(backward_divergence(f));
  });
  m.def("tv", [](const RowImage& img) { return tv(to_grid(img)); });

  m.def(
      "denoise",
      [](const RowImage& observed, std::vector<double> weights, const std::string& basis, double tol,
         std::size_t max_iter) {
        const ImageGrid r = to_grid(observed);
        const MeasurementModel model{r.width, r.height, {identity_operator(r.size())}, {r.pixels}};
        SolverConfig c = make_config(tol, max_iter, std::nullopt, std::nullopt);
        c.record_trace = false;
        const auto res = recover_image(model, make_basis(basis, r.width, r.height), WeightVector(weights), c);
        return py::make_tuple(to_array(res.image), res.solution.converged, res.solution.iterations);
      },
      py::arg("observed"), py::arg("weights") = std::vector<double>{0.85, 0.01, 0.14}, py::arg("basis") = "identity",
      py::arg("tol") = 1e-6, py::arg("max_iter") = 500000,
      "Recover an image from a noisy copy; returns (image, converged, iterations).");
  m.def(
      "recovery_objective",
      [](const RowImage& observed, const RowImage& x, std::vector<double> weights, const std::string& basis) {
        const ImageGrid r = to_grid(observed);
        const MeasurementModel model{r.width, r.height, {identity_operator(r.size())}, {r.pixels}};
        return recovery_objective(model, make_basis(basis, r.width, r.height), WeightVector(weights), to_grid(x));
      },
      py::arg("observed"), py::arg("x"), py::arg("weights") = std::vector<double>{0.85, 0.01, 0.14},
      py::arg("basis") = "identity");

  m.def(
      "grid_oracle",
      [](const CompositeProxProblem& p, std::optional<Vector> lo, std::optional<Vector> hi, double resolution) {
        GridOptions g;
        if (lo) g.lo = *lo;
        if (hi) g.hi = *hi;
        g.resolution = resolution;
        const Certificate c = grid_oracle(p, g);
        return py::make_tuple(c.reference_x, c.guaranteed_radius);
      },
      py::arg("problem"), py::arg("lo") = py::none(), py::arg("hi") = py::none(), py::arg("resolution") = 1e-3,
      "Brute-force reference for dim <= 3; returns (x, radius).");
}

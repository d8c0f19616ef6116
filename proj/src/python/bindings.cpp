#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "magopt/config.hpp"
#include "magopt/errors.hpp"
#include "magopt/fem.hpp"
#include "magopt/io.hpp"
#include "magopt/materials.hpp"
#include "magopt/mesh.hpp"
#include "magopt/objective.hpp"
#include "magopt/optimizer.hpp"
#include "magopt/polarization.hpp"
#include "magopt/sensitivity.hpp"

namespace py = pybind11;
using namespace magopt;

namespace {

std::array<std::array<double, 2>, 2> matrix_to_array(const Eigen::Matrix2d& m) {
    return {{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "2D magnetostatics topology optimization: ON/OFF sensitivities, "
              "topological derivatives and the hole-carving loop";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__repr__", [](const Vec2& v) {
            std::ostringstream ss;
            ss << "Vec2(" << v.x << ", " << v.y << ")";
            return ss.str();
        });

    py::enum_<Region>(m, "Region")
        .value("AIR", Region::Air)
        .value("IRON", Region::Iron)
        .value("DESIGN", Region::Design)
        .value("MAGNET", Region::Magnet);

    py::enum_<MaterialMode>(m, "MaterialMode")
        .value("LINEAR", MaterialMode::Linear)
        .value("NONLINEAR", MaterialMode::Nonlinear);

    py::class_<MotorGeometry>(m, "MotorGeometry")
        .def(py::init<>())
        .def_readwrite("r_shaft", &MotorGeometry::r_shaft)
        .def_readwrite("r_rotor_iron", &MotorGeometry::r_rotor_iron)
        .def_readwrite("r_magnet_outer", &MotorGeometry::r_magnet_outer)
        .def_readwrite("r_rotor_surface", &MotorGeometry::r_rotor_surface)
        .def_readwrite("r_gap_circle", &MotorGeometry::r_gap_circle)
        .def_readwrite("r_stator_bore", &MotorGeometry::r_stator_bore)
        .def_readwrite("r_stator_yoke", &MotorGeometry::r_stator_yoke)
        .def_readwrite("magnet_span", &MotorGeometry::magnet_span)
        .def_readwrite("magnet_strength", &MotorGeometry::magnet_strength);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("num_nodes", &Mesh::num_nodes)
        .def_property_readonly("num_triangles", &Mesh::num_triangles)
        .def_property_readonly("total_area", &Mesh::total_area)
        .def_property_readonly("design_elements", &Mesh::design_elements)
        .def("centroid", &Mesh::centroid)
        .def("node", &Mesh::node, py::return_value_policy::copy)
        .def("region",
             [](const Mesh& mesh, int e) { return mesh.triangle(e).region; })
        .def("save", [](const Mesh& mesh, const std::string& path) {
            save_mesh_file(path, mesh);
        });

    m.def("generate_motor_mesh", &generate_motor_mesh, py::arg("geometry"), py::arg("h"));
    m.def("generate_rectangle_mesh", &generate_rectangle_mesh, py::arg("nx"), py::arg("ny"),
          py::arg("w") = 1.0, py::arg("h") = 1.0, py::arg("region") = Region::Iron);
    m.def("load_mesh", &load_mesh_file, py::arg("path"));

    py::class_<BHModel>(m, "BHModel")
        .def_static("linear", &BHModel::linear, py::arg("nu0") = kNu0Air,
                    py::arg("nu_r") = 1.0 / 5100.0)
        .def_static("analytic", &BHModel::analytic, py::arg("nu0") = kNu0Air,
                    py::arg("nu_r") = 1.0 / 5100.0, py::arg("s0") = 1.1e6,
                    py::arg("exponent") = 4.0)
        .def_property_readonly("nu0", &BHModel::nu0)
        .def_property_readonly("nu1", &BHModel::nu1)
        .def("nu_hat", &BHModel::nu_hat)
        .def("nu_hat_prime", &BHModel::nu_hat_prime);
    m.attr("NU0_AIR") = kNu0Air;

    py::class_<DesignState>(m, "DesignState")
        .def_static("all_on", &DesignState::all_on, py::arg("mesh"), py::arg("mode"))
        .def_readwrite("flags", &DesignState::flags)
        .def_readwrite("mode", &DesignState::mode)
        .def("count_on", &DesignState::count_on);

    py::class_<NodalField>(m, "NodalField")
        .def_property_readonly("values",
                               [](const NodalField& f) { return f.values; });

    py::class_<SolveOptions>(m, "SolveOptions")
        .def(py::init<>())
        .def_readwrite("linear_tol", &SolveOptions::linear_tol)
        .def_readwrite("newton_tol", &SolveOptions::newton_tol)
        .def_readwrite("max_newton_iters", &SolveOptions::max_newton_iters);

    py::class_<StateSolveReport>(m, "StateSolveReport")
        .def_readonly("u", &StateSolveReport::u)
        .def_readonly("newton_iterations", &StateSolveReport::newton_iterations)
        .def_readonly("residual_history", &StateSolveReport::residual_history);

    m.def("solve_state", &solve_state, py::arg("mesh"), py::arg("model"), py::arg("state"),
          py::arg("options") = SolveOptions{});
    m.def("solve_state_report", &solve_state_report, py::arg("mesh"), py::arg("model"),
          py::arg("state"), py::arg("options") = SolveOptions{});

    py::class_<TargetCurve>(m, "TargetCurve")
        .def_static("sine", &TargetCurve::sine, py::arg("amplitude") = 0.5,
                    py::arg("frequency") = 4.0)
        .def_static("zero", &TargetCurve::zero)
        .def("__call__", &TargetCurve::operator());

    py::class_<GapCircle>(m, "GapCircle")
        .def_property_readonly("radius", [](const GapCircle& g) { return g.radius; })
        .def_property_readonly("theta", [](const GapCircle& g) { return g.theta; })
        .def_property_readonly("weight", [](const GapCircle& g) { return g.weight; });

    m.def("build_gap_circle", &build_gap_circle, py::arg("mesh"), py::arg("radius"),
          py::arg("n_q"), py::arg("tangent_sign") = 1.0);
    m.def("radial_flux_trace", &radial_flux_trace, py::arg("mesh"), py::arg("gap"),
          py::arg("u"));
    m.def("objective", &objective, py::arg("mesh"), py::arg("gap"), py::arg("target"),
          py::arg("u"));
    m.def("objective_gradient",
          [](const Mesh& mesh, const GapCircle& gap, const TargetCurve& target,
             const NodalField& u) {
              return objective_gradient_nodal(mesh, gap, target, u);
          },
          py::arg("mesh"), py::arg("gap"), py::arg("target"), py::arg("u"));

    py::class_<AdjointSolveReport>(m, "AdjointSolveReport")
        .def_readonly("p", &AdjointSolveReport::p)
        .def_readonly("residual", &AdjointSolveReport::residual);
    m.def("solve_adjoint", &solve_adjoint, py::arg("mesh"), py::arg("model"), py::arg("state"),
          py::arg("u"), py::arg("gap"), py::arg("target"), py::arg("tol") = 1e-10);

    py::class_<SensitivityField>(m, "SensitivityField")
        .def_readonly("elem_ids", &SensitivityField::elem_ids)
        .def_readonly("onoff", &SensitivityField::onoff)
        .def_readonly("topo", &SensitivityField::topo);
    m.def("onoff_sensitivities", &onoff_sensitivities, py::arg("mesh"), py::arg("state"),
          py::arg("u"), py::arg("p"));
    m.def("topological_derivative_field",
          [](const Mesh& mesh, const NodalField& u0, const NodalField& p0, double nu0,
             double nu1, MaterialMode mode) {
              return topological_derivative_field(mesh, u0, p0, nu0, nu1, mode);
          },
          py::arg("mesh"), py::arg("u0"), py::arg("p0"), py::arg("nu0"), py::arg("nu1"),
          py::arg("mode") = MaterialMode::Linear);
    m.def("sensitivity_fd_oracle", &sensitivity_fd_oracle, py::arg("mesh"), py::arg("model"),
          py::arg("state"), py::arg("gap"), py::arg("target"), py::arg("elem_id"), py::arg("h"),
          py::arg("options") = SolveOptions{});

    py::class_<InclusionShape>(m, "InclusionShape")
        .def_property_readonly("area", [](const InclusionShape& s) { return s.area; })
        .def_property_readonly("num_panels", &InclusionShape::size);
    m.def("panelize",
          [](const std::string& spec, int n) { return panelize(parse_shape_spec(spec), n); },
          py::arg("spec"), py::arg("n_panels"));
    m.def("polarization_matrix",
          [](const InclusionShape& shape, double nu0, double nu1) {
              return matrix_to_array(polarization_matrix(shape, nu0, nu1).P);
          },
          py::arg("shape"), py::arg("nu0"), py::arg("nu1"));
    m.def("disk_polarization_matrix",
          [](double nu0, double nu1) {
              return matrix_to_array(disk_polarization_matrix(nu0, nu1));
          },
          py::arg("nu0"), py::arg("nu1"));

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("max_iters", &OptimizerConfig::max_iters)
        .def_readwrite("radius0", &OptimizerConfig::radius0)
        .def_readwrite("radius_decay", &OptimizerConfig::radius_decay)
        .def_readwrite("minima_per_iter", &OptimizerConfig::minima_per_iter)
        .def_readwrite("negative_threshold", &OptimizerConfig::negative_threshold)
        .def_readwrite("allow_switch_on", &OptimizerConfig::allow_switch_on)
        .def_readwrite("stop_stagnation", &OptimizerConfig::stop_stagnation);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("iter", &IterationRecord::iter)
        .def_readonly("J", &IterationRecord::J)
        .def_readonly("switched", &IterationRecord::switched)
        .def_readonly("reverted", &IterationRecord::reverted)
        .def_readonly("flags", &IterationRecord::flags);

    py::class_<OptimizationHistory>(m, "OptimizationHistory")
        .def_readonly("entries", &OptimizationHistory::entries)
        .def_readonly("best_J", &OptimizationHistory::best_J)
        .def_readonly("best_iter", &OptimizationHistory::best_iter)
        .def_readonly("best_flags", &OptimizationHistory::best_flags)
        .def_readonly("aborted", &OptimizationHistory::aborted);

    m.def("run_onoff", &run_onoff, py::arg("mesh"), py::arg("model"), py::arg("mode"),
          py::arg("gap"), py::arg("target"), py::arg("config") = OptimizerConfig{},
          py::arg("solve_options") = SolveOptions{},
          py::call_guard<py::gil_scoped_release>());
}

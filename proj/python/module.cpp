#include "ris/errors.hpp"
#include "ris/gallery.hpp"
#include "ris/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

namespace py = pybind11;
using namespace ris;

namespace {

Scheme scheme_from_string(const std::string& s)
{
    if (s == "local") return Scheme::Local;
    if (s == "global") return Scheme::Global;
    throw BadConfig("unknown scheme '" + s + "'");
}

Reference reference_for(const Problem& p, const std::string& kind,
                        const std::vector<double>& taus)
{
    if (kind == "analytic") return analytic_reference(p);
    if (kind == "self") return self_reference(p, taus.back() / 16.0);
    throw BadConfig("unknown reference '" + kind + "'");
}

} // namespace

PYBIND11_MODULE(_ris, m)
{
    m.doc() = "incremental minimization schemes for rate-independent evolutions";

    py::register_exception<OutOfRange>(m, "OutOfRangeError");
    py::register_exception<SolverError>(m, "SolverError");
    py::register_exception<BadConfig>(m, "ConfigError");

    py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
        .def_property_readonly("name", &Problem::name)
        .def_property_readonly("dim", &Problem::dim)
        .def_property_readonly("horizon", &Problem::horizon)
        .def_property_readonly("initial_state", &Problem::initial_state)
        .def("energy", &Problem::energy, py::arg("t"), py::arg("z"))
        .def("gradient", &Problem::gradient, py::arg("t"), py::arg("z"))
        .def("dissipation", &Problem::dissipation, py::arg("v"))
        .def("norm_Z", &Problem::norm_Z)
        .def("norm_V", &Problem::norm_V)
        .def("dist_to_stable", &Problem::dist_to_stable, py::arg("t"), py::arg("z"))
        .def("is_locally_stable", &Problem::is_locally_stable, py::arg("t"), py::arg("z"),
             py::arg("tol"))
        .def("gamma_measure", &Problem::gamma_measure, py::arg("t"), py::arg("z1"),
             py::arg("z2"))
        .def("validate_initial",
             [](const Problem& p) {
                 const auto r = p.validate_initial();
                 return py::make_tuple(r.ok(), r.dist);
             })
        .def("__repr__", [](const Problem& p) { return "<Problem " + p.name() + ">"; });

    m.def("counterexample_problem",
          [](double z0) { return std::static_pointer_cast<Problem>(counterexample_problem(z0)); },
          py::arg("z0") = -1.0 / 3.0);
    m.def("locally_convex_problem",
          []() { return std::static_pointer_cast<Problem>(locally_convex_problem()); });
    m.def("pde_problem",
          [](int n) { return std::static_pointer_cast<Problem>(pde_problem(n)); }, py::arg("n"));
    m.def("make_problem", &make_problem, py::arg("tag"), py::arg("mesh_n") = 32);

    py::class_<KktResiduals>(m, "KktResiduals")
        .def_readonly("complementarity", &KktResiduals::complementarity)
        .def_readonly("lambda_dist", &KktResiduals::lambda_dist)
        .def_readonly("energy_identity", &KktResiduals::energy_identity)
        .def_readonly("subgradient", &KktResiduals::subgradient)
        .def("max", &KktResiduals::max);

    py::class_<SubproblemResult>(m, "SubproblemResult")
        .def_readonly("z", &SubproblemResult::z)
        .def_readonly("lam", &SubproblemResult::lambda)
        .def_readonly("active", &SubproblemResult::active)
        .def_readonly("kkt", &SubproblemResult::kkt)
        .def_readonly("iterations", &SubproblemResult::iterations)
        .def_readonly("objective", &SubproblemResult::objective);

    m.def("solve_local_step",
          [](const Problem& p, double t_prev, const State& z_prev, double tau) {
              return solve_local_step(p, t_prev, z_prev, tau);
          },
          py::arg("problem"), py::arg("t_prev"), py::arg("z_prev"), py::arg("tau"));
    m.def("solve_global_step",
          [](const Problem& p, double t, const State& z_prev) {
              return solve_global_step(p, t, z_prev);
          },
          py::arg("problem"), py::arg("t"), py::arg("z_prev"));

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("k", &StepRecord::k)
        .def_readonly("s", &StepRecord::s)
        .def_readonly("t", &StepRecord::t)
        .def_readonly("z", &StepRecord::z)
        .def_readonly("lam", &StepRecord::lambda)
        .def_readonly("dz_V", &StepRecord::dz_V)
        .def_readonly("dz_Z", &StepRecord::dz_Z)
        .def_readonly("stalled", &StepRecord::stalled)
        .def_readonly("kkt", &StepRecord::kkt);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("tau", &Trajectory::tau)
        .def_readonly("records", &Trajectory::records)
        .def_readonly("n_total", &Trajectory::n_total)
        .def_readonly("n_reach_T", &Trajectory::n_reach_T)
        .def_readonly("arc_length_Z", &Trajectory::arc_length_Z)
        .def("max_stall_run", &Trajectory::max_stall_run)
        .def("times",
             [](const Trajectory& tr) {
                 std::vector<double> out;
                 for (const auto& r : tr.records) out.push_back(r.t);
                 return out;
             })
        .def("to_csv", [](const Trajectory& tr, const std::string& path) {
            std::ofstream out(path);
            if (!out) throw BadConfig("cannot open '" + path + "'");
            write_trajectory_csv(tr, out);
        });

    m.def("run_local",
          [](const Problem& p, double tau) { return run_local(p, tau); }, py::arg("problem"),
          py::arg("tau"));
    m.def("run_global",
          [](const Problem& p, double tau) { return run_global(p, tau); }, py::arg("problem"),
          py::arg("tau"));

    py::class_<PhysicalSolution>(m, "PhysicalSolution")
        .def_readonly("times", &PhysicalSolution::times)
        .def_readonly("states", &PhysicalSolution::states)
        .def("evaluate", &PhysicalSolution::evaluate, py::arg("t"))
        .def("__call__", &PhysicalSolution::evaluate, py::arg("t"));

    m.def("filter_progress", &filter_progress, py::arg("trajectory"));

    py::class_<ExactSolution>(m, "ExactSolution")
        .def_readonly("tag", &ExactSolution::tag)
        .def_readonly("t_begin", &ExactSolution::t_begin)
        .def_readonly("t_end", &ExactSolution::t_end)
        .def_readonly("knots", &ExactSolution::knots)
        .def("evaluate", [](const ExactSolution& s, double t) { return s.eval(t); },
             py::arg("t"))
        .def("__call__", [](const ExactSolution& s, double t) { return s.eval(t); },
             py::arg("t"));

    m.def("locally_convex_exact", &locally_convex_exact);
    m.def("counterexample_branches", &counterexample_branches);
    m.def("pde_exact", [](const Problem& p) {
        const auto* pde = dynamic_cast<const PdeProblem*>(&p);
        if (pde == nullptr) throw BadConfig("pde_exact needs the pde problem");
        return pde_exact(*pde);
    });

    m.def("sup_error",
          [](const Problem& p, const PhysicalSolution& a, const ExactSolution& b, double t_lo,
             double t_hi) { return sup_error(p, a, b, NormKind::Z, t_lo, t_hi); },
          py::arg("problem"), py::arg("solution"), py::arg("exact"), py::arg("t_lo"),
          py::arg("t_hi"));

    m.def("convergence_study",
          [](const Problem& p, const std::string& scheme, const std::vector<double>& taus,
             const std::string& reference) {
              const auto report = run_convergence_study(p, scheme_from_string(scheme), taus,
                                                        reference_for(p, reference, taus));
              py::list rows;
              for (const auto& r : report.rows) {
                  py::dict d;
                  d["tau"] = r.tau;
                  d["sup_err_Z"] = r.sup_err_Z;
                  d["eoc"] = r.eoc ? py::cast(*r.eoc) : py::none();
                  d["max_stall"] = r.max_stall;
                  d["arc_length_Z"] = r.arc_length_Z;
                  d["max_kkt"] = r.max_kkt;
                  d["failed"] = r.failed;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("problem"), py::arg("scheme"), py::arg("taus"),
          py::arg("reference") = "analytic");

    m.def("bifurcation_scan",
          [](const Problem& p, const std::vector<double>& taus) {
              py::list rows;
              for (const auto& r : bifurcation_scan(p, taus)) {
                  rows.append(py::make_tuple(r.tau, r.terminal_z, r.branch));
              }
              return rows;
          },
          py::arg("problem"), py::arg("taus"));

    m.def("stability_set_1d",
          [](const Problem& p, double t, double z_lo, double z_hi, double step) {
              return stability_set_1d(p, t, z_lo, z_hi, step);
          },
          py::arg("problem"), py::arg("t"), py::arg("z_lo"), py::arg("z_hi"),
          py::arg("step") = 1e-3);
}

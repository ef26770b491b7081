#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psg/certificates.hpp"
#include "psg/core.hpp"
#include "psg/error.hpp"
#include "psg/geometry.hpp"
#include "psg/oracle.hpp"
#include "psg/problems.hpp"
#include "psg/scaling.hpp"
#include "psg/superiorize.hpp"
#include "psg/trace_io.hpp"

namespace py = pybind11;
using namespace psg;

namespace {

RunOptions make_run_options(double res_tol, std::size_t max_iters, const std::optional<Vector>& x_star,
                            const std::optional<double>& J_star) {
    RunOptions opts;
    opts.res_tol = res_tol;
    opts.max_iters = max_iters;
    opts.x_star = x_star;
    opts.J_star = J_star;
    return opts;
}

} // namespace

PYBIND11_MODULE(_psg, m) {
    m.doc() = "Projected scaled gradient methods with runtime convergence certificates";

    static py::handle psg_error = py::exception<Error>(m, "PsgError", PyExc_RuntimeError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = psg_error(e.what());
            err.attr("code") = to_string(e.code());
            err.attr("index") = e.index() ? py::cast(*e.index()) : py::none();
            PyErr_SetObject(psg_error.ptr(), err.ptr());
        }
    });

    py::class_<FeasibleSet>(m, "FeasibleSet")
        .def_static("orthant", &FeasibleSet::orthant, py::arg("n"))
        .def_static("box", &FeasibleSet::box, py::arg("lower"), py::arg("upper"))
        .def_static("ball", &FeasibleSet::ball, py::arg("center"), py::arg("radius"))
        .def_static("halfspaces", &FeasibleSet::halfspaces, py::arg("G"), py::arg("h"))
        .def_property_readonly("kind", [](const FeasibleSet& s) { return to_string(s.kind()); })
        .def_property_readonly("dimension", &FeasibleSet::dimension)
        .def_property_readonly("bounded", &FeasibleSet::bounded)
        .def("project", &FeasibleSet::project, py::arg("x"))
        .def("contains", &FeasibleSet::contains, py::arg("x"), py::arg("tol") = 1e-12);

    py::class_<ObjectiveModel>(m, "ObjectiveModel")
        .def_static(
            "weighted_ls",
            [](Matrix A, Vector b, Matrix W) {
                return ObjectiveModel::weighted_ls(LinearSystem(std::move(A), std::move(b), std::move(W)));
            },
            py::arg("A"), py::arg("b"), py::arg("W") = Matrix())
        .def_static(
            "kl",
            [](Matrix A, Vector b) {
                return ObjectiveModel::kl(LinearSystem(std::move(A), std::move(b), Matrix(), true));
            },
            py::arg("A"), py::arg("b"))
        .def_static("quadratic", &ObjectiveModel::quadratic, py::arg("Q"), py::arg("c"),
                    py::arg("offset") = 0.0)
        .def_property_readonly("kind", [](const ObjectiveModel& o) { return to_string(o.kind()); })
        .def_property_readonly("dimension", &ObjectiveModel::dimension)
        .def_property_readonly("L", &ObjectiveModel::L)
        .def_property_readonly("mu", &ObjectiveModel::mu)
        .def("with_constants", &ObjectiveModel::with_constants, py::arg("L"), py::arg("mu"))
        .def("value", &ObjectiveModel::value, py::arg("x"))
        .def("gradient", &ObjectiveModel::gradient, py::arg("x"))
        .def("value_decrease", &ObjectiveModel::value_decrease, py::arg("x"), py::arg("y"));

    py::class_<GeneratedProblem>(m, "GeneratedProblem")
        .def_readonly("model", &GeneratedProblem::model)
        .def_readonly("set", &GeneratedProblem::set)
        .def_readonly("x_true", &GeneratedProblem::x_true);

    m.def(
        "make_test_problem",
        [](const std::string& kind, Eigen::Index m_rows, Eigen::Index n, std::uint64_t seed, bool consistent,
           double cond, const std::string& set, std::optional<double> lower, std::optional<double> upper) {
            ProblemSpec spec;
            if (kind == "ls") spec.kind = ObjectiveKind::weighted_ls;
            else if (kind == "kl") spec.kind = ObjectiveKind::kl;
            else fail(ErrorCode::invalid_argument, "kind must be 'ls' or 'kl', got '" + kind + "'");
            spec.m = m_rows;
            spec.n = n;
            spec.seed = seed;
            spec.consistent = consistent;
            spec.cond = cond;
            SetSpec set_spec;
            set_spec.kind = set;
            set_spec.lower = lower;
            set_spec.upper = upper;
            return make_test_problem(spec, set_spec);
        },
        py::arg("kind"), py::arg("m"), py::arg("n"), py::arg("seed") = 1, py::arg("consistent") = false,
        py::arg("cond") = 0.0, py::arg("set") = "auto", py::arg("lower") = py::none(),
        py::arg("upper") = py::none());

    py::class_<ScalingStrategy>(m, "ScalingStrategy")
        .def_static("identity", &ScalingStrategy::identity)
        .def_static("constant_diagonal", &ScalingStrategy::constant_diagonal, py::arg("s"))
        .def_static("em_diagonal", &ScalingStrategy::em_diagonal, py::arg("shat"))
        .def_static("em_for", [](const ObjectiveModel& model) { return ScalingStrategy::em_for(model.system()); },
                    py::arg("model"))
        .def_property_readonly("kind", [](const ScalingStrategy& s) { return to_string(s.kind()); });
    m.def("apply_scaling", &apply_scaling, py::arg("strategy"), py::arg("x"), py::arg("g"));

    py::class_<StepsizePolicy>(m, "StepsizePolicy")
        .def_static("constant", &StepsizePolicy::constant, py::arg("tau"))
        .def_static("schedule", &StepsizePolicy::schedule, py::arg("taus"))
        .def("at", &StepsizePolicy::at, py::arg("k"))
        .def_property_readonly("tau_inf", &StepsizePolicy::tau_inf)
        .def_property_readonly("tau_sup", &StepsizePolicy::tau_sup);

    py::class_<OuterPerturbationPlan>(m, "OuterPerturbationPlan")
        .def_static("none", &OuterPerturbationPlan::none)
        .def_static("summable_random", &OuterPerturbationPlan::summable_random, py::arg("c"), py::arg("rho"),
                    py::arg("seed"))
        .def_static("explicit_list", &OuterPerturbationPlan::explicit_list, py::arg("vectors"))
        .def("describe", &OuterPerturbationPlan::describe);

    py::class_<InnerPerturbationPlan>(m, "InnerPerturbationPlan")
        .def(py::init([](double beta_a, double beta_gamma, double v_bar, const std::string& infeasible,
                         std::optional<Vector> fixed,
                         std::function<Vector(std::size_t, const Vector&)> callback) {
                 InnerPerturbationPlan p;
                 p.beta_a = beta_a;
                 p.beta_gamma = beta_gamma;
                 p.v_bar = v_bar;
                 if (infeasible == "halve") p.infeasible = InfeasibleRule::halve;
                 else if (infeasible != "skip")
                     fail(ErrorCode::invalid_argument, "infeasible must be 'skip' or 'halve'");
                 if (fixed && callback)
                     fail(ErrorCode::invalid_argument, "give at most one of fixed and callback");
                 if (fixed) {
                     p.source = DirectionSource::fixed_vector;
                     p.fixed = *fixed;
                 } else if (callback) {
                     p.source = DirectionSource::callback;
                     p.callback = std::move(callback);
                 }
                 p.validate();
                 return p;
             }),
             py::arg("beta_a") = 0.99, py::arg("beta_gamma") = 0.995, py::arg("v_bar") = 1.0,
             py::arg("infeasible") = "skip", py::arg("fixed") = py::none(), py::arg("callback") = py::none())
        .def("beta", &InnerPerturbationPlan::beta, py::arg("k"));

    py::class_<Verdict>(m, "Verdict")
        .def_property_readonly("status", [](const Verdict& v) { return to_string(v.status); })
        .def_readonly("k", &Verdict::k)
        .def_readonly("detail", &Verdict::detail)
        .def_property_readonly("passed", &Verdict::passed)
        .def_property_readonly("failed", &Verdict::failed)
        .def("__repr__", [](const Verdict& v) { return verdict_line("Verdict", v); });

    py::class_<SuperiorizationInfo>(m, "SuperiorizationInfo")
        .def_readonly("beta", &SuperiorizationInfo::beta)
        .def_readonly("applied", &SuperiorizationInfo::applied)
        .def_readonly("tv", &SuperiorizationInfo::tv)
        .def_readonly("e_bound", &SuperiorizationInfo::e_bound);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("k", &IterationRecord::k)
        .def_readonly("tau", &IterationRecord::tau)
        .def_readonly("x", &IterationRecord::x)
        .def_readonly("J", &IterationRecord::J)
        .def_readonly("J_next", &IterationRecord::J_next)
        .def_readonly("res_norm", &IterationRecord::res_norm)
        .def_readonly("step_norm", &IterationRecord::step_norm)
        .def_readonly("e_norm", &IterationRecord::e_norm)
        .def_readonly("theta_norm", &IterationRecord::theta_norm)
        .def_readonly("delta_norm", &IterationRecord::delta_norm)
        .def_readonly("descent_lhs", &IterationRecord::descent_lhs)
        .def_readonly("descent_rhs", &IterationRecord::descent_rhs)
        .def_readonly("sup", &IterationRecord::sup);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("records", &RunReport::records)
        .def_readonly("final_x", &RunReport::final_x)
        .def_readonly("final_J", &RunReport::final_J)
        .def_readonly("final_res_norm", &RunReport::final_res_norm)
        .def_readonly("iterations", &RunReport::iterations)
        .def_property_readonly("termination", [](const RunReport& r) { return to_string(r.termination); })
        .def_readonly("L", &RunReport::L)
        .def_readonly("mu", &RunReport::mu)
        .def_readonly("eta1", &RunReport::eta1)
        .def_readonly("eta2", &RunReport::eta2)
        .def_readonly("c_omega", &RunReport::c_omega)
        .def_readonly("final_tv", &RunReport::final_tv)
        .def_readonly("baseline_tv", &RunReport::baseline_tv)
        .def_readonly("baseline_distance", &RunReport::baseline_distance)
        .def_readonly("certificates", &RunReport::certificates)
        .def("all_certificates_ok", &RunReport::all_certificates_ok)
        .def("report_json", [](const RunReport& r) { return report_json(r); })
        .def("trace_csv", [](const RunReport& r) {
            TraceMeta meta;
            meta.L = r.L;
            meta.mu = r.mu;
            meta.J_star = r.J_star;
            meta.c_omega = r.c_omega;
            meta.superiorized = r.c_omega.has_value();
            meta.n = r.final_x.size();
            meta.final_x = r.final_x;
            return trace_csv(r, meta);
        });

    m.def("project", [](const FeasibleSet& set, const Vector& x) { return project(set, x); }, py::arg("set"),
          py::arg("x"));
    m.def("residual", &residual, py::arg("model"), py::arg("set"), py::arg("x"));
    m.def("psg_step", &psg_step, py::arg("model"), py::arg("set"), py::arg("strategy"), py::arg("tau"),
          py::arg("x"), py::arg("e"));

    m.def(
        "run",
        [](const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
           const StepsizePolicy& policy, const OuterPerturbationPlan& plan, const Vector& x0, double res_tol,
           std::size_t max_iters, std::optional<Vector> x_star, std::optional<double> J_star) {
            py::gil_scoped_release release;
            return run(model, set, strategy, policy, plan, x0, make_run_options(res_tol, max_iters, x_star, J_star));
        },
        py::arg("model"), py::arg("set"), py::arg("strategy"), py::arg("policy"), py::arg("plan"), py::arg("x0"),
        py::arg("res_tol") = 1e-8, py::arg("max_iters") = 100000, py::arg("x_star") = py::none(),
        py::arg("J_star") = py::none());

    m.def(
        "run_superiorized",
        [](const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
           const StepsizePolicy& policy, const InnerPerturbationPlan& plan, const Vector& x0,
           std::optional<std::pair<Eigen::Index, Eigen::Index>> image, bool compare, double res_tol,
           std::size_t max_iters, std::optional<Vector> x_star, std::optional<double> J_star) {
            std::optional<TvTarget> target;
            if (image) {
                TvTarget t;
                t.width = image->first;
                t.height = image->second;
                target = t;
            } else {
                target = TvTarget::square_for(model.dimension());
            }
            SuperiorizeOptions opts;
            opts.run = make_run_options(res_tol, max_iters, x_star, J_star);
            opts.compare = compare;
            return run_superiorized(model, set, strategy, policy, plan, target, x0, opts);
        },
        py::arg("model"), py::arg("set"), py::arg("strategy"), py::arg("policy"), py::arg("plan"), py::arg("x0"),
        py::arg("image") = py::none(), py::arg("compare") = false, py::arg("res_tol") = 1e-8,
        py::arg("max_iters") = 100000, py::arg("x_star") = py::none(), py::arg("J_star") = py::none());

    m.def("inner_to_outer", &inner_to_outer, py::arg("model"), py::arg("strategy"), py::arg("tau"), py::arg("x"),
          py::arg("beta"), py::arg("v"));
    m.def("c_omega_bound", &c_omega_bound, py::arg("model"), py::arg("set"), py::arg("strategy"),
          py::arg("v_bar"));

    py::class_<OracleSolution>(m, "OracleSolution")
        .def_readonly("x_star", &OracleSolution::x_star)
        .def_readonly("J_star", &OracleSolution::J_star)
        .def_readonly("residual", &OracleSolution::residual)
        .def_property_readonly("method", [](const OracleSolution& s) { return to_string(s.method); });
    m.def(
        "solve_reference",
        [](const ObjectiveModel& model, const FeasibleSet& set) { return solve_reference(model, set); },
        py::arg("model"), py::arg("set"));
    m.def("bruteforce_em_trace",
          [](const ObjectiveModel& model, const Vector& x0, std::size_t steps) {
              return bruteforce_em_trace(model.system(), x0, steps);
          },
          py::arg("model"), py::arg("x0"), py::arg("steps"));

    m.def("certificate_names", &certificate_names);
}

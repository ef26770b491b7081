#include "psg/commands.hpp"

#include <filesystem>
#include <future>
#include <iomanip>
#include <ostream>

#include "psg/certificates.hpp"
#include "psg/error.hpp"
#include "psg/trace_io.hpp"

namespace psg {

namespace {

TraceMeta meta_for(const RunReport& r, const ExperimentConfig& c, bool superiorized, bool e_analytic) {
    TraceMeta m;
    m.L = r.L;
    m.mu = r.mu;
    m.J_star = r.J_star;
    m.c_omega = r.c_omega;
    m.plateau_frac = c.plateau_frac;
    m.e_analytic = e_analytic;
    m.superiorized = superiorized;
    m.n = r.final_x.size();
    m.final_x = r.final_x;
    return m;
}

int exit_code(const RunReport& r) {
    if (r.termination == Termination::domain_error) return exit_domain_error;
    if (r.termination != Termination::residual_tol || !r.all_certificates_ok()) return exit_not_certified;
    return exit_ok;
}

void print_summary(std::ostream& out, const RunReport& r) {
    out << "termination: " << to_string(r.termination) << " after " << r.iterations
        << " iterations\n";
    if (!r.termination_detail.empty()) out << "detail: " << r.termination_detail << "\n";
    if (r.x0_projected) out << "note: x0 was outside the set and has been projected\n";
    out << "final J: " << format_double(r.final_J) << "\n";
    out << "final ||r||: " << format_double(r.final_res_norm) << "\n";
    out << "L = " << format_double(r.L) << ", mu = " << format_double(r.mu)
        << ", eta1 = " << format_double(r.eta1) << ", eta2 = " << format_double(r.eta2) << "\n";
    if (r.c_omega) out << "C_Omega = " << format_double(*r.c_omega) << "\n";
    if (r.final_tv) out << "final TV: " << format_double(*r.final_tv) << "\n";
    if (r.baseline_tv) out << "baseline TV: " << format_double(*r.baseline_tv) << "\n";
    if (r.baseline_distance)
        out << "distance to baseline: " << format_double(*r.baseline_distance) << "\n";
    for (const auto& [name, v] : r.certificates) out << verdict_line(name, v) << "\n";
}

RunReport execute(const ExperimentConfig& c, const Experiment& e, bool compare) {
    const RunOptions opts = run_options(c, e);
    const auto& p = e.problem;
    if (c.inner) {
        SuperiorizeOptions so;
        so.run = opts;
        so.compare = compare;
        return run_superiorized(p.model, p.set, e.strategy, e.policy, c.inner_plan, e.target, e.x0, so);
    }
    return run(p.model, p.set, e.strategy, e.policy, c.outer, e.x0, opts);
}

std::string sibling(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    const std::string stem = p.stem().string();
    p.replace_filename(stem + "_" + suffix + p.extension().string());
    return p.string();
}

} // namespace

int cmd_run(const ExperimentConfig& c, std::ostream& out) {
    const Experiment e = build_experiment(c);
    const RunReport r = execute(c, e, c.compare);
    write_trace_csv(c.trace_path, r, meta_for(r, c, c.inner, !c.inner && c.outer.analytic_summable()));
    write_report_json(c.report_path, r);
    print_summary(out, r);
    out << "trace: " << c.trace_path << "\nreport: " << c.report_path << "\n";
    return exit_code(r);
}

int cmd_superiorize(ExperimentConfig c, std::ostream& out) {
    c.inner = true;
    return cmd_run(c, out);
}

int cmd_compare(ExperimentConfig c, std::ostream& out) {
    c.inner = true;
    const Experiment e = build_experiment(c);
    ExperimentConfig base_cfg = c;
    base_cfg.inner = false;
    base_cfg.outer = OuterPerturbationPlan::none();

    auto base_future = std::async(std::launch::async, [&] { return execute(base_cfg, e, false); });
    RunReport sup = execute(c, e, false);
    const RunReport base = base_future.get();

    sup.baseline_iterations = base.iterations;
    sup.baseline_distance = (base.final_x - sup.final_x).norm();
    if (e.target) sup.baseline_tv = tv_value(*e.target, base.final_x);

    const std::string base_trace = sibling(c.trace_path, "baseline");
    const std::string sup_trace = sibling(c.trace_path, "superiorized");
    write_trace_csv(base_trace, base, meta_for(base, c, false, true));
    write_trace_csv(sup_trace, sup, meta_for(sup, c, true, false));
    write_report_json(sibling(c.report_path, "baseline"), base);
    write_report_json(c.report_path, sup);

    auto row = [&](const char* name, const RunReport& r) {
        out << std::left << std::setw(14) << name << std::setw(12) << r.iterations
            << std::setw(26) << format_double(r.final_J) << std::setw(26)
            << format_double(r.final_res_norm) << std::setw(26)
            << (e.target ? format_double(tv_value(*e.target, r.final_x)) : std::string("-"))
            << to_string(r.termination) << "\n";
    };
    out << std::left << std::setw(14) << "variant" << std::setw(12) << "iterations" << std::setw(26)
        << "final J" << std::setw(26) << "final ||r||" << std::setw(26) << "final TV"
        << "termination\n";
    row("baseline", base);
    row("superiorized", sup);
    out << "distance between final iterates: " << format_double(*sup.baseline_distance) << "\n";
    for (const auto& [name, v] : sup.certificates) out << verdict_line(name, v) << "\n";
    out << "traces: " << base_trace << ", " << sup_trace << "\nreport: " << c.report_path << "\n";

    const int a = exit_code(base), b = exit_code(sup);
    if (a == exit_domain_error || b == exit_domain_error) return exit_domain_error;
    return a == exit_ok && b == exit_ok ? exit_ok : exit_not_certified;
}

int cmd_certify(const ExperimentConfig& c, std::ostream& out) {
    const Trace trace = read_trace_csv(c.trace_path);
    const Experiment e = build_experiment(c);
    if (e.problem.model.dimension() != trace.meta.n)
        fail(ErrorCode::parse_error, "trace dimension does not match the configured problem");

    CertificationContext ctx;
    ctx.L = trace.meta.L;
    ctx.mu = trace.meta.mu;
    ctx.plateau_frac = trace.meta.plateau_frac;
    ctx.e_analytic = trace.meta.e_analytic;
    ctx.J_star = trace.meta.J_star;
    if (e.oracle) ctx.x_star = e.oracle->x_star;
    ctx.model = &e.problem.model;
    ctx.set = &e.problem.set;
    if (trace.meta.final_x.size() == trace.meta.n) ctx.final_x = trace.meta.final_x;
    ctx.selection = c.certificates;
    ctx.inner_geometric = trace.meta.superiorized;
    const auto verdicts = certify_records(trace.records, ctx);

    out << "replayed " << trace.records.size() << " iterations from " << c.trace_path << "\n";
    bool ok = true;
    for (const auto& [name, v] : verdicts) {
        out << verdict_line(name, v) << "\n";
        ok = ok && !v.failed();
    }
    return ok ? exit_ok : exit_not_certified;
}

int cmd_gen_problem(const ExperimentConfig& c, std::ostream& out) {
    const GeneratedProblem p = make_test_problem(c.problem, c.set);
    const auto& sys = p.model.system();
    const std::filesystem::path dir(c.out_dir);
    std::filesystem::create_directories(dir);
    write_matrix_csv((dir / "A.csv").string(), sys.A());
    write_matrix_csv((dir / "b.csv").string(), sys.b());
    if (c.problem.weight != WeightKind::identity) write_matrix_csv((dir / "W.csv").string(), sys.W());
    if (p.x_true) write_matrix_csv((dir / "x_true.csv").string(), *p.x_true);
    out << "problem: " << c.problem.canonical() << "\n";
    out << "set: " << to_string(p.set.kind()) << "\n";
    out << "L = " << format_double(p.model.L()) << ", mu = " << format_double(p.model.mu()) << "\n";
    out << "wrote " << (dir / "A.csv").string() << " and " << (dir / "b.csv").string() << "\n";
    return exit_ok;
}

int run_command(const std::string& name, const ConfigValues& values, std::ostream& out,
                std::ostream& err) {
    try {
        const ExperimentConfig c = parse_config(values);
        if (name == "run") return cmd_run(c, out);
        if (name == "superiorize") return cmd_superiorize(c, out);
        if (name == "compare") return cmd_compare(c, out);
        if (name == "certify") return cmd_certify(c, out);
        if (name == "gen-problem") return cmd_gen_problem(c, out);
        err << "error: unknown command '" << name << "'\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::domain_violation ? exit_domain_error : exit_usage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace psg

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "psg/certificates.hpp"
#include "psg/error.hpp"
#include "psg/oracle.hpp"
#include "psg/superiorize.hpp"
#include "psg/trace_io.hpp"
#include "support.hpp"

using namespace psg;

namespace {

struct Fixture {
    GeneratedProblem problem;
    OracleSolution oracle;
    RunReport report;
    TraceMeta meta;
};

Fixture plain_run() {
    auto p = make_test_problem({ObjectiveKind::weighted_ls, 16, 8, 21, false, 20.0});
    auto sol = solve_reference(p.model, p.set);
    RunOptions opts;
    opts.x_star = sol.x_star;
    opts.J_star = sol.J_star;
    auto rep = run(p.model, p.set, ScalingStrategy::identity(),
                   StepsizePolicy::constant(1.0 / p.model.L()),
                   OuterPerturbationPlan::summable_random(0.5, 0.9, 4), Vector::Zero(8), opts);
    TraceMeta meta;
    meta.L = rep.L;
    meta.mu = rep.mu;
    meta.J_star = sol.J_star;
    meta.e_analytic = true;
    meta.n = 8;
    meta.final_x = rep.final_x;
    return {std::move(p), std::move(sol), std::move(rep), std::move(meta)};
}

CertificationContext replay_context(const Fixture& f, const Trace& t) {
    CertificationContext ctx;
    ctx.L = t.meta.L;
    ctx.mu = t.meta.mu;
    ctx.plateau_frac = t.meta.plateau_frac;
    ctx.e_analytic = t.meta.e_analytic;
    ctx.J_star = t.meta.J_star;
    ctx.x_star = f.oracle.x_star;
    ctx.model = &f.problem.model;
    ctx.set = &f.problem.set;
    ctx.final_x = t.meta.final_x;
    ctx.inner_geometric = t.meta.superiorized;
    return ctx;
}

} // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        const std::string s = format_double(v);
        EXPECT_EQ(std::stod(s), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(TraceCsv, RoundTripIsExact) {
    const auto f = plain_run();
    const auto t = parse_trace_csv(trace_csv(f.report, f.meta));
    ASSERT_EQ(t.records.size(), f.report.records.size());
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        const auto& a = t.records[k];
        const auto& b = f.report.records[k];
        EXPECT_EQ(a.k, b.k);
        EXPECT_EQ(a.J, b.J);
        EXPECT_EQ(a.J_next, b.J_next);
        EXPECT_EQ(a.delta_norm, b.delta_norm);
        EXPECT_EQ(a.x, b.x);
    }
    EXPECT_EQ(t.meta.final_x, f.report.final_x);
    EXPECT_EQ(t.meta.J_star, f.meta.J_star);
    EXPECT_EQ(trace_csv(f.report, t.meta), trace_csv(f.report, f.meta));
}

TEST(TraceCsv, ReplayGivesLiveVerdicts) {
    const auto f = plain_run();
    const auto t = parse_trace_csv(trace_csv(f.report, f.meta));
    EXPECT_EQ(certify_records(t.records, replay_context(f, t)), f.report.certificates);
}

TEST(TraceCsv, SuperiorizedColumnsRoundTrip) {
    SetSpec box;
    box.kind = "box";
    box.lower = 0.0;
    box.upper = 2.0;
    const auto p = make_test_problem({ObjectiveKind::weighted_ls, 18, 9, 5, false, 20.0}, box);
    const auto rep = run_superiorized(p.model, p.set, ScalingStrategy::identity(),
                                      StepsizePolicy::constant(1.0 / p.model.L()), InnerPerturbationPlan{},
                                      TvTarget::square_for(9), Vector::Constant(9, 1.0));
    TraceMeta meta;
    meta.L = rep.L;
    meta.mu = rep.mu;
    meta.c_omega = rep.c_omega;
    meta.superiorized = true;
    meta.n = 9;
    meta.final_x = rep.final_x;
    const auto text = trace_csv(rep, meta);
    std::istringstream lines(text);
    std::string l;
    std::getline(lines, l);
    std::getline(lines, l);
    std::getline(lines, l);
    EXPECT_EQ(l.substr(0, 130).find("lambda,beta,applied,tv,e_bound,x_0") != std::string::npos, true);
    const auto t = parse_trace_csv(text);
    ASSERT_EQ(t.records.size(), rep.records.size());
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        ASSERT_TRUE(t.records[k].sup.has_value());
        EXPECT_EQ(t.records[k].sup->tv, rep.records[k].sup->tv);
        EXPECT_EQ(t.records[k].sup->e_bound, rep.records[k].sup->e_bound);
        EXPECT_EQ(t.records[k].sup->applied, rep.records[k].sup->applied);
    }
    CertificationContext ctx;
    ctx.L = t.meta.L;
    ctx.mu = t.meta.mu;
    ctx.model = &p.model;
    ctx.set = &p.set;
    ctx.final_x = t.meta.final_x;
    ctx.inner_geometric = true;
    EXPECT_EQ(certify_records(t.records, ctx), rep.certificates);
}

TEST(TraceCsv, CorruptedValueIsCaughtAtItsRow) {
    const auto f = plain_run();
    std::istringstream in(trace_csv(f.report, f.meta));
    std::ostringstream out;
    std::string line;
    int row = -3;
    const std::size_t target = 12;
    while (std::getline(in, line)) {
        if (row == static_cast<int>(target)) {
            auto cells = std::vector<std::string>();
            std::stringstream ss(line);
            std::string c;
            while (std::getline(ss, c, ',')) cells.push_back(c);
            cells[3] = format_double(std::stod(cells[2]) + 10.0);
            line.clear();
            for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
        }
        out << line << "\n";
        ++row;
    }
    const auto t = parse_trace_csv(out.str());
    const auto verdicts = certify_records(t.records, replay_context(f, t));
    EXPECT_TRUE(verdicts.at("descent").failed());
    EXPECT_EQ(verdicts.at("descent").k, target);
}

TEST(TraceCsv, Rejections) {
    const auto f = plain_run();
    const std::string good = trace_csv(f.report, f.meta);
    const auto code_of = [](const std::string& text) {
        try {
            parse_trace_csv(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::invalid_argument;
    };
    EXPECT_EQ(code_of("# psg-trace v0,n=8\n"), ErrorCode::parse_error);
    EXPECT_EQ(code_of(""), ErrorCode::parse_error);

    const auto header_end = good.find('\n', good.find('\n', good.find('\n') + 1) + 1);
    EXPECT_EQ(code_of(good.substr(0, header_end + 1)), ErrorCode::parse_error);

    std::string renamed = good;
    renamed.replace(renamed.find("res_norm"), 8, "res_nrm_");
    EXPECT_EQ(code_of(renamed), ErrorCode::parse_error);

    EXPECT_EQ(code_of(good + "1,2,3\n"), ErrorCode::parse_error);
}

TEST(VerdictLine, Format) {
    EXPECT_EQ(verdict_line("descent", Verdict::pass()), "descent: pass");
    EXPECT_EQ(verdict_line("descent", Verdict::fail(3, "x")), "descent: fail at k=3 (x)");
}

TEST(ReportJson, ContainsEveryCertificate) {
    const auto f = plain_run();
    const std::string json = report_json(f.report);
    for (const auto& name : certificate_names()) EXPECT_NE(json.find("\"" + name + "\""), std::string::npos);
    EXPECT_NE(json.find("\"termination\": \"residual-tol\""), std::string::npos);
}

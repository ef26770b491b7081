#include "psg/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "psg/certificates.hpp"
#include "psg/error.hpp"

namespace psg {

const char* to_string(Termination t) {
    switch (t) {
    case Termination::residual_tol: return "residual-tol";
    case Termination::max_iters: return "max-iters";
    case Termination::stall: return "stall";
    case Termination::domain_error: return "domain-error";
    }
    return "unknown";
}

const char* to_string(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::analytic_pass: return "analytic-pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::not_applicable: return "not-applicable";
    }
    return "unknown";
}

Verdict Verdict::pass(std::string detail) { return {VerdictStatus::pass, std::nullopt, std::move(detail)}; }
Verdict Verdict::analytic_pass(std::string detail) {
    return {VerdictStatus::analytic_pass, std::nullopt, std::move(detail)};
}
Verdict Verdict::fail(std::size_t k, std::string detail) { return {VerdictStatus::fail, k, std::move(detail)}; }
Verdict Verdict::fail(std::string detail) { return {VerdictStatus::fail, std::nullopt, std::move(detail)}; }
Verdict Verdict::not_applicable(std::string detail) {
    return {VerdictStatus::not_applicable, std::nullopt, std::move(detail)};
}

bool RunReport::all_certificates_ok() const {
    return std::none_of(certificates.begin(), certificates.end(),
                        [](const auto& kv) { return kv.second.failed(); });
}

// ---------------------------------------------------------------------------

StepsizePolicy::StepsizePolicy(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) fail(ErrorCode::invalid_argument, "stepsize schedule is empty");
    for (double t : taus_)
        if (!(t > 0.0) || !std::isfinite(t))
            fail(ErrorCode::invalid_argument, "stepsizes must be positive and finite");
}

StepsizePolicy StepsizePolicy::constant(double tau) { return StepsizePolicy({tau}); }

StepsizePolicy StepsizePolicy::schedule(std::vector<double> taus) {
    return StepsizePolicy(std::move(taus));
}

double StepsizePolicy::at(std::size_t k) const { return taus_[std::min(k, taus_.size() - 1)]; }

double StepsizePolicy::tau_inf() const { return *std::min_element(taus_.begin(), taus_.end()); }

double StepsizePolicy::tau_sup() const { return *std::max_element(taus_.begin(), taus_.end()); }

void StepsizePolicy::validate(double L) const {
    if (!(L > 0.0)) fail(ErrorCode::invalid_argument, "Lipschitz constant L must be positive");
    if (!(tau_sup() < 2.0 / L)) {
        std::ostringstream msg;
        msg << "stepsize bound 0 < tau_k < 2/L violated: sup tau_k = " << tau_sup()
            << " >= 2/L = " << 2.0 / L;
        fail(ErrorCode::invalid_argument, msg.str());
    }
}

// ---------------------------------------------------------------------------

OuterPerturbationPlan OuterPerturbationPlan::none() { return {}; }

OuterPerturbationPlan OuterPerturbationPlan::summable_random(double c, double rho,
                                                             std::uint64_t seed) {
    if (!(c >= 0.0) || !(rho > 0.0 && rho < 1.0))
        fail(ErrorCode::invalid_argument, "summable-random plan needs c >= 0 and 0 < rho < 1");
    OuterPerturbationPlan p;
    p.kind = OuterPlanKind::summable_random;
    p.c = c;
    p.rho = rho;
    p.seed = seed;
    return p;
}

OuterPerturbationPlan OuterPerturbationPlan::explicit_list(std::vector<Vector> list) {
    OuterPerturbationPlan p;
    p.kind = OuterPlanKind::explicit_list;
    p.list = std::move(list);
    return p;
}

std::string OuterPerturbationPlan::describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
    case OuterPlanKind::none: return "none";
    case OuterPlanKind::summable_random:
        out << "summable-random(c=" << c << ",rho=" << rho << ",seed=" << seed << ")";
        return out.str();
    case OuterPlanKind::explicit_list:
        out << "explicit(" << list.size() << ")";
        return out.str();
    }
    return "unknown";
}

OuterPerturbationSource::OuterPerturbationSource(const OuterPerturbationPlan& plan, Eigen::Index n)
    : plan_(plan), n_(n), state_(plan.seed) {}

Vector OuterPerturbationSource::next(std::size_t k) {
    switch (plan_.kind) {
    case OuterPlanKind::none: return Vector::Zero(n_);
    case OuterPlanKind::explicit_list:
        if (k < plan_.list.size()) {
            if (plan_.list[k].size() != n_)
                fail(ErrorCode::invalid_argument, "explicit perturbation has wrong dimension");
            return plan_.list[k];
        }
        return Vector::Zero(n_);
    case OuterPlanKind::summable_random: {
        // Engine keyed by (seed, k).
        std::seed_seq seq{static_cast<std::uint32_t>(state_), static_cast<std::uint32_t>(state_ >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector u(n_);
        double norm = 0.0;
        while (norm == 0.0) {
            for (Eigen::Index j = 0; j < n_; ++j) u(j) = normal(rng);
            norm = u.norm();
        }
        return (plan_.c * std::pow(plan_.rho, static_cast<double>(k)) / norm) * u;
    }
    }
    return Vector::Zero(n_);
}

// ---------------------------------------------------------------------------

Vector psg_step(const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
                double tau, const Vector& x, const Vector& e) {
    if (e.size() != x.size()) fail(ErrorCode::invalid_argument, "perturbation has wrong dimension");
    const Vector g = model.gradient(x);
    return set.project(x - tau * apply_scaling(strategy, x, g) + e);
}

namespace detail {

RunReport drive(const ObjectiveModel& model, const FeasibleSet& set,
                const ScalingStrategy& strategy, const StepsizePolicy& policy, const Vector& x0,
                const RunOptions& opts, const StepFunction& step) {
    if (x0.size() != model.dimension() || set.dimension() != model.dimension())
        fail(ErrorCode::invalid_argument, "x0, model and set dimensions must agree");
    if (opts.enforce_step_bound) policy.validate(model.L());

    RunReport report;
    report.L = model.L();
    report.mu = model.mu();
    report.scaling = to_string(strategy.kind());
    report.J_star = opts.J_star;
    if (!report.J_star && opts.x_star) report.J_star = model.value(*opts.x_star);

    Vector x = x0;
    if (!set.contains(x)) {
        x = set.project(x);
        report.x0_projected = true;
    }

    report.final_x = x;
    report.final_J = std::numeric_limits<double>::quiet_NaN();
    report.final_res_norm = std::numeric_limits<double>::quiet_NaN();

    std::size_t stalled = 0;
    std::optional<double> J_cached;
    try {
        for (std::size_t k = 0;; ++k) {
            const Vector g = model.gradient(x);
            const double res = (x - set.project(x - g)).norm();
            const double Jx = J_cached ? *J_cached : model.value(x);
            report.final_x = x;
            report.final_J = Jx;
            report.final_res_norm = res;
            report.iterations = k;
            if (res <= opts.res_tol) {
                report.termination = Termination::residual_tol;
                break;
            }
            if (k >= opts.max_iters) {
                report.termination = Termination::max_iters;
                break;
            }

            const double tau = policy.at(k);
            const Vector scaled = apply_scaling(strategy, x, g);
            StepOutcome out = step(k, tau, x, scaled);

            IterationRecord rec;
            rec.k = k;
            rec.tau = tau;
            if (opts.record_iterates) rec.x = x;
            rec.J = Jx;
            rec.J_next = model.value(out.x_next);
            rec.res_norm = res;
            rec.step_norm = (x - out.x_next).norm();
            rec.e_norm = out.e.norm();
            const Vector theta = g - scaled;
            rec.theta_norm = theta.norm();
            rec.delta_norm = (out.e / tau + theta).norm();
            rec.descent_lhs = model.value_decrease(x, out.x_next);
            if (report.J_star) rec.lambda = std::sqrt(std::max(0.0, Jx - *report.J_star));
            rec.sup = out.sup;
            J_cached = rec.J_next;
            report.records.push_back(std::move(rec));

            stalled = report.records.back().step_norm < opts.stall_tol ? stalled + 1 : 0;
            x = std::move(out.x_next);
            if (stalled >= opts.stall_iters) {
                report.final_x = x;
                report.final_J = *J_cached;
                report.final_res_norm = residual(model, set, x).norm();
                report.iterations = k + 1;
                report.termination = Termination::stall;
                break;
            }
        }
    } catch (const Error& err) {
        if (err.code() != ErrorCode::domain_violation) throw;
        report.termination = Termination::domain_error;
        report.termination_detail = err.what();
    }

    if (!report.records.empty()) {
        report.tau_sup = 0.0;
        report.tau_inf = std::numeric_limits<double>::infinity();
        for (const auto& r : report.records) {
            report.tau_sup = std::max(report.tau_sup, r.tau);
            report.tau_inf = std::min(report.tau_inf, r.tau);
        }
    } else {
        report.tau_sup = report.tau_inf = policy.at(0);
    }
    report.eta1 = descent_constant(report.tau_sup, report.L);
    report.eta2 = residual_constant(report.tau_inf);
    for (auto& r : report.records)
        r.descent_rhs = report.eta1 * r.step_norm * r.step_norm - r.delta_norm * r.step_norm;
    return report;
}

} // namespace detail

RunReport run(const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
              const StepsizePolicy& policy, const OuterPerturbationPlan& plan, const Vector& x0,
              const RunOptions& opts) {
    OuterPerturbationSource source(plan, model.dimension());
    auto step = [&](std::size_t k, double tau, const Vector& x, const Vector& scaled) {
        detail::StepOutcome out;
        out.e = source.next(k);
        out.x_next = set.project(x - tau * scaled + out.e);
        return out;
    };
    RunReport report = detail::drive(model, set, strategy, policy, x0, opts, step);
    report.plan = plan.describe();

    CertificationContext ctx;
    ctx.L = model.L();
    ctx.mu = model.mu();
    ctx.plateau_frac = opts.plateau_frac;
    ctx.e_analytic = plan.analytic_summable();
    ctx.J_star = report.J_star;
    ctx.x_star = opts.x_star;
    ctx.model = &model;
    ctx.set = &set;
    ctx.final_x = report.final_x;
    ctx.selection = opts.certificates;
    report.certificates = certify_records(report.records, ctx);
    return report;
}

} // namespace psg

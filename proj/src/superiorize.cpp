#include "psg/superiorize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "psg/certificates.hpp"
#include "psg/error.hpp"

namespace psg {

namespace {

void check_shape(const TvTarget& t, const Vector& x) {
    if (t.width <= 0 || t.height <= 0 || t.width * t.height != x.size()) {
        std::ostringstream msg;
        msg << "TV grid " << t.width << "x" << t.height << " does not match n = " << x.size();
        fail(ErrorCode::invalid_argument, msg.str());
    }
}

constexpr int kMaxHalvings = 50;

} // namespace

std::optional<TvTarget> TvTarget::square_for(Eigen::Index n) {
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side <= 0 || side * side != n) return std::nullopt;
    return TvTarget{side, side};
}

double tv_value(const TvTarget& t, const Vector& x) {
    check_shape(t, x);
    const Eigen::Index w = t.width;
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < t.height; ++i) {
        for (Eigen::Index j = 0; j + 1 < w; ++j) {
            const double c = x(i * w + j);
            const double dv = x((i + 1) * w + j) - c;
            const double dh = x(i * w + j + 1) - c;
            total += std::sqrt(dv * dv + dh * dh);
        }
    }
    return total;
}

Vector tv_smoothed_gradient(const TvTarget& t, const Vector& x) {
    check_shape(t, x);
    const Eigen::Index w = t.width;
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i + 1 < t.height; ++i) {
        for (Eigen::Index j = 0; j + 1 < w; ++j) {
            const Eigen::Index p = i * w + j;
            const double dv = x(p + w) - x(p);
            const double dh = x(p + 1) - x(p);
            const double norm = std::sqrt(dv * dv + dh * dh + t.eps);
            g(p) -= (dv + dh) / norm;
            g(p + w) += dv / norm;
            g(p + 1) += dh / norm;
        }
    }
    return g;
}

Vector tv_direction(const TvTarget& t, const Vector& x) {
    const Vector g = tv_smoothed_gradient(t, x);
    const double norm = g.norm();
    if (norm <= 1e-12) return Vector::Zero(x.size());
    return -g / norm;
}

double InnerPerturbationPlan::beta(std::size_t k) const {
    return beta_a * std::pow(beta_gamma, static_cast<double>(k));
}

void InnerPerturbationPlan::validate() const {
    if (!(beta_a >= 0.0) || !std::isfinite(beta_a))
        fail(ErrorCode::invalid_argument, "beta-a must be a nonnegative number");
    if (!(beta_gamma > 0.0 && beta_gamma < 1.0))
        fail(ErrorCode::invalid_argument, "beta-gamma must lie in (0, 1)");
    if (!(v_bar >= 0.0) || !std::isfinite(v_bar))
        fail(ErrorCode::invalid_argument, "vbar must be a nonnegative number");
    if (source == DirectionSource::callback && !callback)
        fail(ErrorCode::invalid_argument, "callback direction source without a callback");
}

SuperiorizedStep superiorized_step(const ObjectiveModel& model, const FeasibleSet& set,
                                   const ScalingStrategy& strategy, double tau, const Vector& x,
                                   double beta, const Vector& v, InfeasibleRule rule) {
    if (v.size() != x.size()) fail(ErrorCode::invalid_argument, "direction has wrong dimension");
    if (!(beta >= 0.0)) fail(ErrorCode::invalid_argument, "beta must be nonnegative");
    SuperiorizedStep out;
    double b = beta;
    Vector y = x + b * v;
    bool inside = set.contains(y, 0.0);
    for (int h = 0; !inside && rule == InfeasibleRule::halve && h < kMaxHalvings; ++h) {
        b *= 0.5;
        y = x + b * v;
        inside = set.contains(y, 0.0);
    }
    if (!inside) {
        y = x;
        b = 0.0;
    }
    out.applied = inside;
    out.beta_used = b;
    out.x_next = set.project(y - tau * apply_scaling(strategy, y, model.gradient(y)));
    return out;
}

Vector inner_to_outer(const ObjectiveModel& model, const ScalingStrategy& strategy, double tau,
                      const Vector& x, double beta, const Vector& v) {
    const Vector y = x + beta * v;
    return beta * v + tau * (apply_scaling(strategy, x, model.gradient(x)) -
                             apply_scaling(strategy, y, model.gradient(y)));
}

double c_omega_bound(const ObjectiveModel& model, const FeasibleSet& set,
                     const ScalingStrategy& strategy, double v_bar) {
    if (!set.bounded()) fail(ErrorCode::not_applicable, "C_Omega needs a bounded feasible set");
    if (!(v_bar >= 0.0)) fail(ErrorCode::invalid_argument, "vbar must be nonnegative");
    const Vector& x_omega = set.reference_point();
    const double r_omega = set.enclosing_radius();
    const double d_norm = scaling_frobenius_norms(strategy, x_omega).scaling;
    double factor = d_norm;
    if (strategy.kind() == ScalingKind::em_diagonal) {
        factor = d_norm * (model.gradient(x_omega).norm() / model.L() + x_omega.norm() + 2.0 * r_omega);
    }
    return v_bar + 2.0 * v_bar * factor;
}

RunReport run_superiorized(const ObjectiveModel& model, const FeasibleSet& set,
                           const ScalingStrategy& strategy, const StepsizePolicy& policy,
                           const InnerPerturbationPlan& plan, const std::optional<TvTarget>& target,
                           const Vector& x0, const SuperiorizeOptions& opts) {
    plan.validate();
    const Eigen::Index n = model.dimension();
    if (plan.source == DirectionSource::tv_descent && !target)
        fail(ErrorCode::invalid_argument, "tv-descent directions need a TV target");
    if (target) check_shape(*target, Vector::Zero(n));
    if (plan.source == DirectionSource::fixed_vector && plan.fixed.size() != n)
        fail(ErrorCode::invalid_argument, "fixed direction has wrong dimension");

    std::optional<double> c_omega;
    if (set.bounded()) c_omega = c_omega_bound(model, set, strategy, plan.v_bar);

    auto direction = [&](std::size_t k, const Vector& x) -> Vector {
        Vector d;
        switch (plan.source) {
        case DirectionSource::tv_descent: return plan.v_bar * tv_direction(*target, x);
        case DirectionSource::fixed_vector: d = plan.fixed; break;
        case DirectionSource::callback: d = plan.callback(k, x); break;
        }
        if (d.size() != n) fail(ErrorCode::invalid_argument, "direction has wrong dimension");
        const double norm = d.norm();
        if (norm > plan.v_bar) d *= plan.v_bar / norm;
        return d;
    };

    auto step = [&](std::size_t k, double tau, const Vector& x, const Vector& scaled) {
        const Vector v = direction(k, x);
        const SuperiorizedStep s = superiorized_step(model, set, strategy, tau, x, plan.beta(k), v,
                                                     plan.infeasible);
        detail::StepOutcome out;
        out.x_next = s.x_next;
        SuperiorizationInfo info;
        info.beta = s.beta_used;
        info.applied = s.applied;
        info.tv = target ? tv_value(*target, x) : std::numeric_limits<double>::quiet_NaN();
        info.e_bound = c_omega ? *c_omega * s.beta_used : std::numeric_limits<double>::quiet_NaN();
        if (s.applied) {
            out.e = inner_to_outer(model, strategy, tau, x, s.beta_used, v);
            const Vector rebuilt = set.project(x - tau * scaled + out.e);
            info.reconstruction_gap = (rebuilt - s.x_next).norm();
        } else {
            out.e = Vector::Zero(n);
        }
        out.sup = info;
        return out;
    };

    RunReport report = detail::drive(model, set, strategy, policy, x0, opts.run, step);
    std::ostringstream desc;
    desc.precision(17);
    desc << "inner(beta_a=" << plan.beta_a << ",beta_gamma=" << plan.beta_gamma
         << ",vbar=" << plan.v_bar << ",rule=" << (plan.infeasible == InfeasibleRule::skip ? "skip" : "halve")
         << ")";
    report.plan = desc.str();
    report.c_omega = c_omega;
    if (target) report.final_tv = tv_value(*target, report.final_x);

    CertificationContext ctx;
    ctx.L = model.L();
    ctx.mu = model.mu();
    ctx.plateau_frac = opts.run.plateau_frac;
    ctx.J_star = report.J_star;
    ctx.x_star = opts.run.x_star;
    ctx.model = &model;
    ctx.set = &set;
    ctx.final_x = report.final_x;
    ctx.selection = opts.run.certificates;
    ctx.inner_geometric = true;
    report.certificates = certify_records(report.records, ctx);

    if (opts.compare) {
        RunOptions base = opts.run;
        base.certificates = {"feasibility"};
        const RunReport baseline =
            run(model, set, strategy, policy, OuterPerturbationPlan::none(), x0, base);
        report.baseline_iterations = baseline.iterations;
        report.baseline_distance = (baseline.final_x - report.final_x).norm();
        if (target) report.baseline_tv = tv_value(*target, baseline.final_x);
    }
    return report;
}

} // namespace psg

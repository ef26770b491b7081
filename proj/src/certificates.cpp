#include "psg/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "psg/error.hpp"

namespace psg {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

bool selected(const CertificationContext& ctx, const std::string& name) {
    return ctx.selection.empty() ||
           std::find(ctx.selection.begin(), ctx.selection.end(), name) != ctx.selection.end();
}

// First failing record, or pass.
template <class Check>
Verdict over_records(const std::vector<IterationRecord>& records, Check check) {
    bool any_applicable = false;
    std::string na_detail;
    for (const auto& rec : records) {
        Verdict v = check(rec);
        if (v.failed()) return v;
        if (v.status == VerdictStatus::not_applicable) {
            na_detail = v.detail;
            continue;
        }
        any_applicable = true;
    }
    if (!any_applicable && !records.empty()) return Verdict::not_applicable(na_detail);
    return Verdict::pass();
}

} // namespace

const std::vector<std::string>& certificate_names() {
    static const std::vector<std::string> names = {
        "descent",        "residual-bound", "step-bound",        "error-bound",
        "quasi-fejer",    "summability-e",  "summability-theta", "summability-step",
        "feasibility",    "e-bound",
    };
    return names;
}

double descent_constant(double tau_sup, double L) { return 1.0 / tau_sup - 0.5 * L; }

double residual_constant(double tau_inf) { return 1.0 / std::min(1.0, tau_inf); }

Verdict certify_descent(const IterationRecord& rec, double eta1) {
    if (!(eta1 > 0.0))
        return Verdict::not_applicable("eta1 = " + fmt(eta1) + " <= 0: stepsize too aggressive");
    const double rhs = eta1 * rec.step_norm * rec.step_norm - rec.delta_norm * rec.step_norm;
    const double lhs = rec.descent_lhs;
    const double recorded = rec.J - rec.J_next;
    const double drift = kCertificateSlack + 1e-12 * std::max({1.0, std::abs(rec.J), std::abs(rec.J_next)});
    if (!(std::abs(recorded - lhs) <= drift))
        return Verdict::fail(rec.k, "J(x^k)-J(x^k+1) = " + fmt(recorded) +
                                        " disagrees with the recorded decrease " + fmt(lhs));
    if (lhs >= rhs - kCertificateSlack) return Verdict::pass();
    return Verdict::fail(rec.k, "J(x^k)-J(x^k+1) = " + fmt(lhs) + " < " + fmt(rhs));
}

Verdict certify_residual_bound(const IterationRecord& rec, double eta2) {
    const double bound = eta2 * (rec.step_norm + rec.e_norm + rec.theta_norm);
    if (rec.res_norm <= bound + kCertificateSlack) return Verdict::pass();
    return Verdict::fail(rec.k, "||r|| = " + fmt(rec.res_norm) + " > " + fmt(bound));
}

Verdict certify_step_bound(const IterationRecord& rec, double eta1) {
    if (!(eta1 > 0.0)) return Verdict::not_applicable("eta1 <= 0");
    const double bound = std::sqrt(2.0 / eta1) * std::sqrt(std::abs(rec.descent_lhs)) +
                         rec.delta_norm / eta1;
    if (rec.step_norm <= bound + kCertificateSlack) return Verdict::pass();
    return Verdict::fail(rec.k, "step " + fmt(rec.step_norm) + " > " + fmt(bound));
}

Verdict certify_error_bound(const ObjectiveModel& model, const FeasibleSet& set, const Vector& x,
                            const Vector& x_star) {
    if (!(model.mu() > 0.0)) return Verdict::not_applicable("mu = 0: no global error bound");
    const double dist = (x - x_star).norm();
    const double res = residual(model, set, x).norm();
    const double bound = (model.L() + 1.0) / model.mu() * res;
    if (dist <= bound + kCertificateSlack) return Verdict::pass();
    return Verdict::fail("||x-x*|| = " + fmt(dist) + " > " + fmt(bound));
}

Verdict certify_summability(std::span<const double> series, double plateau_frac, bool analytic) {
    if (analytic) return Verdict::analytic_pass("summable by construction");
    const double total = std::accumulate(series.begin(), series.end(), 0.0);
    if (total == 0.0) return Verdict::pass("identically zero");
    const std::size_t n = series.size();
    const std::size_t tail = (n + 4) / 5;
    const double growth = std::accumulate(series.end() - static_cast<std::ptrdiff_t>(tail),
                                          series.end(), 0.0);
    if (growth < plateau_frac * total) return Verdict::pass();
    return Verdict::fail(n - tail, "partial sums grew by " + fmt(growth / total * 100.0) +
                                       "% of the total over the last 20% of terms");
}

Verdict certify_quasi_fejer(std::span<const double> values, std::span<const double> epsilons) {
    if (values.empty()) return Verdict::pass();
    if (epsilons.size() + 1 != values.size())
        fail(ErrorCode::invalid_argument, "quasi-Fejer needs one epsilon per transition");
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] < -kCertificateSlack)
            return Verdict::fail(k, "J(x^k) - J* = " + fmt(values[k]) + " < 0");
        if (k + 1 < values.size() && values[k + 1] > values[k] + epsilons[k] + kCertificateSlack)
            return Verdict::fail(k, "value grew beyond the quasi-Fejer allowance");
    }
    const std::size_t tail = (values.size() + 4) / 5;
    const auto first = values.end() - static_cast<std::ptrdiff_t>(tail);
    const auto [lo, hi] = std::minmax_element(first, values.end());
    const double tol = std::max(kCertificateSlack, 1e-6 * std::max(1.0, scale));
    if (*hi - *lo <= tol) return Verdict::pass();
    return Verdict::fail(values.size() - tail,
                         "values still oscillate by " + fmt(*hi - *lo) + " in the tail");
}

std::map<std::string, Verdict> certify_records(const std::vector<IterationRecord>& records,
                                               const CertificationContext& ctx) {
    std::map<std::string, Verdict> out;
    double tau_sup = 0.0, tau_inf = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        tau_sup = std::max(tau_sup, r.tau);
        tau_inf = std::min(tau_inf, r.tau);
    }
    const bool have = !records.empty();
    const double eta1 = have ? descent_constant(tau_sup, ctx.L) : 0.0;
    const double eta2 = have ? residual_constant(tau_inf) : 1.0;

    if (selected(ctx, "descent"))
        out["descent"] = over_records(records, [&](const auto& r) { return certify_descent(r, eta1); });
    if (selected(ctx, "residual-bound"))
        out["residual-bound"] =
            over_records(records, [&](const auto& r) { return certify_residual_bound(r, eta2); });
    if (selected(ctx, "step-bound"))
        out["step-bound"] =
            over_records(records, [&](const auto& r) { return certify_step_bound(r, eta1); });

    if (selected(ctx, "error-bound")) {
        if (!ctx.model || !ctx.set || !ctx.x_star) {
            out["error-bound"] = Verdict::not_applicable("no oracle solution");
        } else if (!(ctx.model->mu() > 0.0)) {
            out["error-bound"] = Verdict::not_applicable("mu = 0: no global error bound");
        } else {
            Verdict v = Verdict::not_applicable("no iterates recorded");
            for (const auto& r : records) {
                if (r.x.size() == 0) continue;
                v = certify_error_bound(*ctx.model, *ctx.set, r.x, *ctx.x_star);
                if (v.failed()) {
                    v.k = r.k;
                    break;
                }
            }
            if (!v.failed() && ctx.final_x) {
                v = certify_error_bound(*ctx.model, *ctx.set, *ctx.final_x, *ctx.x_star);
                if (v.failed()) v.k = records.size();
            }
            out["error-bound"] = v;
        }
    }

    if (selected(ctx, "quasi-fejer")) {
        if (!ctx.J_star) {
            out["quasi-fejer"] = Verdict::not_applicable("J* unavailable");
        } else if (have && !(eta1 > 0.0)) {
            out["quasi-fejer"] = Verdict::not_applicable("eta1 <= 0");
        } else {
            std::vector<double> values, eps;
            for (const auto& r : records) {
                values.push_back(r.J - *ctx.J_star);
                eps.push_back(r.delta_norm * r.delta_norm / (4.0 * eta1));
            }
            if (have) values.push_back(records.back().J_next - *ctx.J_star);
            out["quasi-fejer"] = certify_quasi_fejer(values, eps);
        }
    }

    std::vector<double> e, theta, step;
    for (const auto& r : records) {
        e.push_back(r.e_norm);
        theta.push_back(r.theta_norm);
        step.push_back(r.step_norm);
    }
    if (selected(ctx, "summability-e"))
        out["summability-e"] = certify_summability(e, ctx.plateau_frac, ctx.e_analytic);
    if (selected(ctx, "summability-theta"))
        out["summability-theta"] = certify_summability(theta, ctx.plateau_frac);
    if (selected(ctx, "summability-step"))
        out["summability-step"] = certify_summability(step, ctx.plateau_frac);

    if (selected(ctx, "feasibility")) {
        if (!ctx.set) {
            out["feasibility"] = Verdict::not_applicable("no feasible set");
        } else {
            Verdict v = Verdict::pass();
            for (const auto& r : records) {
                if (r.x.size() != 0 && distance_to_set(*ctx.set, r.x) > 1e-12) {
                    v = Verdict::fail(r.k, "iterate outside the feasible set");
                    break;
                }
            }
            if (!v.failed() && ctx.final_x && distance_to_set(*ctx.set, *ctx.final_x) > 1e-12)
                v = Verdict::fail(records.size(), "final iterate outside the feasible set");
            out["feasibility"] = v;
        }
    }

    if (selected(ctx, "e-bound")) {
        const bool superiorized = std::any_of(records.begin(), records.end(),
                                              [](const auto& r) { return r.sup.has_value(); });
        Verdict v = Verdict::pass();
        if (!superiorized) {
            v = Verdict::not_applicable("not a superiorized run");
        } else {
            for (const auto& r : records) {
                if (!r.sup || !r.sup->applied) continue;
                if (std::isnan(r.sup->e_bound)) {
                    v = Verdict::not_applicable("C_Omega unavailable");
                    break;
                }
                if (r.e_norm > r.sup->e_bound + kCertificateSlack) {
                    v = Verdict::fail(r.k, "||e^k|| = " + fmt(r.e_norm) +
                                               " > C_Omega beta_k = " + fmt(r.sup->e_bound));
                    break;
                }
            }
        }
        out["e-bound"] = v;
        if (ctx.inner_geometric && v.status == VerdictStatus::pass && out.count("summability-e"))
            out["summability-e"] = Verdict::analytic_pass("dominated by C_Omega beta_k, beta geometric");
    }
    return out;
}

} // namespace psg

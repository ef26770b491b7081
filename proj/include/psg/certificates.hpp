#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psg/core.hpp"

namespace psg {

/// Names of every run-level certificate, in report order.
const std::vector<std::string>& certificate_names();

/// eta1 = 1/tau_sup - L/2 (descent inequality constant).
double descent_constant(double tau_sup, double L);
/// eta2 = 1/min{1, tau_inf} (residual bound constant).
double residual_constant(double tau_inf);

/// J(x^k) - J(x^{k+1}) >= eta1 ||x^k - x^{k+1}||^2 - ||delta^k|| ||x^k - x^{k+1}||.
Verdict certify_descent(const IterationRecord& record, double eta1);

/// ||r(x^k)|| <= eta2 (||x^k - x^{k+1}|| + ||e^k|| + ||theta^k||).
Verdict certify_residual_bound(const IterationRecord& record, double eta2);

/// ||x^k - x^{k+1}|| <= sqrt(2/eta1) |J(x^k) - J(x^{k+1})|^{1/2} + ||delta^k|| / eta1.
Verdict certify_step_bound(const IterationRecord& record, double eta1);

/// ||x - x*|| <= ((L+1)/mu) ||r(x)||; not-applicable when mu = 0.
Verdict certify_error_bound(const ObjectiveModel& model, const FeasibleSet& set, const Vector& x,
                            const Vector& x_star);

/// Partial sums over the last 20% of the series grow by less than
/// plateau_frac of the total. `analytic` marks series summable by construction.
Verdict certify_summability(std::span<const double> series, double plateau_frac = 0.01,
                            bool analytic = false);

/// values[k] = J(x^k) - J*, k = 0..N; epsilons[k] = ||delta^k||^2 / (4 eta1), k < N.
/// Checks 0 <= values[k+1] <= values[k] + epsilons[k] and convergence of the tail.
Verdict certify_quasi_fejer(std::span<const double> values, std::span<const double> epsilons);

/// Everything the run-level evaluation needs besides the records.
struct CertificationContext {
    double L = 0.0;
    double mu = 0.0;
    double plateau_frac = 0.01;
    bool e_analytic = false;
    std::optional<double> J_star;
    std::optional<Vector> x_star;
    /// Enables error-bound and feasibility checks on recorded iterates.
    const ObjectiveModel* model = nullptr;
    const FeasibleSet* set = nullptr;
    /// Residual at the terminal iterate, for error-bound at the final point.
    std::optional<Vector> final_x;
    std::vector<std::string> selection;
    /// Superiorized run with geometric beta: summability-e is analytic once e-bound passes.
    bool inner_geometric = false;
};

/// Evaluates the selected certificates over a finished run's records.
std::map<std::string, Verdict> certify_records(const std::vector<IterationRecord>& records,
                                               const CertificationContext& ctx);

} // namespace psg

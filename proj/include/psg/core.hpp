#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psg/geometry.hpp"
#include "psg/problems.hpp"
#include "psg/scaling.hpp"
#include "psg/types.hpp"

namespace psg {

/// Stepsizes tau_k. A schedule shorter than the run repeats its last entry.
class StepsizePolicy {
public:
    static StepsizePolicy constant(double tau);
    static StepsizePolicy schedule(std::vector<double> taus);

    double at(std::size_t k) const;
    double tau_inf() const;
    double tau_sup() const;
    const std::vector<double>& taus() const noexcept { return taus_; }

    /// Enforces 0 < inf tau_k <= sup tau_k < 2/L; throws invalid-argument.
    void validate(double L) const;

private:
    explicit StepsizePolicy(std::vector<double> taus);
    std::vector<double> taus_;
};

enum class OuterPlanKind { none, summable_random, explicit_list };

/// Outer perturbations e^k added inside the projection.
struct OuterPerturbationPlan {
    OuterPlanKind kind = OuterPlanKind::none;
    double c = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;
    /// Used by explicit_list; steps past the end get e^k = 0.
    std::vector<Vector> list;

    static OuterPerturbationPlan none();
    /// e^k = c rho^k u^k with u^k uniform on the unit sphere, 0 < rho < 1.
    static OuterPerturbationPlan summable_random(double c, double rho, std::uint64_t seed);
    static OuterPerturbationPlan explicit_list(std::vector<Vector> list);

    /// Summable by construction (geometric series or identically zero).
    bool analytic_summable() const { return kind != OuterPlanKind::explicit_list; }
    std::string describe() const;
};

/// Seeded generator for the e^k of a plan.
class OuterPerturbationSource {
public:
    OuterPerturbationSource(const OuterPerturbationPlan& plan, Eigen::Index n);
    Vector next(std::size_t k);

private:
    const OuterPerturbationPlan& plan_;
    Eigen::Index n_;
    std::uint64_t state_;
};

struct SuperiorizationInfo {
    /// Effective beta_k (0 when the perturbation was skipped).
    double beta = 0.0;
    bool applied = false;
    /// phi(x^k).
    double tv = 0.0;
    /// C_Omega * beta_k, NaN when C_Omega is unavailable.
    double e_bound = 0.0;
    /// ||P(x - tau D grad J + e) - x_next||, the inner/outer reconstruction gap.
    double reconstruction_gap = 0.0;
};

struct IterationRecord {
    std::size_t k = 0;
    double tau = 0.0;
    /// x^k; empty when iterates are not recorded.
    Vector x;
    double J = 0.0;
    double J_next = 0.0;
    double res_norm = 0.0;
    double step_norm = 0.0;
    double e_norm = 0.0;
    double theta_norm = 0.0;
    double delta_norm = 0.0;
    double descent_lhs = 0.0;
    double descent_rhs = 0.0;
    std::optional<double> lambda;
    std::optional<SuperiorizationInfo> sup;
};

enum class Termination { residual_tol, max_iters, stall, domain_error };
const char* to_string(Termination t);

enum class VerdictStatus { pass, analytic_pass, fail, not_applicable };
const char* to_string(VerdictStatus s);

struct Verdict {
    VerdictStatus status = VerdictStatus::not_applicable;
    std::optional<std::size_t> k;
    std::string detail;

    bool failed() const noexcept { return status == VerdictStatus::fail; }
    bool passed() const noexcept {
        return status == VerdictStatus::pass || status == VerdictStatus::analytic_pass;
    }
    static Verdict pass(std::string detail = {});
    static Verdict analytic_pass(std::string detail = {});
    static Verdict fail(std::size_t k, std::string detail);
    static Verdict fail(std::string detail);
    static Verdict not_applicable(std::string detail);

    bool operator==(const Verdict&) const = default;
};

struct RunOptions {
    double res_tol = 1e-8;
    std::size_t max_iters = 100000;
    std::size_t stall_iters = 50;
    double stall_tol = 1e-15;
    double plateau_frac = 0.01;
    bool record_iterates = true;
    bool enforce_step_bound = true;
    /// Oracle data; certificates needing them are not-applicable otherwise.
    std::optional<Vector> x_star;
    std::optional<double> J_star;
    /// Certificate names to evaluate; empty selects all.
    std::vector<std::string> certificates;
};

struct RunReport {
    std::vector<IterationRecord> records;
    Vector final_x;
    double final_J = 0.0;
    double final_res_norm = 0.0;
    std::size_t iterations = 0;
    Termination termination = Termination::max_iters;
    std::string termination_detail;
    bool x0_projected = false;

    double L = 0.0;
    double mu = 0.0;
    double tau_sup = 0.0;
    double tau_inf = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    std::string plan;
    std::string scaling;
    std::optional<double> J_star;

    std::optional<double> c_omega;
    std::optional<double> final_tv;
    /// Filled by superiorized runs with comparison requested.
    std::optional<double> baseline_tv;
    std::optional<std::size_t> baseline_iterations;
    std::optional<double> baseline_distance;

    std::map<std::string, Verdict> certificates;

    bool all_certificates_ok() const;
};

/// x^{k+1} = P(x - tau D(x) grad J(x) + e).
Vector psg_step(const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
                double tau, const Vector& x, const Vector& e);

RunReport run(const ObjectiveModel& model, const FeasibleSet& set, const ScalingStrategy& strategy,
              const StepsizePolicy& policy, const OuterPerturbationPlan& plan, const Vector& x0,
              const RunOptions& opts = {});

namespace detail {

struct StepOutcome {
    Vector x_next;
    /// Outer perturbation, actual or equivalent.
    Vector e;
    std::optional<SuperiorizationInfo> sup;
};

using StepFunction = std::function<StepOutcome(std::size_t k, double tau, const Vector& x,
                                               const Vector& scaled_gradient)>;

/// Shared iteration loop: termination, diagnostics, constants. Certificates
/// are evaluated by the caller.
RunReport drive(const ObjectiveModel& model, const FeasibleSet& set,
                const ScalingStrategy& strategy, const StepsizePolicy& policy, const Vector& x0,
                const RunOptions& opts, const StepFunction& step);

} // namespace detail

} // namespace psg

#pragma once

#include <functional>
#include <optional>

#include "psg/core.hpp"

namespace psg {

/// Isotropic total variation of x reshaped row-major to height x width
/// (x[i * width + j] is pixel (i, j)).
struct TvTarget {
    Eigen::Index width = 0;
    Eigen::Index height = 0;
    double eps = 1e-8;

    /// Square grid when n is a perfect square.
    static std::optional<TvTarget> square_for(Eigen::Index n);
};

double tv_value(const TvTarget& target, const Vector& x);

/// Gradient of the smoothed TV, sum sqrt(dv^2 + dh^2 + eps).
Vector tv_smoothed_gradient(const TvTarget& target, const Vector& x);

/// -g / ||g|| for the smoothed TV gradient g, or zero when ||g|| <= 1e-12.
Vector tv_direction(const TvTarget& target, const Vector& x);

enum class DirectionSource { tv_descent, fixed_vector, callback };

/// What to do when x + beta v leaves the set.
enum class InfeasibleRule { skip, halve };

struct InnerPerturbationPlan {
    /// beta_k = beta_a * beta_gamma^k.
    double beta_a = 0.99;
    double beta_gamma = 0.995;
    DirectionSource source = DirectionSource::tv_descent;
    Vector fixed;
    std::function<Vector(std::size_t k, const Vector& x)> callback;
    /// Emitted directions are rescaled so that ||v^k|| <= v_bar.
    double v_bar = 1.0;
    InfeasibleRule infeasible = InfeasibleRule::skip;

    double beta(std::size_t k) const;
    void validate() const;
};

struct SuperiorizedStep {
    Vector x_next;
    bool applied = false;
    /// beta actually used; 0 when skipped.
    double beta_used = 0.0;
};

/// One step of P(y - tau D(y) grad J(y)) with y = x + beta v, falling back to
/// the unperturbed step when y is outside the set.
SuperiorizedStep superiorized_step(const ObjectiveModel& model, const FeasibleSet& set,
                                   const ScalingStrategy& strategy, double tau, const Vector& x,
                                   double beta, const Vector& v,
                                   InfeasibleRule rule = InfeasibleRule::skip);

/// e = beta v + tau (D(x) grad J(x) - D(x + beta v) grad J(x + beta v)).
Vector inner_to_outer(const ObjectiveModel& model, const ScalingStrategy& strategy, double tau,
                      const Vector& x, double beta, const Vector& v);

/// C_Omega with ||e^k|| <= C_Omega beta_k. Throws not-applicable on unbounded sets.
double c_omega_bound(const ObjectiveModel& model, const FeasibleSet& set,
                     const ScalingStrategy& strategy, double v_bar);

struct SuperiorizeOptions {
    RunOptions run;
    /// Also run the unperturbed method and report TV and distance side by side.
    bool compare = false;
};

RunReport run_superiorized(const ObjectiveModel& model, const FeasibleSet& set,
                           const ScalingStrategy& strategy, const StepsizePolicy& policy,
                           const InnerPerturbationPlan& plan, const std::optional<TvTarget>& target,
                           const Vector& x0, const SuperiorizeOptions& opts = {});

} // namespace psg

#pragma once

#include "psg/problems.hpp"
#include "psg/types.hpp"

namespace psg {

enum class ScalingKind { identity, constant_diagonal, em_diagonal };

const char* to_string(ScalingKind kind);

/// Diagonal scaling D(x): identity, D_LS = diag{1/s_j}, or the state-dependent
/// D_KL(x) = diag{x_j / shat_j} (D_EM when shat_j are the column sums of A).
class ScalingStrategy {
public:
    static ScalingStrategy identity();
    static ScalingStrategy constant_diagonal(Vector s);
    static ScalingStrategy em_diagonal(Vector shat);
    /// EM scaling with shat_j = sum_i a^i_j.
    static ScalingStrategy em_for(const LinearSystem& system);

    ScalingKind kind() const noexcept { return kind_; }
    /// s for constant-diagonal, shat for em-diagonal, empty for identity.
    const Vector& weights() const noexcept { return weights_; }

    /// Diagonal of D(x).
    Vector diagonal(const Vector& x) const;

private:
    ScalingStrategy() = default;

    ScalingKind kind_ = ScalingKind::identity;
    Vector weights_;
};

Vector apply_scaling(const ScalingStrategy& strategy, const Vector& x, const Vector& g);

/// theta = g - D(x) g.
Vector deviation(const ScalingStrategy& strategy, const Vector& x, const Vector& g);

struct FrobeniusNorms {
    /// ||D_LS||_F, or ||Dhat||_F for the EM form; sqrt(n) for the identity.
    double scaling = 0.0;
    /// ||X||_F = ||x||.
    double state = 0.0;
};

FrobeniusNorms scaling_frobenius_norms(const ScalingStrategy& strategy, const Vector& x);

} // namespace psg

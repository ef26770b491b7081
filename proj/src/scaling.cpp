#include "psg/scaling.hpp"

#include "psg/error.hpp"

namespace psg {

namespace {

void require_positive(const Vector& w, const char* name) {
    if (w.size() == 0) fail(ErrorCode::invalid_strategy, std::string(name) + " is empty");
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (!(w(j) > 0.0) || !std::isfinite(w(j)))
            fail(ErrorCode::invalid_strategy, std::string(name) + "_" + std::to_string(j) +
                                                  " must be a positive finite number");
    }
}

void check_dims(const ScalingStrategy& s, const Vector& x, const Vector& g) {
    if (x.size() != g.size()) fail(ErrorCode::invalid_argument, "scaling: x and g differ in size");
    if (s.kind() != ScalingKind::identity && s.weights().size() != x.size())
        fail(ErrorCode::invalid_argument, "scaling: strategy dimension does not match x");
}

} // namespace

const char* to_string(ScalingKind kind) {
    switch (kind) {
    case ScalingKind::identity: return "identity";
    case ScalingKind::constant_diagonal: return "ls";
    case ScalingKind::em_diagonal: return "em";
    }
    return "unknown";
}

ScalingStrategy ScalingStrategy::identity() { return {}; }

ScalingStrategy ScalingStrategy::constant_diagonal(Vector s) {
    require_positive(s, "s");
    ScalingStrategy out;
    out.kind_ = ScalingKind::constant_diagonal;
    out.weights_ = std::move(s);
    return out;
}

ScalingStrategy ScalingStrategy::em_diagonal(Vector shat) {
    require_positive(shat, "shat");
    ScalingStrategy out;
    out.kind_ = ScalingKind::em_diagonal;
    out.weights_ = std::move(shat);
    return out;
}

ScalingStrategy ScalingStrategy::em_for(const LinearSystem& system) {
    return em_diagonal(system.column_sums());
}

Vector ScalingStrategy::diagonal(const Vector& x) const {
    switch (kind_) {
    case ScalingKind::identity: return Vector::Ones(x.size());
    case ScalingKind::constant_diagonal: return weights_.cwiseInverse();
    case ScalingKind::em_diagonal:
        if ((x.array() < 0.0).any())
            fail(ErrorCode::invalid_argument, "em-diagonal scaling requires x >= 0");
        return x.cwiseQuotient(weights_);
    }
    return {};
}

Vector apply_scaling(const ScalingStrategy& strategy, const Vector& x, const Vector& g) {
    check_dims(strategy, x, g);
    switch (strategy.kind()) {
    case ScalingKind::identity: return g;
    case ScalingKind::constant_diagonal: return g.cwiseQuotient(strategy.weights());
    case ScalingKind::em_diagonal:
        return strategy.diagonal(x).cwiseProduct(g);
    }
    return g;
}

Vector deviation(const ScalingStrategy& strategy, const Vector& x, const Vector& g) {
    if (strategy.kind() == ScalingKind::identity) {
        check_dims(strategy, x, g);
        return Vector::Zero(g.size());
    }
    return g - apply_scaling(strategy, x, g);
}

FrobeniusNorms scaling_frobenius_norms(const ScalingStrategy& strategy, const Vector& x) {
    FrobeniusNorms out;
    out.state = x.norm();
    switch (strategy.kind()) {
    case ScalingKind::identity: out.scaling = std::sqrt(static_cast<double>(x.size())); break;
    case ScalingKind::constant_diagonal:
    case ScalingKind::em_diagonal: out.scaling = strategy.weights().cwiseInverse().norm(); break;
    }
    return out;
}

} // namespace psg

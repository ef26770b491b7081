#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "psg/geometry.hpp"
#include "psg/problems.hpp"

namespace psg::testing {

inline ObjectiveModel ls_model(Matrix A, Vector b, Matrix W = Matrix()) {
    LinearSystem sys(std::move(A), std::move(b), std::move(W));
    return ObjectiveModel::weighted_ls(std::move(sys));
}

/// J(x) = 0.5 q (x - a)^2 in one dimension.
inline ObjectiveModel scalar_quadratic(double q, double a) {
    Matrix Q(1, 1);
    Q << q;
    Vector c(1);
    c << q * a;
    return ObjectiveModel::quadratic(Q, c, 0.5 * q * a * a);
}

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out(i++) = d;
    return out;
}

/// Central differences, step scaled to the coordinate.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
    Vector g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        g(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline Vector gaussian(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(n);
    for (Eigen::Index j = 0; j < n; ++j) v(j) = nd(rng);
    return v;
}

inline Vector uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Vector v(n);
    for (Eigen::Index j = 0; j < n; ++j) v(j) = ud(rng);
    return v;
}

/// Dykstra's alternating projections onto {y : G y <= h}; converges to the
/// Euclidean projection.
inline Vector dykstra_projection(const Matrix& G, const Vector& h, const Vector& x,
                                 int sweeps = 20000) {
    const Eigen::Index m = G.rows();
    Vector y = x;
    Matrix incr = Matrix::Zero(x.size(), m);
    for (int s = 0; s < sweeps; ++s) {
        const Vector before = y;
        for (Eigen::Index i = 0; i < m; ++i) {
            const Vector z = y + incr.col(i);
            const Vector g = G.row(i).transpose();
            const double viol = g.dot(z) - h(i);
            const Vector p = viol > 0.0 ? Vector(z - viol / g.squaredNorm() * g) : z;
            incr.col(i) = z - p;
            y = p;
        }
        if ((y - before).norm() < 1e-15 && s > 10) break;
    }
    return y;
}

/// Smoothed isotropic TV on a row-major height x width grid.
inline double smoothed_tv(const Vector& x, Eigen::Index width, Eigen::Index height, double eps) {
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < height; ++i)
        for (Eigen::Index j = 0; j + 1 < width; ++j) {
            const double c = x(i * width + j);
            const double dv = x((i + 1) * width + j) - c;
            const double dh = x(i * width + j + 1) - c;
            total += std::sqrt(dv * dv + dh * dh + eps);
        }
    return total;
}

/// Random member of a bounded set or of the orthant.
inline Vector random_member(const FeasibleSet& set, std::mt19937_64& rng) {
    const Eigen::Index n = set.dimension();
    switch (set.kind()) {
    case SetKind::nonneg_orthant: return uniform(rng, n, 0.0, 3.0);
    case SetKind::box: {
        Vector lo = set.lower().cwiseMax(-5.0), hi = set.upper().cwiseMin(5.0);
        Vector u = uniform(rng, n, 0.0, 1.0);
        return lo.array() + u.array() * (hi - lo).array();
    }
    default: return set.project(gaussian(rng, n, 2.0));
    }
}

} // namespace psg::testing

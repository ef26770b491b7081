#include "psg/geometry.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "psg/error.hpp"
#include "psg/problems.hpp"

namespace psg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dimension(const FeasibleSet& set, const Vector& x, const char* what) {
    if (x.size() != set.dimension()) {
        fail(ErrorCode::invalid_argument,
             std::string(what) + ": expected dimension " + std::to_string(set.dimension()) +
                 ", got " + std::to_string(x.size()));
    }
}

// Euclidean projection onto {y : G y <= h} with the dual active-set method of
// Goldfarb and Idnani specialised to the identity Hessian. Constraints are
// handled in the form n_i'y >= c_i with n_i = -g_i, c_i = -h_i. Returns nullopt
// when the polyhedron is empty.
std::optional<Vector> project_polyhedron(const Matrix& G, const Vector& h, const Vector& x) {
    const Eigen::Index n = x.size();
    const Eigen::Index m = G.rows();
    Vector y = x;
    std::vector<Eigen::Index> active;
    std::vector<double> u;

    auto slack = [&](Eigen::Index i) { return h(i) - G.row(i).dot(y); };

    const Eigen::Index max_outer = 10 * (m + n) + 100;
    for (Eigen::Index outer = 0; outer < max_outer; ++outer) {
        // Most violated constraint, normalised by the row norm.
        Eigen::Index p = -1;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double gnorm = G.row(i).norm();
            if (gnorm == 0.0) continue;
            const double tol = 1e-14 * std::max({1.0, std::abs(h(i)), gnorm * y.norm()});
            const double s = slack(i);
            if (s < -tol && s / gnorm < worst) {
                worst = s / gnorm;
                p = i;
            }
        }
        if (p < 0) return y;

        const Vector np = -G.row(p).transpose();
        std::vector<double> u_plus = u;
        u_plus.push_back(0.0);

        for (Eigen::Index inner = 0; inner <= m + n + 1; ++inner) {
            const auto q = static_cast<Eigen::Index>(active.size());
            Vector z = np;
            Vector r(q);
            if (q > 0) {
                Matrix N(n, q);
                for (Eigen::Index j = 0; j < q; ++j) N.col(j) = -G.row(active[j]).transpose();
                r = (N.transpose() * N).ldlt().solve(N.transpose() * np);
                z -= N * r;
            }

            double t1 = kInf;
            Eigen::Index drop = -1;
            for (Eigen::Index j = 0; j < q; ++j) {
                if (r(j) > 0.0) {
                    const double val = u_plus[j] / r(j);
                    if (val < t1) {
                        t1 = val;
                        drop = j;
                    }
                }
            }
            double t2 = kInf;
            if (z.norm() > 1e-12 * np.norm()) {
                // In the >= form the violation of constraint p is h_p - g_p'y.
                t2 = -slack(p) / z.dot(np);
                t2 = std::max(t2, 0.0);
            }
            if (t1 == kInf && t2 == kInf) return std::nullopt;

            const double t = std::min(t1, t2);
            if (t2 < kInf) y += t * z;
            for (Eigen::Index j = 0; j < q; ++j) u_plus[j] -= t * r(j);
            u_plus[q] += t;

            if (t2 <= t1) {
                active.push_back(p);
                u = u_plus;
                break;
            }
            active.erase(active.begin() + drop);
            u_plus.erase(u_plus.begin() + drop);
        }
    }
    fail(ErrorCode::unsupported_configuration, "polyhedral projection did not terminate");
}

} // namespace

const char* to_string(SetKind kind) {
    switch (kind) {
    case SetKind::nonneg_orthant: return "orthant";
    case SetKind::box: return "box";
    case SetKind::ball: return "ball";
    case SetKind::halfspaces: return "halfspaces";
    }
    return "unknown";
}

FeasibleSet FeasibleSet::orthant(Eigen::Index n) {
    if (n <= 0) fail(ErrorCode::invalid_argument, "orthant dimension must be positive");
    FeasibleSet s;
    s.kind_ = SetKind::nonneg_orthant;
    s.n_ = n;
    s.lower_ = Vector::Zero(n);
    s.upper_ = Vector::Constant(n, kInf);
    return s;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
        fail(ErrorCode::invalid_argument, "box bounds must be nonempty and of equal length");
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j))
            fail(ErrorCode::invalid_argument, "box requires lower <= upper componentwise");
        if (lower(j) == kInf || upper(j) == -kInf)
            fail(ErrorCode::invalid_argument, "box bound is infinite on the wrong side");
    }
    FeasibleSet s;
    s.kind_ = SetKind::box;
    s.n_ = lower.size();
    s.bounded_ = lower.allFinite() && upper.allFinite();
    if (s.bounded_) {
        s.x_omega_ = 0.5 * (lower + upper);
        s.r_omega_ = 0.5 * (upper - lower).norm();
    }
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
    if (center.size() == 0 || !(radius >= 0.0) || !std::isfinite(radius))
        fail(ErrorCode::invalid_argument, "ball requires a center and a finite radius >= 0");
    FeasibleSet s;
    s.kind_ = SetKind::ball;
    s.n_ = center.size();
    s.bounded_ = true;
    s.radius_ = radius;
    s.center_ = std::move(center);
    s.x_omega_ = s.center_;
    s.r_omega_ = radius;
    return s;
}

FeasibleSet FeasibleSet::halfspaces(Matrix G, Vector h) {
    if (G.rows() != h.size() || G.cols() == 0)
        fail(ErrorCode::invalid_argument, "halfspace normals and offsets disagree in size");
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        if (G.row(i).norm() == 0.0 && h(i) <= 0.0)
            fail(ErrorCode::infeasible_set, "degenerate halfspace 0'y <= " + std::to_string(h(i)));
    }
    // Nonempty interior iff a slightly tightened system is still feasible.
    Vector tightened = h;
    double scale = 1.0;
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        const double gnorm = G.row(i).norm();
        if (gnorm > 0.0) scale = std::max(scale, std::abs(h(i)) / gnorm);
    }
    for (Eigen::Index i = 0; i < G.rows(); ++i) tightened(i) -= 1e-9 * scale * G.row(i).norm();
    if (!project_polyhedron(G, tightened, Vector::Zero(G.cols())))
        fail(ErrorCode::infeasible_set, "halfspace intersection has empty interior");

    FeasibleSet s;
    s.kind_ = SetKind::halfspaces;
    s.n_ = G.cols();
    s.G_ = std::move(G);
    s.h_ = std::move(h);
    return s;
}

const Vector& FeasibleSet::reference_point() const {
    if (!bounded_) fail(ErrorCode::not_applicable, "set is unbounded: no x_Omega");
    return x_omega_;
}

double FeasibleSet::enclosing_radius() const {
    if (!bounded_) fail(ErrorCode::not_applicable, "set is unbounded: no r_Omega");
    return r_omega_;
}

Vector FeasibleSet::project(const Vector& x) const {
    check_dimension(*this, x, "project");
    switch (kind_) {
    case SetKind::nonneg_orthant: return x.cwiseMax(0.0);
    case SetKind::box: return x.cwiseMax(lower_).cwiseMin(upper_);
    case SetKind::ball: {
        const Vector d = x - center_;
        const double dist = d.norm();
        if (dist <= radius_) return x;
        return center_ + (radius_ / dist) * d;
    }
    case SetKind::halfspaces: {
        auto y = project_polyhedron(G_, h_, x);
        if (!y) fail(ErrorCode::infeasible_set, "halfspace intersection is empty");
        return *y;
    }
    }
    return x;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
    if (x.size() != n_) return false;
    switch (kind_) {
    case SetKind::nonneg_orthant:
    case SetKind::box:
        return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
    case SetKind::ball: return (x - center_).norm() <= radius_ + tol * std::max(1.0, radius_);
    case SetKind::halfspaces: {
        const Vector s = h_ - G_ * x;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double scale = std::max({1.0, std::abs(h_(i)), G_.row(i).norm() * x.norm()});
            if (s(i) < -tol * scale) return false;
        }
        return true;
    }
    }
    return false;
}

Vector project(const FeasibleSet& set, const Vector& x) { return set.project(x); }

Vector residual(const ObjectiveModel& model, const FeasibleSet& set, const Vector& x) {
    check_dimension(set, x, "residual");
    return x - set.project(x - model.gradient(x));
}

double gafni_ratio(const FeasibleSet& set, const Vector& x, const Vector& d, double t) {
    if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "gafni_ratio requires t > 0");
    check_dimension(set, x, "gafni_ratio");
    check_dimension(set, d, "gafni_ratio direction");
    return (set.project(x + t * d) - x).norm() / t;
}

double distance_to_set(const FeasibleSet& set, const Vector& x) {
    return (x - set.project(x)).norm();
}

} // namespace psg

#pragma once

#include <optional>
#include <string>

#include "psg/types.hpp"

namespace psg {

class ObjectiveModel;

enum class SetKind { nonneg_orthant, box, ball, halfspaces };

const char* to_string(SetKind kind);

/// Closed convex set with an exact Euclidean projection.
///
/// Bounded sets carry a reference point x_Omega and a radius r_Omega with
/// every member inside the ball B(x_Omega, r_Omega). For boxes x_Omega is
/// the center and r_Omega half the diagonal; for balls they are the ball's
/// own center and radius.
class FeasibleSet {
public:
    static FeasibleSet orthant(Eigen::Index n);
    /// Entries of `lower` may be -inf and of `upper` +inf.
    static FeasibleSet box(Vector lower, Vector upper);
    static FeasibleSet ball(Vector center, double radius);
    /// {y : G y <= h}, one halfspace per row of G. Throws infeasible-set
    /// when the intersection has empty interior.
    static FeasibleSet halfspaces(Matrix G, Vector h);

    SetKind kind() const noexcept { return kind_; }
    Eigen::Index dimension() const noexcept { return n_; }
    bool bounded() const noexcept { return bounded_; }

    /// x_Omega and r_Omega; throw not-applicable on unbounded sets.
    const Vector& reference_point() const;
    double enclosing_radius() const;

    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }
    const Vector& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    const Matrix& normals() const noexcept { return G_; }
    const Vector& offsets() const noexcept { return h_; }

    Vector project(const Vector& x) const;
    bool contains(const Vector& x, double tol = 1e-12) const;

private:
    FeasibleSet() = default;

    SetKind kind_ = SetKind::nonneg_orthant;
    Eigen::Index n_ = 0;
    bool bounded_ = false;
    Vector lower_, upper_;
    Vector center_;
    double radius_ = 0.0;
    Matrix G_;
    Vector h_;
    Vector x_omega_;
    double r_omega_ = 0.0;
};

Vector project(const FeasibleSet& set, const Vector& x);

/// r(x) = x - P(x - grad J(x)).
Vector residual(const ObjectiveModel& model, const FeasibleSet& set, const Vector& x);

/// ||P(x + t d) - x|| / t, nonincreasing in t > 0.
double gafni_ratio(const FeasibleSet& set, const Vector& x, const Vector& d, double t);

double distance_to_set(const FeasibleSet& set, const Vector& x);

/// Textual description of a set, as read from configuration.
struct SetSpec {
    /// "auto", "orthant", "box", "ball".
    std::string kind = "auto";
    /// Scalars broadcast to every coordinate; nullopt means "pick default".
    std::optional<double> lower;
    std::optional<double> upper;
    double center = 0.0;
    double radius = 1.0;
};

} // namespace psg

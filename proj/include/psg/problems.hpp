#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "psg/geometry.hpp"
#include "psg/types.hpp"

namespace psg {

/// The linear model Ax = b with weighting W. Rows of A are the vectors a^i.
class LinearSystem {
public:
    LinearSystem() = default;

    /// W defaults to the identity when empty. `kl_compatible` demands
    /// nonnegative A, b and strictly positive column sums.
    LinearSystem(Matrix A, Vector b, Matrix W = Matrix(), bool kl_compatible = false);

    const Matrix& A() const noexcept { return A_; }
    const Vector& b() const noexcept { return b_; }
    const Matrix& W() const noexcept { return W_; }
    bool kl_compatible() const noexcept { return kl_compatible_; }
    Eigen::Index rows() const noexcept { return A_.rows(); }
    Eigen::Index cols() const noexcept { return A_.cols(); }

    /// Column sums sum_i a^i_j.
    Vector column_sums() const { return A_.colwise().sum().transpose(); }

private:
    Matrix A_;
    Vector b_;
    Matrix W_;
    bool kl_compatible_ = false;
};

enum class ObjectiveKind { weighted_ls, kl, custom_quadratic };

const char* to_string(ObjectiveKind kind);

/// Smooth convex objective J with its gradient and the constants L (gradient
/// Lipschitz) and mu (strong convexity) on the feasible set it is paired with.
class ObjectiveModel {
public:
    static ObjectiveModel weighted_ls(LinearSystem system);
    static ObjectiveModel kl(LinearSystem system);
    /// J(x) = 0.5 x'Qx - c'x + offset.
    static ObjectiveModel quadratic(Matrix Q, Vector c, double offset = 0.0);

    ObjectiveKind kind() const noexcept { return kind_; }
    const LinearSystem& system() const noexcept { return system_; }
    Eigen::Index dimension() const noexcept { return n_; }

    double L() const noexcept { return L_; }
    double mu() const noexcept { return mu_; }
    bool strongly_convex() const noexcept { return mu_ > 0.0; }

    /// Copy with overridden constants; requires L >= mu >= 0 and L > 0.
    ObjectiveModel with_constants(double L, double mu) const;

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    /// J(x) - J(y) evaluated in difference form, accurate when x and y are close.
    double value_decrease(const Vector& x, const Vector& y) const;

    const Matrix& quadratic_matrix() const noexcept { return Q_; }
    const Vector& quadratic_linear() const noexcept { return c_; }

private:
    ObjectiveModel() = default;

    ObjectiveKind kind_ = ObjectiveKind::weighted_ls;
    LinearSystem system_;
    Matrix AtW_;
    Matrix Q_;
    Vector c_;
    double offset_ = 0.0;
    Eigen::Index n_ = 0;
    double L_ = 0.0;
    double mu_ = 0.0;
};

double eval_ls(const ObjectiveModel& model, const Vector& x);
Vector grad_ls(const ObjectiveModel& model, const Vector& x);
double eval_kl(const ObjectiveModel& model, const Vector& x);
Vector grad_kl(const ObjectiveModel& model, const Vector& x);

struct Constants {
    double L = 0.0;
    double mu = 0.0;
};

/// Spectral constants for quadratics; interval Hessian bounds for KL on a box.
Constants estimate_constants(const ObjectiveModel& model, const FeasibleSet& set);

enum class WeightKind { identity, random_diagonal };

struct ProblemSpec {
    ObjectiveKind kind = ObjectiveKind::weighted_ls;
    Eigen::Index m = 20;
    Eigen::Index n = 10;
    std::uint64_t seed = 1;
    bool consistent = false;
    /// Target lambda_max / lambda_min of A'WA; 0 leaves A unshaped. LS only.
    double cond = 0.0;
    WeightKind weight = WeightKind::identity;

    /// Canonical text used for hashing and logging.
    std::string canonical() const;
};

struct GeneratedProblem {
    ObjectiveModel model;
    FeasibleSet set;
    /// Known nonnegative solution of Ax = b for consistent instances.
    std::optional<Vector> x_true;
};

/// Set described by a SetSpec; "auto" means the orthant for LS and [0.1, 3]^n for KL.
FeasibleSet build_set(const SetSpec& set_spec, Eigen::Index n, ObjectiveKind objective);

/// Reproducible random instance paired with the set described by `set_spec`
/// (orthant for LS and the box [0.1, 3]^n for KL when the kind is "auto").
GeneratedProblem make_test_problem(const ProblemSpec& spec);
GeneratedProblem make_test_problem(const ProblemSpec& spec, const SetSpec& set_spec);

Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& M);

} // namespace psg

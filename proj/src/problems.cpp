#include "psg/problems.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "psg/error.hpp"

namespace psg {

namespace {

void check_dim(const ObjectiveModel& model, const Vector& x) {
    if (x.size() != model.dimension()) {
        fail(ErrorCode::invalid_argument, "dimension mismatch: model has n=" +
                                              std::to_string(model.dimension()) + ", x has " +
                                              std::to_string(x.size()));
    }
}

void require_kind(const ObjectiveModel& model, ObjectiveKind kind, const char* op) {
    if (model.kind() != kind)
        fail(ErrorCode::invalid_argument,
             std::string(op) + " called on a " + to_string(model.kind()) + " model");
}

// <a^i, x> for every row, rejecting points outside the KL domain.
Vector kl_projections(const LinearSystem& sys, const Vector& x) {
    Vector Ax = sys.A() * x;
    for (Eigen::Index i = 0; i < Ax.size(); ++i) {
        if (sys.b()(i) > 0.0 && !(Ax(i) > 0.0)) {
            throw Error(ErrorCode::domain_violation,
                        "KL requires <a^i,x> > 0 where b_i > 0; row " + std::to_string(i) +
                            " has <a^i,x> = " + std::to_string(Ax(i)),
                        static_cast<std::size_t>(i));
        }
    }
    return Ax;
}

Constants spectral_constants(const Matrix& H) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    double lmin = eig.eigenvalues().minCoeff();
    // Numerically singular normal matrices are reported as not strongly convex.
    if (lmin <= 1e-12 * std::max(lmax, 1.0)) lmin = 0.0;
    return {lmax, lmin};
}

Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix G(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

} // namespace

const char* to_string(ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::weighted_ls: return "ls";
    case ObjectiveKind::kl: return "kl";
    case ObjectiveKind::custom_quadratic: return "quadratic";
    }
    return "unknown";
}

LinearSystem::LinearSystem(Matrix A, Vector b, Matrix W, bool kl_compatible)
    : A_(std::move(A)), b_(std::move(b)), W_(std::move(W)), kl_compatible_(kl_compatible) {
    if (A_.rows() == 0 || A_.cols() == 0) fail(ErrorCode::invalid_argument, "A must be nonempty");
    if (b_.size() != A_.rows())
        fail(ErrorCode::invalid_argument, "b must have one entry per row of A");
    if (W_.size() == 0) W_ = Matrix::Identity(A_.rows(), A_.rows());
    if (W_.rows() != A_.rows() || W_.cols() != A_.rows())
        fail(ErrorCode::invalid_argument, "W must be m x m");
    if (!W_.isApprox(W_.transpose(), 1e-12))
        fail(ErrorCode::invalid_argument, "W must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(W_, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
        fail(ErrorCode::invalid_argument, "W must be positive definite");
    if (kl_compatible_) {
        if ((A_.array() < 0.0).any() || (b_.array() < 0.0).any())
            fail(ErrorCode::invalid_argument, "kl-compatible systems need nonnegative A and b");
        const Vector sums = column_sums();
        for (Eigen::Index j = 0; j < sums.size(); ++j)
            if (!(sums(j) > 0.0))
                fail(ErrorCode::invalid_argument,
                     "kl-compatible systems need positive column sums; column " +
                         std::to_string(j) + " sums to zero");
    }
}

ObjectiveModel ObjectiveModel::weighted_ls(LinearSystem system) {
    ObjectiveModel m;
    m.kind_ = ObjectiveKind::weighted_ls;
    m.n_ = system.cols();
    m.AtW_ = system.A().transpose() * system.W();
    m.system_ = std::move(system);
    return m;
}

ObjectiveModel ObjectiveModel::kl(LinearSystem system) {
    if (!system.kl_compatible())
        fail(ErrorCode::invalid_argument, "KL objective requires a kl-compatible system");
    ObjectiveModel m;
    m.kind_ = ObjectiveKind::kl;
    m.n_ = system.cols();
    m.system_ = std::move(system);
    return m;
}

ObjectiveModel ObjectiveModel::quadratic(Matrix Q, Vector c, double offset) {
    if (Q.rows() != Q.cols() || Q.rows() != c.size() || Q.rows() == 0)
        fail(ErrorCode::invalid_argument, "quadratic needs square Q matching c");
    if (!Q.isApprox(Q.transpose(), 1e-12)) fail(ErrorCode::invalid_argument, "Q must be symmetric");
    ObjectiveModel m;
    m.kind_ = ObjectiveKind::custom_quadratic;
    m.n_ = Q.rows();
    m.Q_ = std::move(Q);
    m.c_ = std::move(c);
    m.offset_ = offset;
    return m;
}

ObjectiveModel ObjectiveModel::with_constants(double L, double mu) const {
    if (!(L > 0.0) || !(mu >= 0.0) || mu > L || !std::isfinite(L))
        fail(ErrorCode::invalid_argument, "constants must satisfy L >= mu >= 0 and L > 0");
    ObjectiveModel copy = *this;
    copy.L_ = L;
    copy.mu_ = mu;
    return copy;
}

double ObjectiveModel::value(const Vector& x) const {
    switch (kind_) {
    case ObjectiveKind::weighted_ls: return eval_ls(*this, x);
    case ObjectiveKind::kl: return eval_kl(*this, x);
    case ObjectiveKind::custom_quadratic:
        check_dim(*this, x);
        return 0.5 * x.dot(Q_ * x) - c_.dot(x) + offset_;
    }
    return 0.0;
}

double ObjectiveModel::value_decrease(const Vector& x, const Vector& y) const {
    check_dim(*this, x);
    check_dim(*this, y);
    const Vector d = x - y;
    switch (kind_) {
    case ObjectiveKind::weighted_ls: {
        const Vector Ad = system_.A() * d;
        const Vector rsum = 2.0 * system_.b() - system_.A() * (x + y);
        return -0.5 * Ad.dot(system_.W() * rsum);
    }
    case ObjectiveKind::kl: {
        const Vector Ax = kl_projections(system_, x);
        kl_projections(system_, y);
        const Vector Ad = system_.A() * d;
        double total = 0.0;
        for (Eigen::Index i = 0; i < Ax.size(); ++i) {
            const double bi = system_.b()(i);
            if (bi > 0.0) total += bi * std::log1p(-Ad(i) / Ax(i));
            total += Ad(i);
        }
        return total;
    }
    case ObjectiveKind::custom_quadratic: return 0.5 * d.dot(Q_ * (x + y)) - c_.dot(d);
    }
    return 0.0;
}

Vector ObjectiveModel::gradient(const Vector& x) const {
    switch (kind_) {
    case ObjectiveKind::weighted_ls: return grad_ls(*this, x);
    case ObjectiveKind::kl: return grad_kl(*this, x);
    case ObjectiveKind::custom_quadratic: check_dim(*this, x); return Q_ * x - c_;
    }
    return {};
}

double eval_ls(const ObjectiveModel& model, const Vector& x) {
    require_kind(model, ObjectiveKind::weighted_ls, "eval_ls");
    check_dim(model, x);
    const auto& sys = model.system();
    const Vector r = sys.b() - sys.A() * x;
    return 0.5 * r.dot(sys.W() * r);
}

Vector grad_ls(const ObjectiveModel& model, const Vector& x) {
    require_kind(model, ObjectiveKind::weighted_ls, "grad_ls");
    check_dim(model, x);
    const auto& sys = model.system();
    return -(sys.A().transpose() * (sys.W() * (sys.b() - sys.A() * x)));
}

double eval_kl(const ObjectiveModel& model, const Vector& x) {
    require_kind(model, ObjectiveKind::kl, "eval_kl");
    check_dim(model, x);
    const auto& sys = model.system();
    const Vector Ax = kl_projections(sys, x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < Ax.size(); ++i) {
        const double bi = sys.b()(i);
        // 0 log(0/t) = 0
        if (bi > 0.0) total += bi * std::log(bi / Ax(i));
        total += Ax(i) - bi;
    }
    return total;
}

Vector grad_kl(const ObjectiveModel& model, const Vector& x) {
    require_kind(model, ObjectiveKind::kl, "grad_kl");
    check_dim(model, x);
    const auto& sys = model.system();
    const Vector Ax = kl_projections(sys, x);
    Vector factor(Ax.size());
    for (Eigen::Index i = 0; i < Ax.size(); ++i) {
        const double bi = sys.b()(i);
        factor(i) = bi > 0.0 ? 1.0 - bi / Ax(i) : 1.0;
    }
    return sys.A().transpose() * factor;
}

Constants estimate_constants(const ObjectiveModel& model, const FeasibleSet& set) {
    if (set.dimension() != model.dimension())
        fail(ErrorCode::invalid_argument, "set and model dimensions differ");
    switch (model.kind()) {
    case ObjectiveKind::weighted_ls: {
        const auto& sys = model.system();
        return spectral_constants(sys.A().transpose() * sys.W() * sys.A());
    }
    case ObjectiveKind::custom_quadratic: return spectral_constants(model.quadratic_matrix());
    case ObjectiveKind::kl: break;
    }

    if (set.kind() != SetKind::box || !set.bounded())
        fail(ErrorCode::unsupported_configuration,
             "KL constants need a bounded box set away from zero");
    const auto& sys = model.system();
    const Matrix& A = sys.A();
    // Interval bounds of <a^i, x> over the box; the Hessian is
    // A' diag(b_i / <a^i,x>^2) A, monotone in each <a^i,x>.
    const Vector lo_part = A.cwiseMax(0.0) * set.lower() + A.cwiseMin(0.0) * set.upper();
    const Vector hi_part = A.cwiseMax(0.0) * set.upper() + A.cwiseMin(0.0) * set.lower();
    Vector w_upper(A.rows()), w_lower(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double bi = sys.b()(i);
        if (bi == 0.0) {
            w_upper(i) = w_lower(i) = 0.0;
            continue;
        }
        if (!(lo_part(i) > 0.0))
            fail(ErrorCode::unsupported_configuration,
                 "box touches the KL domain boundary for row " + std::to_string(i));
        w_upper(i) = bi / (lo_part(i) * lo_part(i));
        w_lower(i) = bi / (hi_part(i) * hi_part(i));
    }
    const Constants upper = spectral_constants(A.transpose() * w_upper.asDiagonal() * A);
    const Constants lower = spectral_constants(A.transpose() * w_lower.asDiagonal() * A);
    return {upper.L, std::min(lower.mu, upper.L)};
}

std::string ProblemSpec::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "kind=" << to_string(kind) << ";m=" << m << ";n=" << n << ";seed=" << seed
        << ";consistent=" << (consistent ? 1 : 0) << ";cond=" << cond
        << ";weight=" << (weight == WeightKind::identity ? "identity" : "random-diagonal");
    return out.str();
}

FeasibleSet build_set(const SetSpec& set_spec, Eigen::Index n, ObjectiveKind objective) {
    const bool kl = objective == ObjectiveKind::kl;
    std::string kind = set_spec.kind;
    if (kind == "auto") kind = kl ? "box" : "orthant";
    const double inf = std::numeric_limits<double>::infinity();
    if (kind == "orthant") return FeasibleSet::orthant(n);
    if (kind == "box") {
        const double lo = set_spec.lower.value_or(kl ? 0.1 : 0.0);
        const double hi = set_spec.upper.value_or(kl ? 3.0 : inf);
        return FeasibleSet::box(Vector::Constant(n, lo), Vector::Constant(n, hi));
    }
    if (kind == "ball") return FeasibleSet::ball(Vector::Constant(n, set_spec.center), set_spec.radius);
    fail(ErrorCode::invalid_argument, "unknown set kind '" + kind + "'");
}

GeneratedProblem make_test_problem(const ProblemSpec& spec) { return make_test_problem(spec, SetSpec{}); }

GeneratedProblem make_test_problem(const ProblemSpec& spec, const SetSpec& set_spec) {
    const Eigen::Index m = spec.m, n = spec.n;
    if (m <= 0 || n <= 0) fail(ErrorCode::invalid_argument, "m and n must be positive");
    if (spec.cond != 0.0) {
        if (!(spec.cond >= 1.0) || !std::isfinite(spec.cond))
            fail(ErrorCode::invalid_argument, "cond must be >= 1");
        if (spec.kind != ObjectiveKind::weighted_ls)
            fail(ErrorCode::invalid_argument, "cond shaping is only defined for LS problems");
        if (m < n) fail(ErrorCode::invalid_argument, "cond shaping requires m >= n");
        if (n == 1 && spec.cond != 1.0)
            fail(ErrorCode::invalid_argument, "a 1-column system has cond 1");
    }
    if (spec.kind == ObjectiveKind::custom_quadratic)
        fail(ErrorCode::invalid_argument, "generator supports ls and kl only");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Vector weights = Vector::Ones(m);
    if (spec.weight == WeightKind::random_diagonal)
        for (Eigen::Index i = 0; i < m; ++i) weights(i) = 0.5 + 1.5 * unit(rng);
    const Matrix W = weights.asDiagonal();

    Matrix A;
    std::optional<Vector> x_true;
    Vector b;

    if (spec.kind == ObjectiveKind::weighted_ls) {
        if (spec.cond != 0.0) {
            // A = W^{-1/2} U diag(sigma) V' so that A'WA = V diag(sigma^2) V'.
            const Matrix U = random_orthonormal(m, n, rng);
            const Matrix V = random_orthonormal(n, n, rng);
            Vector sigma(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double frac = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
                sigma(j) = std::pow(spec.cond, 0.5 * frac);
            }
            A = weights.cwiseSqrt().cwiseInverse().asDiagonal() * U * sigma.asDiagonal() *
                V.transpose();
        } else {
            A.resize(m, n);
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < m; ++i) A(i, j) = normal(rng);
        }
        if (spec.consistent) {
            Vector xt(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double u = unit(rng);
                xt(j) = u < 0.3 ? 0.0 : unit(rng);
            }
            b = A * xt;
            x_true = xt;
        } else {
            Vector z(n);
            for (Eigen::Index j = 0; j < n; ++j) z(j) = normal(rng);
            b = A * z;
            for (Eigen::Index i = 0; i < m; ++i) b(i) += 0.1 * normal(rng);
        }
    } else {
        A.resize(m, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                A(i, j) = 0.05 + 0.45 * unit(rng) + (i % n == j ? 1.0 : 0.0);
        Vector xt(n);
        for (Eigen::Index j = 0; j < n; ++j) xt(j) = 0.5 + unit(rng);
        b = A * xt;
        if (spec.consistent) {
            x_true = xt;
        } else {
            for (Eigen::Index i = 0; i < m; ++i) b(i) *= 1.0 + 0.2 * (unit(rng) - 0.5);
        }
    }

    const bool kl = spec.kind == ObjectiveKind::kl;
    LinearSystem system(std::move(A), std::move(b), W, kl);
    ObjectiveModel model =
        kl ? ObjectiveModel::kl(std::move(system)) : ObjectiveModel::weighted_ls(std::move(system));

    std::optional<FeasibleSet> set = build_set(set_spec, n, spec.kind);

    const Constants c = estimate_constants(model, *set);
    model = model.with_constants(c.L, c.mu);
    return GeneratedProblem{std::move(model), std::move(*set), std::move(x_true)};
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::invalid_argument, "cannot open matrix file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                fail(ErrorCode::parse_error, "bad number '" + cell + "' in " + path);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorCode::parse_error, "ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorCode::parse_error, "empty matrix file " + path);
    Matrix M(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

void write_matrix_csv(const std::string& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::invalid_argument, "cannot write matrix file '" + path + "'");
    out.precision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << M(i, j);
        }
        out << '\n';
    }
}

} // namespace psg

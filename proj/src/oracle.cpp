#include "psg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psg/error.hpp"

namespace psg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_quadratic(const ObjectiveModel& m) {
    return m.kind() == ObjectiveKind::weighted_ls || m.kind() == ObjectiveKind::custom_quadratic;
}

// J = 0.5 x'Qx - c'x + const.
void quadratic_form(const ObjectiveModel& m, Matrix& Q, Vector& c) {
    if (m.kind() == ObjectiveKind::custom_quadratic) {
        Q = m.quadratic_matrix();
        c = m.quadratic_linear();
        return;
    }
    const auto& s = m.system();
    const Matrix AtW = s.A().transpose() * s.W();
    Q = AtW * s.A();
    c = AtW * s.b();
}

double residual_norm(const ObjectiveModel& m, const FeasibleSet& set, const Vector& x) {
    return (x - set.project(x - m.gradient(x))).norm();
}

// Primal active set for min 0.5 x'Qx - c'x subject to lo <= x <= hi, Q positive definite.
Vector box_active_set(const Matrix& Q, const Vector& c, const Vector& lo, const Vector& hi,
                      const Vector& start) {
    const Eigen::Index n = Q.rows();
    enum State : int { free_var = 0, at_lower = 1, at_upper = 2 };
    Vector x = start.cwiseMax(lo).cwiseMin(hi);
    std::vector<int> state(n, free_var);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (x(j) == lo(j) && std::isfinite(lo(j))) state[j] = at_lower;
        else if (x(j) == hi(j) && std::isfinite(hi(j))) state[j] = at_upper;
    }

    const std::size_t max_iters = 50 * static_cast<std::size_t>(n) + 100;
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::vector<Eigen::Index> F;
        for (Eigen::Index j = 0; j < n; ++j)
            if (state[j] == free_var) F.push_back(j);

        // Minimizer over the current face.
        Vector target = x;
        if (!F.empty()) {
            const auto nf = static_cast<Eigen::Index>(F.size());
            Matrix QFF(nf, nf);
            Vector rhs(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                rhs(a) = c(F[a]);
                for (Eigen::Index j = 0; j < n; ++j)
                    if (state[j] != free_var) rhs(a) -= Q(F[a], j) * x(j);
                for (Eigen::Index b = 0; b < nf; ++b) QFF(a, b) = Q(F[a], F[b]);
            }
            const Vector xF = QFF.ldlt().solve(rhs);
            for (Eigen::Index a = 0; a < nf; ++a) target(F[a]) = xF(a);
        }

        // Longest feasible step toward the face minimizer.
        double alpha = 1.0;
        Eigen::Index blocking = -1;
        int blocking_state = free_var;
        for (Eigen::Index j : F) {
            const double d = target(j) - x(j);
            if (d < 0.0 && std::isfinite(lo(j))) {
                const double a = (lo(j) - x(j)) / d;
                if (a < alpha) { alpha = a; blocking = j; blocking_state = at_lower; }
            } else if (d > 0.0 && std::isfinite(hi(j))) {
                const double a = (hi(j) - x(j)) / d;
                if (a < alpha) { alpha = a; blocking = j; blocking_state = at_upper; }
            }
        }
        alpha = std::max(alpha, 0.0);
        x += alpha * (target - x);
        if (blocking >= 0) {
            x(blocking) = blocking_state == at_lower ? lo(blocking) : hi(blocking);
            state[blocking] = blocking_state;
            continue;
        }

        // Face optimum reached; release the bound with the most negative multiplier.
        const Vector g = Q * x - c;
        Eigen::Index release = -1;
        double worst = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            double lambda = 0.0;
            if (state[j] == at_lower) lambda = g(j);
            else if (state[j] == at_upper) lambda = -g(j);
            else continue;
            if (lambda < worst) { worst = lambda; release = j; }
        }
        if (release < 0) return x;
        state[release] = free_var;
    }
    fail(ErrorCode::unsupported_configuration, "active-set oracle did not terminate");
}

Vector projected_gradient(const ObjectiveModel& m, const FeasibleSet& set, Vector x, double tol,
                          std::size_t max_iters) {
    const double tau = 1.0 / m.L();
    x = set.project(x);
    double best = kInf;
    std::size_t since_best = 0;
    for (std::size_t k = 0; k < max_iters; ++k) {
        const Vector g = m.gradient(x);
        const double res = (x - set.project(x - g)).norm();
        if (res <= tol) break;
        if (res < best * (1.0 - 1e-3)) {
            best = res;
            since_best = 0;
        } else if (++since_best > 20000) {
            break;
        }
        x = set.project(x - tau * g);
    }
    return x;
}

// Axis-aligned region known to contain the minimizer.
void search_region(const ObjectiveModel& m, const FeasibleSet& set, Vector& lo, Vector& hi) {
    const Eigen::Index n = set.dimension();
    if (set.bounded()) {
        lo = set.reference_point().array() - set.enclosing_radius();
        hi = set.reference_point().array() + set.enclosing_radius();
        if (set.kind() == SetKind::box) {
            lo = lo.cwiseMax(set.lower());
            hi = hi.cwiseMin(set.upper());
        }
        return;
    }
    if (!(m.mu() > 0.0))
        fail(ErrorCode::unsupported_configuration,
             "grid search on an unbounded set needs a strongly convex model");
    // ||p - x*|| <= (L+1)/mu ||r(p)|| for any p.
    const Vector p = set.project(Vector::Zero(n));
    const double radius = 1.5 * (m.L() + 1.0) / m.mu() * residual_norm(m, set, p) + 1e-6;
    lo = p.array() - radius;
    hi = p.array() + radius;
}

Vector grid_search(const ObjectiveModel& m, const FeasibleSet& set) {
    const Eigen::Index n = set.dimension();
    if (n > 3) fail(ErrorCode::unsupported_configuration, "grid oracle limited to n <= 3");
    Vector lo, hi;
    search_region(m, set, lo, hi);

    Vector center = 0.5 * (lo + hi);
    Vector half = 0.5 * (hi - lo);
    Vector best = set.project(center);
    double best_J = m.value(best);
    const int pts = n == 3 ? 21 : 41;
    for (int level = 0; level < 60 && half.maxCoeff() > 1e-13; ++level) {
        std::vector<int> idx(n, 0);
        for (;;) {
            Vector p(n);
            for (Eigen::Index j = 0; j < n; ++j)
                p(j) = center(j) - half(j) + 2.0 * half(j) * idx[j] / (pts - 1);
            p = set.project(p);
            const double J = m.value(p);
            if (J < best_J) {
                best_J = J;
                best = p;
            }
            Eigen::Index d = 0;
            while (d < n && ++idx[d] == pts) idx[d++] = 0;
            if (d == n) break;
        }
        center = best;
        half *= 4.0 / (pts - 1);
    }
    return best;
}

OracleSolution finish(const ObjectiveModel& m, const FeasibleSet& set, Vector x,
                      OracleMethod method) {
    OracleSolution out;
    out.residual = residual_norm(m, set, x);
    out.J_star = m.value(x);
    out.x_star = std::move(x);
    out.method = method;
    return out;
}

} // namespace

const char* to_string(OracleMethod method) {
    switch (method) {
    case OracleMethod::active_set: return "active-set-LS";
    case OracleMethod::projected_gradient: return "long-run-projected-gradient";
    case OracleMethod::grid_bruteforce: return "grid-bruteforce";
    }
    return "unknown";
}

OracleSolution solve_reference(const ObjectiveModel& model, const FeasibleSet& set,
                               std::optional<OracleMethod> force, const std::optional<Vector>& start) {
    if (set.dimension() != model.dimension())
        fail(ErrorCode::invalid_argument, "set and model dimensions differ");
    const Eigen::Index n = model.dimension();
    const bool box_like = set.kind() == SetKind::box || set.kind() == SetKind::nonneg_orthant;
    if (start && start->size() != n) fail(ErrorCode::invalid_argument, "start has wrong dimension");

    OracleMethod method;
    if (force) {
        method = *force;
    } else if (model.strongly_convex() && is_quadratic(model) && box_like) {
        method = OracleMethod::active_set;
    } else if (model.strongly_convex()) {
        method = OracleMethod::projected_gradient;
    } else if (n <= 3) {
        method = OracleMethod::grid_bruteforce;
    } else {
        fail(ErrorCode::unsupported_configuration,
             "no reference solver: model is not strongly convex and n > 3");
    }

    switch (method) {
    case OracleMethod::active_set: {
        if (!is_quadratic(model) || !box_like)
            fail(ErrorCode::unsupported_configuration,
                 "active-set oracle needs a quadratic objective on a box or orthant");
        Matrix Q;
        Vector c;
        quadratic_form(model, Q, c);
        Eigen::LLT<Matrix> llt(Q);
        if (llt.info() != Eigen::Success)
            fail(ErrorCode::unsupported_configuration, "active-set oracle needs Q positive definite");
        Vector lo = set.kind() == SetKind::box ? set.lower() : Vector::Zero(n);
        Vector hi = set.kind() == SetKind::box ? set.upper() : Vector::Constant(n, kInf);
        const Vector x0 = start ? *start : Vector::Zero(n);
        return finish(model, set, box_active_set(Q, c, lo, hi, x0), OracleMethod::active_set);
    }
    case OracleMethod::projected_gradient: {
        Vector x = set.project(Vector::Zero(n));
        if (model.kind() == ObjectiveKind::kl && set.bounded()) x = set.reference_point();
        if (start) x = set.project(*start);
        return finish(model, set, projected_gradient(model, set, x, 1e-13, 5000000),
                      OracleMethod::projected_gradient);
    }
    case OracleMethod::grid_bruteforce: {
        const Vector coarse = grid_search(model, set);
        return finish(model, set, projected_gradient(model, set, coarse, 1e-13, 2000000),
                      OracleMethod::grid_bruteforce);
    }
    }
    fail(ErrorCode::invalid_argument, "unknown oracle method");
}

std::vector<Vector> bruteforce_em_trace(const LinearSystem& system, const Vector& x0,
                                        std::size_t steps) {
    const Matrix& A = system.A();
    const Vector& b = system.b();
    const Eigen::Index m = A.rows(), n = A.cols();
    if (x0.size() != n) fail(ErrorCode::invalid_argument, "x0 has wrong dimension");
    std::vector<double> colsum(n, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) colsum[j] += A(i, j);
        if (!(colsum[j] > 0.0))
            fail(ErrorCode::invalid_argument, "column " + std::to_string(j) + " of A sums to zero");
    }
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(x0(j) > 0.0)) fail(ErrorCode::invalid_argument, "EM needs a strictly positive x0");

    std::vector<Vector> trace{x0};
    trace.reserve(steps + 1);
    std::vector<double> ratio(m);
    for (std::size_t k = 0; k < steps; ++k) {
        const Vector& x = trace.back();
        for (Eigen::Index i = 0; i < m; ++i) {
            double ax = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) ax += A(i, j) * x(j);
            if (!(ax > 0.0)) fail(ErrorCode::domain_violation, "<a^i, x> <= 0 in EM trace");
            ratio[i] = b(i) / ax;
        }
        Vector next(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) sum += A(i, j) * ratio[i];
            next(j) = x(j) / colsum[j] * sum;
            if (!(next(j) > 0.0) || !std::isfinite(next(j)))
                fail(ErrorCode::domain_violation,
                     "EM iterate lost strict positivity at step " + std::to_string(k + 1));
        }
        trace.push_back(std::move(next));
    }
    return trace;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

OracleCache::OracleCache(std::string path) : path_(std::move(path)) { load(); }

std::string OracleCache::key(const ProblemSpec& spec, const SetSpec& s) {
    std::ostringstream out;
    out.precision(17);
    out << spec.canonical() << ";set=" << s.kind;
    if (s.lower) out << ";lower=" << *s.lower;
    if (s.upper) out << ";upper=" << *s.upper;
    if (s.kind == "ball") out << ";center=" << s.center << ";radius=" << s.radius;
    return fnv1a_hex(out.str());
}

void OracleCache::load() {
    std::ifstream in(path_);
    if (!in) return;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_error, "oracle cache '" + path_ + "': " + e.what());
    }
    for (const auto& [k, v] : doc.items()) {
        OracleSolution s;
        const auto xs = v.at("x_star").get<std::vector<double>>();
        s.x_star = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        s.J_star = v.at("J_star").get<double>();
        s.residual = v.at("residual").get<double>();
        const auto method = v.at("method").get<std::string>();
        s.method = method == "active-set-LS"                 ? OracleMethod::active_set
                   : method == "long-run-projected-gradient" ? OracleMethod::projected_gradient
                                                             : OracleMethod::grid_bruteforce;
        entries_[k] = std::move(s);
    }
}

void OracleCache::save() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [k, s] : entries_) {
        doc[k] = {{"x_star", std::vector<double>(s.x_star.data(), s.x_star.data() + s.x_star.size())},
                  {"J_star", s.J_star},
                  {"method", to_string(s.method)},
                  {"residual", s.residual}};
    }
    const auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path_);
    if (!out) fail(ErrorCode::invalid_argument, "cannot write oracle cache '" + path_ + "'");
    out << doc.dump(2) << '\n';
}

std::optional<OracleSolution> OracleCache::lookup(const std::string& k) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void OracleCache::store(const std::string& k, const OracleSolution& solution) {
    entries_[k] = solution;
    save();
}

OracleSolution OracleCache::get_or_solve(const std::string& k, const ObjectiveModel& model,
                                         const FeasibleSet& set) {
    if (auto hit = lookup(k); hit && hit->x_star.size() == model.dimension()) return *hit;
    OracleSolution s = solve_reference(model, set);
    store(k, s);
    return s;
}

} // namespace psg

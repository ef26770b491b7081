#include "psg/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "psg/certificates.hpp"
#include "psg/error.hpp"

namespace psg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : config_keys())
        if (k.name == name) return &k;
    return nullptr;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(ErrorCode::parse_error, key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto d = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(ErrorCode::parse_error, key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(ErrorCode::parse_error, key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

Vector read_vector_csv(const std::string& path, Eigen::Index n, const std::string& what) {
    const Matrix M = read_matrix_csv(path);
    if (M.size() != n || (M.rows() != 1 && M.cols() != 1))
        fail(ErrorCode::parse_error, what + " file '" + path + "' must hold " + std::to_string(n) +
                                         " values in one row or column");
    return Eigen::Map<const Vector>(M.data(), n);
}

GeneratedProblem load_problem(const ExperimentConfig& c) {
    if (c.matrix_file) {
        Matrix A = read_matrix_csv(*c.matrix_file);
        const Matrix B = read_matrix_csv(*c.rhs_file);
        if (B.size() != A.rows() || (B.rows() != 1 && B.cols() != 1))
            fail(ErrorCode::parse_error, "rhs must hold one value per row of the matrix");
        Vector b = Eigen::Map<const Vector>(B.data(), A.rows());
        const bool kl = c.problem.kind == ObjectiveKind::kl;
        const Eigen::Index n = A.cols();
        LinearSystem sys(std::move(A), std::move(b), Matrix(), kl);
        ObjectiveModel model =
            kl ? ObjectiveModel::kl(std::move(sys)) : ObjectiveModel::weighted_ls(std::move(sys));
        FeasibleSet set = build_set(c.set, n, c.problem.kind);
        const Constants k = estimate_constants(model, set);
        model = model.with_constants(k.L, k.mu);
        return GeneratedProblem{std::move(model), std::move(set), std::nullopt};
    }
    return make_test_problem(c.problem, c.set);
}

} // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"kind", "ls", "objective: ls | kl"},
        {"m", "20", "rows of A for generated problems"},
        {"n", "10", "columns of A for generated problems"},
        {"seed", "1", "generator seed"},
        {"consistent", "false", "generate b = A x_true with a nonnegative x_true"},
        {"cond", "0", "target condition number of A'WA (ls only, 0 leaves A unshaped)"},
        {"weight", "identity", "weight matrix W: identity | random-diagonal"},
        {"matrix", "", "CSV file with A (replaces the generator)"},
        {"rhs", "", "CSV file with b, required with matrix"},
        {"set", "auto", "feasible set: auto | orthant | box | ball"},
        {"lower", "", "box lower bound (default 0 for ls, 0.1 for kl)"},
        {"upper", "", "box upper bound (default +inf for ls, 3 for kl)"},
        {"center", "0", "ball center, broadcast to every coordinate"},
        {"radius", "1", "ball radius"},
        {"scaling", "identity", "scaling: identity | ls | em"},
        {"scaling-file", "", "CSV with s (ls) or shat (em); defaults diag(A'WA) or column sums"},
        {"tau", "1/L", "stepsize: a number or a multiple of 1/L such as 1.5/L"},
        {"x0", "auto", "starting point fill value; auto is 0 for ls and 1 for kl"},
        {"res-tol", "1e-8", "stop when ||r(x^k)|| <= res-tol"},
        {"max-iters", "100000", "iteration limit"},
        {"plateau-frac", "0.01", "summability plateau threshold"},
        {"perturb", "none", "outer plan: none | c,rho,seed"},
        {"inner", "none", "inner plan: none | tv"},
        {"beta-a", "0.99", "beta_k = beta-a * beta-gamma^k"},
        {"beta-gamma", "0.995", "geometric ratio of beta_k"},
        {"vbar", "1", "bound on ||v^k||"},
        {"target", "auto", "secondary objective: auto | tv:WxH"},
        {"infeasible", "skip", "when x + beta v leaves the set: skip | halve"},
        {"compare", "false", "also run the unperturbed method and report both"},
        {"certify", "all", "certificates: all | none | comma-separated names"},
        {"oracle", "auto", "reference solution for certificates: auto | none"},
        {"oracle-cache", "", "JSON cache for reference solutions"},
        {"out-dir", ".", "directory for default output files"},
        {"trace", "", "trace CSV path (default <out-dir>/trace.csv)"},
        {"report", "", "report JSON path (default <out-dir>/report.json)"},
    };
    return keys;
}

ConfigValues parse_config_text(const std::string& text, const std::string& origin) {
    ConfigValues out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::parse_error,
                 origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!find_key(key))
            fail(ErrorCode::parse_error,
                 origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::parse_error, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

ExperimentConfig parse_config(const ConfigValues& given) {
    ConfigValues v;
    for (const auto& k : config_keys()) v[k.name] = k.default_value;
    for (const auto& [key, value] : given) {
        if (!find_key(key)) fail(ErrorCode::parse_error, "unknown key '" + key + "'");
        v[key] = value;
    }

    ExperimentConfig c;
    const std::string& kind = v["kind"];
    if (kind == "ls") c.problem.kind = ObjectiveKind::weighted_ls;
    else if (kind == "kl") c.problem.kind = ObjectiveKind::kl;
    else fail(ErrorCode::parse_error, "kind: expected ls or kl, got '" + kind + "'");
    c.problem.m = static_cast<Eigen::Index>(to_uint("m", v["m"]));
    c.problem.n = static_cast<Eigen::Index>(to_uint("n", v["n"]));
    c.problem.seed = to_uint("seed", v["seed"]);
    c.problem.consistent = to_bool("consistent", v["consistent"]);
    c.problem.cond = to_double("cond", v["cond"]);
    if (v["weight"] == "identity") c.problem.weight = WeightKind::identity;
    else if (v["weight"] == "random-diagonal") c.problem.weight = WeightKind::random_diagonal;
    else fail(ErrorCode::parse_error, "weight: expected identity or random-diagonal");
    if (!v["matrix"].empty()) c.matrix_file = v["matrix"];
    if (!v["rhs"].empty()) c.rhs_file = v["rhs"];
    if (c.matrix_file.has_value() != c.rhs_file.has_value())
        fail(ErrorCode::parse_error, "matrix and rhs must be given together");
    for (const auto* file : {&c.matrix_file, &c.rhs_file})
        if (*file && !std::filesystem::is_regular_file(**file))
            fail(ErrorCode::parse_error, "referenced file '" + **file + "' does not exist");

    c.set.kind = v["set"];
    if (c.set.kind != "auto" && c.set.kind != "orthant" && c.set.kind != "box" && c.set.kind != "ball")
        fail(ErrorCode::parse_error, "set: expected auto, orthant, box or ball");
    if (!v["lower"].empty()) c.set.lower = to_double("lower", v["lower"]);
    if (!v["upper"].empty()) c.set.upper = to_double("upper", v["upper"]);
    c.set.center = to_double("center", v["center"]);
    c.set.radius = to_double("radius", v["radius"]);

    if (v["scaling"] == "identity") c.scaling = ScalingKind::identity;
    else if (v["scaling"] == "ls") c.scaling = ScalingKind::constant_diagonal;
    else if (v["scaling"] == "em") c.scaling = ScalingKind::em_diagonal;
    else fail(ErrorCode::parse_error, "scaling: expected identity, ls or em");
    if (!v["scaling-file"].empty()) c.scaling_file = v["scaling-file"];
    if (c.scaling_file && !std::filesystem::is_regular_file(*c.scaling_file))
        fail(ErrorCode::parse_error, "referenced file '" + *c.scaling_file + "' does not exist");

    std::string tau = v["tau"];
    if (tau.size() > 2 && tau.compare(tau.size() - 2, 2, "/L") == 0) {
        c.tau_relative = true;
        c.tau_value = to_double("tau", tau.substr(0, tau.size() - 2));
    } else {
        c.tau_relative = false;
        c.tau_value = to_double("tau", tau);
    }
    if (!(c.tau_value > 0.0)) fail(ErrorCode::parse_error, "tau must be positive");
    if (v["x0"] != "auto") c.x0_fill = to_double("x0", v["x0"]);
    c.res_tol = to_double("res-tol", v["res-tol"]);
    c.max_iters = static_cast<std::size_t>(to_uint("max-iters", v["max-iters"]));
    c.plateau_frac = to_double("plateau-frac", v["plateau-frac"]);

    if (v["perturb"] != "none") {
        const auto parts = split_list(v["perturb"]);
        if (parts.size() != 3) fail(ErrorCode::parse_error, "perturb: expected none or c,rho,seed");
        try {
            c.outer = OuterPerturbationPlan::summable_random(
                to_double("perturb", parts[0]), to_double("perturb", parts[1]),
                to_uint("perturb", parts[2]));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse_error) throw;
            fail(ErrorCode::parse_error, std::string("perturb: ") + e.what());
        }
    }

    if (v["inner"] == "tv") c.inner = true;
    else if (v["inner"] != "none") fail(ErrorCode::parse_error, "inner: expected none or tv");
    c.inner_plan.beta_a = to_double("beta-a", v["beta-a"]);
    c.inner_plan.beta_gamma = to_double("beta-gamma", v["beta-gamma"]);
    c.inner_plan.v_bar = to_double("vbar", v["vbar"]);
    if (v["infeasible"] == "skip") c.inner_plan.infeasible = InfeasibleRule::skip;
    else if (v["infeasible"] == "halve") c.inner_plan.infeasible = InfeasibleRule::halve;
    else fail(ErrorCode::parse_error, "infeasible: expected skip or halve");
    const std::string& target = v["target"];
    if (target != "auto") {
        c.target_auto = false;
        long long w = 0, h = 0;
        char x = 0;
        std::istringstream in(target.rfind("tv:", 0) == 0 ? target.substr(3) : std::string());
        if (!(in >> w >> x >> h) || x != 'x' || w <= 0 || h <= 0 || !in.eof())
            fail(ErrorCode::parse_error, "target: expected auto or tv:WxH, got '" + target + "'");
        c.target = TvTarget{static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(h)};
    }
    c.compare = to_bool("compare", v["compare"]);
    if (c.inner && c.outer.kind != OuterPlanKind::none)
        fail(ErrorCode::parse_error, "outer (perturb) and inner plans are mutually exclusive");

    if (v["certify"] == "none") c.certificates = {"none"};
    else if (v["certify"] != "all") {
        c.certificates = split_list(v["certify"]);
        const auto& names = certificate_names();
        for (const auto& name : c.certificates)
            if (std::find(names.begin(), names.end(), name) == names.end())
                fail(ErrorCode::parse_error, "certify: unknown certificate '" + name + "'");
    }
    if (v["oracle"] == "none") c.use_oracle = false;
    else if (v["oracle"] != "auto") fail(ErrorCode::parse_error, "oracle: expected auto or none");
    c.oracle_cache = v["oracle-cache"];
    c.out_dir = v["out-dir"];
    c.trace_path = v["trace"].empty() ? c.out_dir + "/trace.csv" : v["trace"];
    c.report_path = v["report"].empty() ? c.out_dir + "/report.json" : v["report"];
    return c;
}

Experiment build_experiment(const ExperimentConfig& c) {
    if (c.inner && c.outer.kind != OuterPlanKind::none)
        fail(ErrorCode::parse_error, "outer (perturb) and inner plans are mutually exclusive");

    Experiment e{load_problem(c), ScalingStrategy::identity(), StepsizePolicy::constant(1.0),
                 Vector(), std::nullopt, std::nullopt};
    const ObjectiveModel& model = e.problem.model;
    const FeasibleSet& set = e.problem.set;
    const Eigen::Index n = model.dimension();

    switch (c.scaling) {
    case ScalingKind::identity: break;
    case ScalingKind::constant_diagonal: {
        Vector s;
        if (c.scaling_file) {
            s = read_vector_csv(*c.scaling_file, n, "scaling");
        } else {
            const auto& sys = model.system();
            s = (sys.A().transpose() * sys.W() * sys.A()).diagonal();
        }
        e.strategy = ScalingStrategy::constant_diagonal(std::move(s));
        break;
    }
    case ScalingKind::em_diagonal:
        e.strategy = c.scaling_file
                         ? ScalingStrategy::em_diagonal(read_vector_csv(*c.scaling_file, n, "scaling"))
                         : ScalingStrategy::em_for(model.system());
        break;
    }

    e.policy = StepsizePolicy::constant(c.tau_relative ? c.tau_value / model.L() : c.tau_value);
    e.policy.validate(model.L());

    const double fill = c.x0_fill.value_or(model.kind() == ObjectiveKind::kl ? 1.0 : 0.0);
    e.x0 = Vector::Constant(n, fill);

    if (c.inner) {
        e.target = c.target_auto ? TvTarget::square_for(n) : c.target;
        if (!e.target)
            fail(ErrorCode::parse_error, "target=auto needs n to be a perfect square; set tv:WxH");
        if (e.target->width * e.target->height != n)
            fail(ErrorCode::parse_error, "target grid does not have n = " + std::to_string(n) + " cells");
    }

    if (c.use_oracle && (model.strongly_convex() || n <= 3)) {
        try {
            if (!c.oracle_cache.empty() && !c.matrix_file) {
                OracleCache cache(c.oracle_cache);
                e.oracle = cache.get_or_solve(OracleCache::key(c.problem, c.set), model, set);
            } else {
                e.oracle = solve_reference(model, set);
            }
        } catch (const Error& err) {
            if (err.code() != ErrorCode::unsupported_configuration) throw;
        }
    }
    return e;
}

RunOptions run_options(const ExperimentConfig& c, const Experiment& e) {
    RunOptions o;
    o.res_tol = c.res_tol;
    o.max_iters = c.max_iters;
    o.plateau_frac = c.plateau_frac;
    o.certificates = c.certificates;
    if (e.oracle) {
        o.x_star = e.oracle->x_star;
        o.J_star = e.oracle->J_star;
    }
    return o;
}

} // namespace psg

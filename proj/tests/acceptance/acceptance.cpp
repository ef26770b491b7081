#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psg/certificates.hpp"
#include "psg/core.hpp"
#include "psg/oracle.hpp"
#include "psg/superiorize.hpp"
#include "support.hpp"

using namespace psg;

namespace {

constexpr double kSlack = 1e-9;

struct Instance {
    GeneratedProblem problem;
    OracleSolution oracle;
};

struct Outcome {
    bool ok = true;
    std::string detail;
};

// A converged run kept for the per-iteration criteria.
struct RunRecord {
    std::string label;
    const Instance* instance = nullptr;
    RunReport report;
};

std::vector<Instance> ls_instances() {
    std::vector<Instance> out;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Index n = 10 * (i + 1);
        auto p = make_test_problem({ObjectiveKind::weighted_ls, 2 * n, n,
                                    static_cast<std::uint64_t>(100 + i), false, 20.0});
        auto sol = solve_reference(p.model, p.set);
        out.push_back({std::move(p), std::move(sol)});
    }
    return out;
}

std::vector<Instance> box_instances() {
    std::vector<Instance> out;
    SetSpec box;
    box.kind = "box";
    box.lower = 0.0;
    box.upper = 2.0;
    for (int i = 0; i < 8; ++i) {
        const Eigen::Index side = 3 + i;
        const Eigen::Index n = side * side;
        auto p = make_test_problem({ObjectiveKind::weighted_ls, 2 * n, n,
                                    static_cast<std::uint64_t>(300 + i), false, 20.0},
                                   box);
        auto sol = solve_reference(p.model, p.set);
        out.push_back({std::move(p), std::move(sol)});
    }
    return out;
}

RunOptions oracle_options(const Instance& inst) {
    RunOptions opts;
    opts.x_star = inst.oracle.x_star;
    opts.J_star = inst.oracle.J_star;
    return opts;
}

Outcome convergence(const std::vector<RunRecord>& runs) {
    Outcome o;
    double worst_res = 0.0, worst_dist = 0.0;
    for (const auto& r : runs) {
        const double dist = (r.report.final_x - r.instance->oracle.x_star).norm();
        worst_res = std::max(worst_res, r.report.final_res_norm);
        worst_dist = std::max(worst_dist, dist);
        if (r.report.termination != Termination::residual_tol || r.report.final_res_norm > 1e-8 ||
            dist > 1e-6) {
            o.ok = false;
            o.detail = r.label + ": termination " + to_string(r.report.termination) +
                       ", ||r|| = " + std::to_string(r.report.final_res_norm) +
                       ", ||x - x*|| = " + std::to_string(dist);
            return o;
        }
    }
    std::ostringstream s;
    s << runs.size() << " runs, max ||r|| = " << worst_res << ", max ||x - x*|| = " << worst_dist;
    o.detail = s.str();
    return o;
}

const Vector& next_iterate(const RunReport& rep, std::size_t k) {
    return k + 1 < rep.records.size() ? rep.records[k + 1].x : rep.final_x;
}

// Descent inequality rebuilt from the recorded iterates, plus the library verdict.
Outcome descent(const std::vector<RunRecord>& runs) {
    Outcome o;
    std::size_t checked = 0;
    for (const auto& run : runs) {
        const auto& rep = run.report;
        const auto& model = run.instance->problem.model;
        const double eta1 = 1.0 / rep.tau_sup - 0.5 * model.L();
        if (!rep.certificates.at("descent").passed()) {
            o.ok = false;
            o.detail = run.label + ": certificate reported " + rep.certificates.at("descent").detail;
            return o;
        }
        for (std::size_t k = 0; k < rep.records.size(); ++k) {
            const auto& rec = rep.records[k];
            const Vector& xn = next_iterate(rep, k);
            const double step = (rec.x - xn).norm();
            const double lhs = model.value(rec.x) - model.value(xn);
            const double rhs = eta1 * step * step - rec.delta_norm * step;
            ++checked;
            if (lhs < rhs - kSlack) {
                o.ok = false;
                o.detail = run.label + " k=" + std::to_string(k) + ": " + std::to_string(lhs) +
                           " < " + std::to_string(rhs);
                return o;
            }
        }
    }
    o.detail = std::to_string(checked) + " iterations over " + std::to_string(runs.size()) + " runs";
    return o;
}

Outcome residual_bound(const std::vector<RunRecord>& runs) {
    Outcome o;
    std::size_t checked = 0;
    for (const auto& run : runs) {
        const auto& rep = run.report;
        const auto& inst = *run.instance;
        const double eta2 = 1.0 / std::min(1.0, rep.tau_inf);
        if (!rep.certificates.at("residual-bound").passed()) {
            o.ok = false;
            o.detail = run.label + ": certificate reported " + rep.certificates.at("residual-bound").detail;
            return o;
        }
        for (std::size_t k = 0; k < rep.records.size(); ++k) {
            const auto& rec = rep.records[k];
            const double res = residual(inst.problem.model, inst.problem.set, rec.x).norm();
            const double step = (rec.x - next_iterate(rep, k)).norm();
            ++checked;
            if (res > eta2 * (step + rec.e_norm + rec.theta_norm) + kSlack) {
                o.ok = false;
                o.detail = run.label + " k=" + std::to_string(k);
                return o;
            }
        }
    }
    o.detail = std::to_string(checked) + " iterations over " + std::to_string(runs.size()) + " runs";
    return o;
}

Outcome error_bound(const std::vector<const Instance*>& instances) {
    Outcome o;
    std::mt19937_64 rng(6);
    std::size_t violations = 0, samples = 0;
    double worst = 0.0;
    for (const auto* inst : instances) {
        const auto& model = inst->problem.model;
        const auto& set = inst->problem.set;
        const Eigen::Index n = model.dimension();
        const double c = (model.L() + 1.0) / model.mu();
        for (int t = 0; t < 1000; ++t) {
            // Half the samples spread over the set, half close to the solution.
            Vector x = t % 2 == 0 ? psg::testing::random_member(set, rng)
                                  : set.project(inst->oracle.x_star +
                                                psg::testing::gaussian(rng, n, std::pow(10.0, -(t % 7))));
            const double dist = (x - inst->oracle.x_star).norm();
            const double bound = c * residual(model, set, x).norm();
            ++samples;
            if (dist > bound + kSlack) ++violations;
            if (bound > 0.0) worst = std::max(worst, dist / bound);
        }
    }
    o.ok = violations == 0;
    std::ostringstream s;
    s << violations << " violations in " << samples << " samples, max ||x - x*|| / bound = " << worst;
    o.detail = s.str();
    return o;
}

Outcome em_equivalence() {
    Outcome o;
    double worst_gap = 0.0, worst_kl = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Index n = 5 + i % 6;
        const auto p = make_test_problem({ObjectiveKind::kl, 4 * n, n, static_cast<std::uint64_t>(500 + i), true});
        const auto& sys = p.model.system();
        const Vector x0 = Vector::Ones(n);
        const auto closed = bruteforce_em_trace(sys, x0, 500);
        const auto em = ScalingStrategy::em_for(sys);
        const auto orthant = FeasibleSet::orthant(n);
        Vector x = x0;
        for (std::size_t k = 1; k < closed.size(); ++k) {
            x = psg_step(p.model, orthant, em, 1.0, x, Vector::Zero(n));
            const double gap = (x - closed[k]).cwiseAbs().maxCoeff() / std::max(1.0, closed[k].cwiseAbs().maxCoeff());
            worst_gap = std::max(worst_gap, gap);
            if (gap > 1e-12) {
                o.ok = false;
                o.detail = "instance " + std::to_string(i) + " step " + std::to_string(k) +
                           ": relative gap " + std::to_string(gap);
                return o;
            }
        }
        const double kl = eval_kl(p.model, closed.back());
        worst_kl = std::max(worst_kl, kl);
        if (kl > 1e-10) {
            o.ok = false;
            std::ostringstream s;
            s << "instance " << i << ": KL after 500 steps = " << kl;
            o.detail = s.str();
            return o;
        }
    }
    std::ostringstream s;
    s << "20 instances x 500 steps, max relative gap = " << worst_gap << ", max final KL = " << worst_kl;
    o.detail = s.str();
    return o;
}

// Rebuilds every applied superiorized step from x^k, beta_k and v^k with the
// conversion formula written out here, then compares with the recorded x^{k+1}.
Outcome inner_outer(const std::vector<RunRecord>& runs, const std::vector<RunRecord>& em_runs,
                    const InnerPerturbationPlan& plan) {
    Outcome o;
    std::size_t applied = 0;
    double worst = 0.0;
    const auto check = [&](const RunRecord& run,
                           const std::function<Vector(const Vector&, const Vector&)>& scaled) {
        const auto& model = run.instance->problem.model;
        const auto& set = run.instance->problem.set;
        const auto target = TvTarget::square_for(model.dimension());
        for (std::size_t k = 0; k < run.report.records.size(); ++k) {
            const auto& rec = run.report.records[k];
            if (!rec.sup || !rec.sup->applied) continue;
            const Vector v = plan.v_bar * tv_direction(*target, rec.x);
            const Vector y = rec.x + rec.sup->beta * v;
            const Vector e = rec.sup->beta * v +
                             rec.tau * (scaled(rec.x, model.gradient(rec.x)) - scaled(y, model.gradient(y)));
            const Vector rebuilt = set.project(rec.x - rec.tau * scaled(rec.x, model.gradient(rec.x)) + e);
            const double gap = (rebuilt - next_iterate(run.report, k)).norm();
            worst = std::max(worst, gap);
            ++applied;
            if (gap > 1e-12) {
                o.ok = false;
                o.detail = run.label + " k=" + std::to_string(k) + ": gap " + std::to_string(gap);
                return false;
            }
        }
        return true;
    };
    for (const auto& run : runs)
        if (!check(run, [](const Vector&, const Vector& g) { return g; })) return o;
    for (const auto& run : em_runs) {
        const Vector shat = run.instance->problem.model.system().column_sums();
        const auto em = [&](const Vector& x, const Vector& g) -> Vector {
            return (x.array() / shat.array() * g.array()).matrix();
        };
        if (!check(run, em)) return o;
    }
    std::ostringstream s;
    s << applied << " applied iterations, max gap = " << worst;
    o.detail = s.str();
    return o;
}

Outcome projection_properties() {
    Outcome o;
    const Eigen::Index n = 5;
    Matrix G(4, n);
    std::mt19937_64 rng(9);
    G = Matrix::NullaryExpr(4, n, [&] { return psg::testing::gaussian(rng, 1)(0); });
    const std::vector<FeasibleSet> sets = {
        FeasibleSet::orthant(n),
        FeasibleSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.5)),
        FeasibleSet::ball(Vector::Constant(n, 0.3), 2.0),
        FeasibleSet::halfspaces(G, psg::testing::uniform(rng, 4, 0.5, 1.5)),
    };
    std::size_t cases = 0;
    for (const auto& set : sets) {
        for (int t = 0; t < 100; ++t) {
            const Vector x = psg::testing::gaussian(rng, n, 3.0);
            const Vector y = psg::testing::gaussian(rng, n, 3.0);
            const Vector px = set.project(x);
            const std::string where = std::string(to_string(set.kind())) + " case " + std::to_string(t);
            if ((px - set.project(y)).norm() > (x - y).norm() + 1e-12) {
                o.ok = false;
                o.detail = where + ": nonexpansiveness";
                return o;
            }
            const Vector z = psg::testing::random_member(set, rng);
            if ((x - px).dot(z - px) > 1e-12) {
                o.ok = false;
                o.detail = where + ": variational inequality";
                return o;
            }
            const Vector base = psg::testing::random_member(set, rng);
            const Vector d = psg::testing::gaussian(rng, n, 2.0);
            double prev = std::numeric_limits<double>::infinity();
            for (int e = -4; e <= 6; ++e) {
                const double phi = gafni_ratio(set, base, d, std::pow(10.0, e / 2.0));
                if (phi > prev + 1e-12) {
                    o.ok = false;
                    o.detail = where + ": Gafni ratio increased";
                    return o;
                }
                prev = phi;
            }
            ++cases;
        }
    }
    o.detail = std::to_string(cases) + " cases across 4 set kinds";
    return o;
}

Outcome negative_control(const Instance& inst) {
    Outcome o;
    const Eigen::Index n = inst.problem.model.dimension();
    std::mt19937_64 rng(10);
    std::vector<Vector> list;
    for (int k = 0; k < 3000; ++k) {
        Vector u = psg::testing::gaussian(rng, n);
        list.push_back(u / u.norm() / (k + 1.0));
    }
    RunOptions opts = oracle_options(inst);
    opts.max_iters = list.size();
    const auto rep = run(inst.problem.model, inst.problem.set, ScalingStrategy::identity(),
                         StepsizePolicy::constant(1.0 / inst.problem.model.L()),
                         OuterPerturbationPlan::explicit_list(list), Vector::Zero(n), opts);
    const auto& v = rep.certificates.at("summability-e");
    o.ok = v.failed();
    o.detail = "summability-e: " + std::string(to_string(v.status)) + " (" + v.detail + ")";
    return o;
}

} // namespace

int main() {
    const auto started = std::chrono::steady_clock::now();
    const auto ls = ls_instances();
    const auto boxes = box_instances();

    std::vector<RunRecord> plain, perturbed, superiorized, em_superiorized;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const auto& inst = ls[i];
        const Eigen::Index n = inst.problem.model.dimension();
        const auto policy = StepsizePolicy::constant(1.0 / inst.problem.model.L());
        plain.push_back({"ls#" + std::to_string(i), &inst,
                         run(inst.problem.model, inst.problem.set, ScalingStrategy::identity(), policy,
                             OuterPerturbationPlan::none(), Vector::Zero(n), oracle_options(inst))});
        perturbed.push_back({"ls#" + std::to_string(i) + "+e", &inst,
                             run(inst.problem.model, inst.problem.set, ScalingStrategy::identity(), policy,
                                 OuterPerturbationPlan::summable_random(0.5, 0.9, 1000 + i),
                                 Vector::Zero(n), oracle_options(inst))});
    }
    const InnerPerturbationPlan plan;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& inst = boxes[i];
        const Eigen::Index n = inst.problem.model.dimension();
        SuperiorizeOptions opts;
        opts.run = oracle_options(inst);
        superiorized.push_back(
            {"box#" + std::to_string(i), &inst,
             run_superiorized(inst.problem.model, inst.problem.set, ScalingStrategy::identity(),
                              StepsizePolicy::constant(1.0 / inst.problem.model.L()), plan,
                              TvTarget::square_for(n), Vector::Constant(n, 1.0), opts)});
    }

    std::vector<Instance> kl;
    SetSpec kl_box;
    kl_box.kind = "box";
    kl_box.lower = 0.4;
    kl_box.upper = 2.0;
    for (int i = 0; i < 3; ++i) {
        auto p = make_test_problem({ObjectiveKind::kl, 32, 16, static_cast<std::uint64_t>(700 + i), true}, kl_box);
        auto sol = solve_reference(p.model, p.set);
        kl.push_back({std::move(p), std::move(sol)});
    }
    for (std::size_t i = 0; i < kl.size(); ++i) {
        const auto& inst = kl[i];
        SuperiorizeOptions opts;
        opts.run = oracle_options(inst);
        em_superiorized.push_back(
            {"kl#" + std::to_string(i), &inst,
             run_superiorized(inst.problem.model, inst.problem.set,
                              ScalingStrategy::em_for(inst.problem.model.system()),
                              StepsizePolicy::constant(1.9 / inst.problem.model.L()), plan,
                              TvTarget::square_for(16), Vector::Constant(16, 1.0), opts)});
    }

    std::vector<RunRecord> all;
    for (const auto* group : {&plain, &perturbed, &superiorized, &em_superiorized})
        for (const auto& r : *group)
            if (r.report.termination == Termination::residual_tol) all.push_back(r);

    std::vector<RunRecord> bounded = superiorized;
    bounded.insert(bounded.end(), em_superiorized.begin(), em_superiorized.end());
    Outcome bpr = convergence(bounded);
    if (bpr.ok) {
        std::size_t applied = 0;
        for (const auto& r : bounded) {
            if (r.report.certificates.at("e-bound").status != VerdictStatus::pass) {
                bpr.ok = false;
                bpr.detail = r.label + ": e-bound " + r.report.certificates.at("e-bound").detail;
            }
            for (const auto& rec : r.report.records) {
                if (!rec.sup || !rec.sup->applied) continue;
                ++applied;
                if (rec.e_norm > *r.report.c_omega * rec.sup->beta + kSlack) {
                    bpr.ok = false;
                    bpr.detail = r.label + " k=" + std::to_string(rec.k) + ": ||e|| above C_Omega beta";
                }
            }
        }
        if (bpr.ok) bpr.detail += ", e-bound held at " + std::to_string(applied) + " applied iterations";
    }

    std::vector<const Instance*> strongly_convex;
    for (const auto& i : ls) strongly_convex.push_back(&i);
    for (const auto& i : boxes) strongly_convex.push_back(&i);

    const std::vector<std::pair<std::string, Outcome>> results = {
        {"1 unperturbed convergence", convergence(plain)},
        {"2 outer-perturbation resilience", convergence(perturbed)},
        {"3 bounded perturbation resilience", bpr},
        {"4 descent inequality", descent(all)},
        {"5 residual bound", residual_bound(all)},
        {"6 global error bound", error_bound(strongly_convex)},
        {"7 EM equivalence", em_equivalence()},
        {"8 inner-to-outer exactness", inner_outer(superiorized, em_superiorized, plan)},
        {"9 projection properties", projection_properties()},
        {"10 negative control", negative_control(ls.front())},
    };

    int failures = 0;
    for (const auto& [name, outcome] : results) {
        std::printf("%s criterion %s: %s\n", outcome.ok ? "PASS" : "FAIL", name.c_str(),
                    outcome.detail.c_str());
        if (!outcome.ok) ++failures;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%d of %zu criteria passed in %.1f s\n", static_cast<int>(results.size()) - failures,
                results.size(), secs);
    return failures == 0 ? 0 : 1;
}

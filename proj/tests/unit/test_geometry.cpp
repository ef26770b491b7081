#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "psg/error.hpp"
#include "psg/geometry.hpp"
#include "psg/oracle.hpp"
#include "support.hpp"

using namespace psg;
using psg::testing::vec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<FeasibleSet> sample_sets(Eigen::Index n) {
    Matrix G(3, n);
    G.setZero();
    G(0, 0) = 1.0;
    G.row(1).setOnes();
    G(2, n - 1) = -1.0;
    G(2, 0) = 0.5;
    return {
        FeasibleSet::orthant(n),
        FeasibleSet::box(Vector::Constant(n, -1.0), Vector::Constant(n, 2.0)),
        FeasibleSet::ball(Vector::Constant(n, 0.5), 1.5),
        FeasibleSet::halfspaces(G, vec({1.0, 2.0, 0.5})),
    };
}

} // namespace

TEST(Project, OrthantClamp) {
    EXPECT_EQ(FeasibleSet::orthant(2).project(vec({-1, 2})), vec({0, 2}));
}

TEST(Project, BallRadialScaling) {
    const Vector p = FeasibleSet::ball(Vector::Zero(2), 1.0).project(vec({3, 4}));
    EXPECT_NEAR(p(0), 0.6, 1e-15);
    EXPECT_NEAR(p(1), 0.8, 1e-15);
}

TEST(Project, MembersAreFixed) {
    std::mt19937_64 rng(3);
    for (const auto& set : sample_sets(4)) {
        for (int t = 0; t < 20; ++t) {
            const Vector y = set.project(psg::testing::gaussian(rng, 4, 3.0));
            EXPECT_LE((set.project(y) - y).norm(), 1e-12) << to_string(set.kind());
        }
    }
}

TEST(Project, BoxWithInfiniteAndCollapsedBounds) {
    const auto set = FeasibleSet::box(vec({0, -kInf, 1}), vec({kInf, 2, 1}));
    EXPECT_FALSE(set.bounded());
    EXPECT_EQ(set.project(vec({-3, -7, 5})), vec({0, -7, 1}));
    EXPECT_THROW(FeasibleSet::box(vec({1}), vec({0})), Error);
}

TEST(Project, HalfspaceHandCase) {
    Matrix G(1, 2);
    G << 1, 1;
    const auto set = FeasibleSet::halfspaces(G, vec({1}));
    const Vector p = set.project(vec({1, 1}));
    EXPECT_NEAR(p(0), 0.5, 1e-14);
    EXPECT_NEAR(p(1), 0.5, 1e-14);
}

TEST(Project, HalfspacesMatchDykstra) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        const Matrix G = Matrix::NullaryExpr(5, 3, [&] { return psg::testing::gaussian(rng, 1)(0); });
        const Vector h = psg::testing::uniform(rng, 5, 0.2, 1.0);
        const auto set = FeasibleSet::halfspaces(G, h);
        const Vector x = psg::testing::gaussian(rng, 3, 3.0);
        const Vector expected = psg::testing::dykstra_projection(G, h, x);
        EXPECT_LE((set.project(x) - expected).norm(), 1e-9);
    }
}

TEST(Project, EmptyInteriorIsInfeasible) {
    Matrix G(2, 1);
    G << 1, -1;
    try {
        FeasibleSet::halfspaces(G, vec({0, 0}));
        FAIL() << "expected infeasible-set";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::infeasible_set);
    }
    EXPECT_THROW(FeasibleSet::halfspaces(G, vec({-1, -1})), Error);
}

TEST(Project, DimensionMismatch) {
    EXPECT_THROW(FeasibleSet::orthant(2).project(vec({1, 2, 3})), Error);
}

TEST(Boundedness, ReferenceData) {
    const auto box = FeasibleSet::box(vec({0, 0}), vec({2, 4}));
    ASSERT_TRUE(box.bounded());
    EXPECT_EQ(box.reference_point(), vec({1, 2}));
    EXPECT_NEAR(box.enclosing_radius(), 0.5 * std::sqrt(20.0), 1e-15);
    const auto ball = FeasibleSet::ball(vec({1, -1}), 3.0);
    EXPECT_EQ(ball.reference_point(), vec({1, -1}));
    EXPECT_EQ(ball.enclosing_radius(), 3.0);

    try {
        FeasibleSet::orthant(2).reference_point();
        FAIL() << "expected not-applicable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_applicable);
    }
}

TEST(Boundedness, MembersInsideEnclosingBall) {
    std::mt19937_64 rng(23);
    for (const auto& set : sample_sets(3)) {
        if (!set.bounded()) continue;
        for (int t = 0; t < 200; ++t) {
            const Vector y = psg::testing::random_member(set, rng);
            EXPECT_LE((y - set.reference_point()).norm(), set.enclosing_radius() + 1e-12);
        }
    }
}

TEST(Residual, VanishesAtOracleSolution) {
    const auto p = make_test_problem({ObjectiveKind::weighted_ls, 20, 8, 4, false, 20.0});
    const auto sol = solve_reference(p.model, p.set);
    EXPECT_LE(residual(p.model, p.set, sol.x_star).norm(), 1e-10);
}

TEST(Residual, HandEvaluations) {
    const auto set = FeasibleSet::orthant(1);
    EXPECT_DOUBLE_EQ(residual(psg::testing::scalar_quadratic(1, 0), set, vec({2}))(0), 2.0);
    EXPECT_DOUBLE_EQ(residual(psg::testing::scalar_quadratic(1, 1), set, vec({0}))(0), -1.0);
}

TEST(GafniRatio, InteriorSmallStep) {
    const auto set = FeasibleSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    const Vector d = vec({0.3, -0.4});
    EXPECT_NEAR(gafni_ratio(set, vec({0, 0}), d, 1e-3), d.norm(), 1e-14);
}

TEST(GafniRatio, BlockedDirection) {
    const auto set = FeasibleSet::orthant(1);
    for (double t : {1e-3, 1.0, 50.0}) EXPECT_EQ(gafni_ratio(set, vec({0}), vec({-1}), t), 0.0);
}

TEST(GafniRatio, RejectsNonpositiveStep) {
    const auto set = FeasibleSet::orthant(1);
    try {
        gafni_ratio(set, vec({0}), vec({1}), 0.0);
        FAIL() << "expected invalid-argument";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    }
}

TEST(DistanceToSet, HandEvaluations) {
    EXPECT_EQ(distance_to_set(FeasibleSet::orthant(2), vec({1, 1})), 0.0);
    EXPECT_DOUBLE_EQ(distance_to_set(FeasibleSet::orthant(2), vec({-3, 4})), 3.0);
    const auto box = FeasibleSet::box(vec({0, 0}), vec({1, 1}));
    EXPECT_DOUBLE_EQ(distance_to_set(box, vec({2, 2})), std::sqrt(2.0));
}

class ProjectionProperties : public ::testing::TestWithParam<int> {};

TEST_P(ProjectionProperties, NonexpansiveVariationalGafni) {
    const auto set = sample_sets(4)[static_cast<std::size_t>(GetParam())];
    std::mt19937_64 rng(100 + GetParam());
    for (int t = 0; t < 100; ++t) {
        const Vector x = psg::testing::gaussian(rng, 4, 3.0);
        const Vector y = psg::testing::gaussian(rng, 4, 3.0);
        const Vector px = set.project(x), py = set.project(y);
        EXPECT_LE((px - py).norm(), (x - y).norm() + 1e-12);

        const Vector member = psg::testing::random_member(set, rng);
        EXPECT_LE((x - px).dot(member - px), 1e-12);

        const Vector base = psg::testing::random_member(set, rng);
        const Vector d = psg::testing::gaussian(rng, 4, 2.0);
        double prev = std::numeric_limits<double>::infinity();
        for (int e = -2; e <= 3; ++e) {
            for (double f : {1.0, 2.0, 5.0}) {
                const double phi = gafni_ratio(set, base, d, f * std::pow(10.0, e));
                EXPECT_LE(phi, prev + 1e-12);
                prev = phi;
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(SetKinds, ProjectionProperties, ::testing::Values(0, 1, 2, 3));

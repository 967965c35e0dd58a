#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ori;
using ori::test::fixture;

namespace
{

RigiditySystem rigiditySystem(const std::string& name) { return RigiditySystem::build(fixture(name)); }

}  // namespace

TEST(Prestress, Degree3SignOfStress)
{
    const auto p = fixture("degree3");
    const RigiditySystem sys = RigiditySystem::build(p);
    const VecX ones = VecX::Ones(3);
    for (double sigma : {2.0, 0.5, 0.0, -0.5}) {
        const VecX omega = Vec3(0, 0, sigma);
        const MatX g = geometricStiffness(omega, sys.ha);
        EXPECT_NEAR(ones.dot(g * ones), std::sqrt(3.0) / 2.0 * sigma, 1e-9);
        const PrestressVerdict v = isPrestressStable(sys, omega, StiffnessModel::identity(p));
        EXPECT_EQ(v.stable, sigma > 0) << sigma;
    }
}

TEST(Prestress, ScalingLaw)
{
    std::mt19937_64 rng(31);
    for (const auto& name : {"degree3", "triangulated-tetrahedron"}) {
        const auto p = fixture(name);
        const RigiditySystem sys = RigiditySystem::build(p);
        ASSERT_EQ(sys.m(), 1);
        const StiffnessModel b = StiffnessModel::identity(p);
        for (int trial = 0; trial < 10; ++trial) {
            const VecX omega = sys.stresses.vectors * test::gaussian(rng, sys.s());
            const PrestressVerdict v = isPrestressStable(sys, omega, b);
            for (double c : {0.01, 3.0, 100.0}) {
                EXPECT_EQ(isPrestressStable(sys, c * omega, b).stable, v.stable) << name;
            }
            if (std::abs(v.smallestRestricted) > 1e-6) {
                EXPECT_EQ(isPrestressStable(sys, -omega, b).stable, !v.stable) << name;
            }
        }
    }
}

TEST(Prestress, GeometricStiffnessIsLinear)
{
    std::mt19937_64 rng(32);
    for (const auto& name : test::allNames()) {
        const RigiditySystem sys = rigiditySystem(name);
        if (sys.rows() == 0) {
            continue;
        }
        const VecX w1 = test::gaussian(rng, sys.rows()), w2 = test::gaussian(rng, sys.rows());
        const double a = 1.7, b = -0.4;
        const MatX lhs = geometricStiffness(a * w1 + b * w2, sys.ha);
        const MatX rhs = a * geometricStiffness(w1, sys.ha) + b * geometricStiffness(w2, sys.ha);
        EXPECT_LT(maxAbs(lhs - rhs), 1e-12) << name;
        EXPECT_EQ(lhs, MatX(lhs.transpose())) << name;
    }
}

TEST(Prestress, CertifiedScalingGivesPositiveDefiniteStiffness)
{
    for (const auto& name : {"degree3", "triangulated-tetrahedron", "tetrahedron"}) {
        const auto p = fixture(name);
        const RigiditySystem sys = RigiditySystem::build(p);
        const StabilizingSearch search = findStabilizingStress(sys);
        ASSERT_TRUE(search.omega.has_value()) << name;
        const StiffnessModel b = StiffnessModel::identity(p);
        const PrestressVerdict v = isPrestressStable(sys, *search.omega, b);
        ASSERT_TRUE(v.stable) << name;
        ASSERT_TRUE(v.certifiedT.has_value());
        const MatX k = sys.ja.transpose() * b.dense() * sys.ja + *v.certifiedT * geometricStiffness(*search.omega, sys.ha);
        EXPECT_GT(symmetricEigenvalues(k)(0), 0.0) << name;
        EXPECT_GT(v.tangentMinEigenvalue, 0.0) << name;
    }
}

TEST(Prestress, NonStressIsRejected)
{
    const auto p = fixture("degree3");
    EXPECT_THROW(isPrestressStable(p, Vec3(1, 0, 0), StiffnessModel::identity(p)), InputError);
}

TEST(Prestress, StiffnessValidation)
{
    const auto p = fixture("degree3");
    StiffnessModel b = StiffnessModel::identity(p);
    EXPECT_NO_THROW(b.validate(p));
    b.blocks[0](0, 1) = 0.5;
    EXPECT_THROW(b.validate(p), InputError);
    b = StiffnessModel::identity(p);
    b.blocks[0](2, 2) = -1;
    EXPECT_THROW(b.validate(p), InputError);
}

TEST(Prestress, FixedStiffnessIsNotTheCriterion)
{
    // The energy Hessian is bounded above on the flex by the restricted form,
    // which is negative for a negative stress however stiff the springs are.
    const auto p = fixture("degree3");
    const RigiditySystem sys = RigiditySystem::build(p);
    const VecX omega = Vec3(0, 0, -1);
    const EnergyReport e = energyReport(sys, StiffnessModel::identity(p, 1e6), omega);
    EXPECT_TRUE(e.gradientVanishes);
    const VecX v = VecX::Ones(3).normalized();
    const double onFlex = v.dot(e.hessian * v);
    EXPECT_NEAR(onFlex, -std::sqrt(3.0) / 6.0, 1e-6);
    EXPECT_LE(e.hessianEigenvalues(0), onFlex + 1e-9);
    EXPECT_FALSE(isPrestressStable(sys, omega, StiffnessModel::identity(p, 1e6)).stable);
}

TEST(Prestress, SearchResults)
{
    const StabilizingSearch d3 = findStabilizingStress(rigiditySystem("degree3"));
    ASSERT_TRUE(d3.omega.has_value());
    EXPECT_TRUE(d3.exact);
    EXPECT_GT((*d3.omega)(2), 0.0);
    EXPECT_FALSE(findStabilizingStress(rigiditySystem("degree5-hole")).omega.has_value());
    EXPECT_FALSE(findStabilizingStress(rigiditySystem("degree4-cone")).omega.has_value());
    const RigiditySystem tt = rigiditySystem("triangulated-tetrahedron");
    const StabilizingSearch found = findStabilizingStress(tt);
    ASSERT_TRUE(found.omega.has_value());
    EXPECT_LT((tt.ja.transpose() * *found.omega).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(found.bestValue, 1e-9);
}

TEST(SecondOrder, ConeExtends)
{
    const RigiditySystem sys = rigiditySystem("degree4-cone");
    ASSERT_EQ(sys.m(), 1);
    const VecX f = sys.flexes.vectors.col(0);
    const SecondOrderExtension e = extendToSecondOrder(sys, f);
    ASSERT_TRUE(e.extendable);
    EXPECT_LT((sys.ja * f).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((sys.ha.quadratic(f) + sys.ja * e.rhoSecond).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SecondOrder, Degree3IsBlocked)
{
    const RigiditySystem sys = rigiditySystem("degree3");
    const SecondOrderExtension e = extendToSecondOrder(sys, VecX::Ones(3));
    ASSERT_FALSE(e.extendable);
    EXPECT_LT((sys.ja.transpose() * e.witness).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(e.witnessValue, 0.0);
    EXPECT_NEAR(e.witnessValue, std::sqrt(3.0) / 2.0, 1e-9);
}

TEST(SecondOrder, FlexIsValidated)
{
    const RigiditySystem sys = rigiditySystem("degree3");
    EXPECT_THROW(extendToSecondOrder(sys, Vec3(1, 0, 0)), InputError);
    EXPECT_THROW(extendToSecondOrder(sys, Vec3(0, 0, 0)), InputError);
    EXPECT_THROW(extendToSecondOrder(sys, VecX::Ones(2)), InputError);
}

TEST(SecondOrder, DecisionPathsAgree)
{
    std::mt19937_64 rng(33);
    for (const auto& name : test::allNames()) {
        const RigiditySystem sys = rigiditySystem(name);
        if (sys.m() == 0) {
            continue;
        }
        for (int trial = 0; trial < 100; ++trial) {
            const VecX f = sys.flexes.vectors * test::unitGaussian(rng, sys.m());
            const bool byForms = extendableByForms(sys, f);
            EXPECT_EQ(byForms, extendableByRank(sys, f)) << name;
            const SecondOrderExtension e = extendToSecondOrder(sys, f);
            EXPECT_EQ(e.extendable, byForms);
            if (!e.extendable) {
                EXPECT_GT(e.witnessValue, 0.0) << name;
            }
        }
    }
}

TEST(SecondOrder, Classification)
{
    EXPECT_TRUE(secondOrderClassify(rigiditySystem("degree3")).rigid);
    EXPECT_TRUE(secondOrderClassify(rigiditySystem("triangulated-tetrahedron")).rigid);
    EXPECT_TRUE(secondOrderClassify(rigiditySystem("tetrahedron")).rigid);
    for (const auto& name : {"degree4-cone", "degree5-hole", "fig3"}) {
        const RigiditySystem sys = rigiditySystem(name);
        const SecondOrderResult r = secondOrderClassify(sys);
        EXPECT_FALSE(r.rigid) << name;
        ASSERT_TRUE(r.witness.has_value()) << name;
        ASSERT_TRUE(r.witness->extendable) << name;
        const VecX& f = r.witness->rhoPrime;
        EXPECT_LT((sys.ja * f).cwiseAbs().maxCoeff(), 1e-8) << name;
        EXPECT_LT((sys.ha.quadratic(f) + sys.ja * r.witness->rhoSecond).cwiseAbs().maxCoeff(), 1e-8) << name;
    }
    EXPECT_FALSE(secondOrderClassify(rigiditySystem("fig3")).exact);
}

TEST(SecondOrder, SamplingIsDeterministic)
{
    const RigiditySystem sys = rigiditySystem("fig3");
    SamplingOptions o;
    o.samples = 500;
    o.seed = 7;
    const SecondOrderResult a = secondOrderClassify(sys, o);
    const SecondOrderResult b = secondOrderClassify(sys, o);
    ASSERT_EQ(a.witness.has_value(), b.witness.has_value());
    if (a.witness) {
        EXPECT_EQ(a.witness->rhoPrime, b.witness->rhoPrime);
    }
}

TEST(SecondOrder, SpherePointsAreUnit)
{
    for (int dim : {1, 2, 4, 7}) {
        for (const VecX& x : detail::spherePoints(dim, 50, 3)) {
            EXPECT_NEAR(x.norm(), 1.0, 1e-12);
        }
    }
}

TEST(Ladder, HoldsOnBuiltIns)
{
    for (const auto& name : test::builtInNames()) {
        const AnalysisReport r = analyze(fixture(name));
        EXPECT_TRUE(r.ladderConsistent) << name;
        if (r.firstOrderRigid) {
            EXPECT_TRUE(r.prestressStable) << name;
        }
        if (r.prestressStable) {
            EXPECT_TRUE(r.secondOrderRigid) << name;
        }
    }
}

TEST(Report, JsonRoundTrip)
{
    for (const auto& name : test::builtInNames()) {
        const AnalysisReport r = analyze(fixture(name));
        const nlohmann::json j = r;
        EXPECT_EQ(j.get<AnalysisReport>(), r) << name;
        EXPECT_EQ(nlohmann::json::parse(j.dump()).get<AnalysisReport>(), r) << name;
    }
}

#include "support.hpp"

#include <gtest/gtest.h>

using namespace ori;
using ori::test::fixture;

namespace
{

BarJointFramework cube()
{
    BarJointFramework fw;
    for (int i = 0; i < 8; ++i) {
        fw.joints.push_back(Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
    }
    for (int i = 0; i < 8; ++i) {
        for (int b = 0; b < 3; ++b) {
            const int j = i ^ (1 << b);
            if (i < j) {
                fw.addBar(i, j);
            }
        }
    }
    return fw;
}

}  // namespace

TEST(Framework, SingleBarInTension)
{
    BarJointFramework fw;
    fw.joints = {Vec3(0, 0, 0), Vec3(2, 0, 0)};
    fw.addBar(0, 1);
    VecX f = VecX::Zero(6);
    f(0) = -1;
    f(3) = 1;
    const FrameworkResolution r = frameworkResolve(fw, f);
    ASSERT_TRUE(r.resolvable);
    EXPECT_NEAR(r.stress(0), -0.5, 1e-12);
}

TEST(Framework, TransversePairNeedsEquilibrium)
{
    BarJointFramework fw;
    fw.joints = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    fw.addBar(0, 1);
    VecX f = VecX::Zero(6);
    f(1) = 1;
    f(4) = -1;
    EXPECT_THROW(frameworkResolve(fw, f), InputError);
    ResolveOptions o;
    o.requireEquilibrium = false;
    const FrameworkResolution r = frameworkResolve(fw, f, o);
    EXPECT_FALSE(r.resolvable);
    EXPECT_GT(std::abs(r.witnessFlex.dot(f)), 1e-8);
}

TEST(Framework, TrivialFlexesAreAnnihilated)
{
    for (const auto& name : test::allNames()) {
        const DoubleCone dc = doubleCone(fixture(name));
        const MatX r = frameworkRigidityMatrix(dc.framework);
        EXPECT_LT(maxAbs(r * trivialFlexes(dc.framework)), 1e-10) << name;
    }
}

TEST(Framework, CubeIsFlexible)
{
    const FrameworkRigidity r = frameworkFirstOrderRigid(cube());
    EXPECT_FALSE(r.rigid);
    EXPECT_EQ(r.nontrivialFlexes, 3 * 8 - 6 - 12);
}

TEST(Framework, PlanarFrameworkIsRejected)
{
    BarJointFramework fw;
    fw.joints = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    fw.addBar(0, 1);
    fw.addBar(1, 2);
    fw.addBar(2, 0);
    EXPECT_THROW(frameworkFirstOrderRigid(fw), InputError);
}

TEST(DoubleConing, EachConedPanelIsRigid)
{
    for (const auto& name : test::allNames()) {
        const auto p = fixture(name);
        const DoubleCone dc = doubleCone(p);
        for (int k = 0; k < p.K; ++k) {
            EXPECT_TRUE(frameworkFirstOrderRigid(conedPanel(dc, p, k)).rigid) << name << " panel " << k;
        }
    }
}

TEST(DoubleConing, Construction)
{
    const auto p = fixture("fig3");
    const DoubleCone dc = doubleCone(p);
    const CountingReport c = countingReport(p, 4);
    EXPECT_EQ(dc.framework.jointCount(), c.frameworkJoints);
    EXPECT_EQ(dc.framework.barCount(), c.frameworkBars);
    EXPECT_EQ(static_cast<int>(dc.creaseBarOfColumn.size()), p.J);
    for (int k = 0; k < p.K; ++k) {
        const auto [up, down] = dc.apexes[k];
        EXPECT_NEAR((dc.framework.joints[up] - dc.centroids[k]).norm(), dc.heights[k], 1e-12);
        EXPECT_LT((dc.framework.joints[up] + dc.framework.joints[down] - 2 * dc.centroids[k]).norm(), 1e-12);
    }
    for (int j = 0; j < p.J; ++j) {
        const auto& [a, b] = dc.framework.bars[dc.creaseBarOfColumn[j]];
        const auto& c = p.creases[p.innerCreaseIds[j]];
        EXPECT_TRUE((a == c.endpoints[0] && b == c.endpoints[1]) || (a == c.endpoints[1] && b == c.endpoints[0]));
    }
}

TEST(DoubleConing, CorrespondenceWithOrigami)
{
    for (const auto& name : test::allNames()) {
        const auto p = fixture(name);
        if (p.K == 0) {
            continue;
        }
        const CorrespondenceReport r = correspondenceCheck(p);
        EXPECT_TRUE(r.agree) << name;
        EXPECT_TRUE(r.countsMatch) << name;
    }
}

TEST(GeneralLoad, TetrahedronResolvesEquilibriumWrenches)
{
    const auto p = fixture("tetrahedron");
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PanelWrench> w(p.K);
        Vec3 f = Vec3::Zero(), t = Vec3::Zero();
        for (int k = 0; k + 1 < p.K; ++k) {
            w[k].force = test::gaussian(rng, 3);
            w[k].torque = test::gaussian(rng, 3);
        }
        // close the wrench balance with the last panel
        Vec3 centroid = Vec3::Zero();
        for (int v : p.panels[p.K - 1].vertexCycle) {
            centroid += p.vertices[v].position;
        }
        centroid /= static_cast<double>(p.panels[p.K - 1].vertexCycle.size());
        for (int k = 0; k + 1 < p.K; ++k) {
            Vec3 ck = Vec3::Zero();
            for (int v : p.panels[k].vertexCycle) {
                ck += p.vertices[v].position;
            }
            ck /= static_cast<double>(p.panels[k].vertexCycle.size());
            f += w[k].force;
            t += w[k].torque + ck.cross(w[k].force);
        }
        w.back().force = -f;
        w.back().torque = -t - centroid.cross(-f);
        const GeneralLoadResult r = generalLoadResolve(p, w);
        EXPECT_TRUE(r.resolvable);
        EXPECT_EQ(r.creaseBarForces.size(), p.J);
    }
}

TEST(GeneralLoad, ZeroWrenchGivesZeroStress)
{
    const auto p = fixture("triangulated-tetrahedron");
    const GeneralLoadResult r = generalLoadResolve(p, std::vector<PanelWrench>(p.K));
    ASSERT_TRUE(r.resolvable);
    EXPECT_LT(r.barStress.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GeneralLoad, MechanismIsExcited)
{
    // Opposite torques about crease 0 on its two panels do work on the folding motion
    const auto p = fixture("degree3");
    const Crease& c = p.creases[p.innerCreaseIds[0]];
    const Vec3 axis = (p.vertices[c.endpoints[1]].position - p.vertices[c.endpoints[0]].position).normalized();
    std::vector<PanelWrench> w(p.K);
    w[c.adjacentPanels[0]].torque = axis;
    w[c.adjacentPanels[1]].torque = -axis;
    const GeneralLoadResult r = generalLoadResolve(p, w);
    EXPECT_FALSE(r.resolvable);
    EXPECT_GT(r.witnessFlex.norm(), 0.5);
}

TEST(GeneralLoad, UnbalancedWrenchIsRejected)
{
    const auto p = fixture("tetrahedron");
    std::vector<PanelWrench> w(p.K);
    w[0].force = Vec3(1, 0, 0);
    EXPECT_THROW(generalLoadResolve(p, w), InputError);
    EXPECT_THROW(generalLoadResolve(p, std::vector<PanelWrench>(2)), InputError);
}

#pragma once

#include "statics.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ori
{

struct BarJointFramework {
    std::vector<Vec3> joints;
    std::vector<std::pair<int, int>> bars;
    std::vector<double> restLengths;
    /** Indices of bars that correspond to inner creases */
    std::vector<int> creaseBars;

    void addBar(int i, int j)
    {
        bars.push_back({i, j});
        restLengths.push_back((joints[i] - joints[j]).norm());
    }
    int jointCount() const { return static_cast<int>(joints.size()); }
    int barCount() const { return static_cast<int>(bars.size()); }
};

/** Extra bookkeeping for a double-coning framework built from a creased paper */
struct DoubleCone {
    BarJointFramework framework;
    /** Apex joints (above, below) of each panel */
    std::vector<std::pair<int, int>> apexes;
    /** Centroid, unit normal and apex height of each panel */
    std::vector<Vec3> centroids;
    std::vector<Vec3> normals;
    std::vector<double> heights;
    /** Bar index of each inner crease, by Jacobian column */
    std::vector<int> creaseBarOfColumn;
    /** Bar index of each (panel, vertex, side) apex bar; side 0 above, 1 below */
    std::map<std::tuple<int, int, int>, int> apexBar;
};

/** e x 3v matrix with (p_i - p_j) in joint i's columns and (p_j - p_i) in joint j's */
inline MatX frameworkRigidityMatrix(const BarJointFramework& fw, double tol = 1e-12)
{
    MatX r = MatX::Zero(fw.barCount(), 3 * fw.jointCount());
    for (int b = 0; b < fw.barCount(); ++b) {
        const auto [i, j] = fw.bars[b];
        const Vec3 d = fw.joints[i] - fw.joints[j];
        if (d.norm() <= tol) {
            throw InputError("bar " + std::to_string(b) + " joins coincident joints");
        }
        r.block<1, 3>(b, 3 * i) = d.transpose();
        r.block<1, 3>(b, 3 * j) = -d.transpose();
    }
    return r;
}

/** The six rigid-motion velocity fields, one per column */
inline MatX trivialFlexes(const BarJointFramework& fw)
{
    const int v = fw.jointCount();
    MatX t = MatX::Zero(3 * v, 6);
    for (int i = 0; i < v; ++i) {
        t.block<3, 3>(3 * i, 0) = Mat3::Identity();
        // velocity w x p for the unit rotation axes
        t.block<3, 3>(3 * i, 3) = -skew(fw.joints[i]);
    }
    return t;
}

/** Affine dimension of the joint set */
inline int affineSpan(const BarJointFramework& fw, double relTol = 1e-9)
{
    if (fw.joints.empty()) {
        return -1;
    }
    MatX d(3, fw.jointCount());
    for (int i = 0; i < fw.jointCount(); ++i) {
        d.col(i) = fw.joints[i] - fw.joints[0];
    }
    return static_cast<int>(numericalRank(d, relTol));
}

struct FrameworkRigidity {
    bool rigid{false};
    int rank{0};
    /** 3v - 6 - rank */
    int nontrivialFlexes{0};
    /** e - rank */
    int selfStresses{0};
};

inline FrameworkRigidity frameworkFirstOrderRigid(const BarJointFramework& fw, double relTol = 1e-10)
{
    if (affineSpan(fw) < 3) {
        throw InputError("framework joints do not span 3-space; the 3v-6 rank test does not apply");
    }
    FrameworkRigidity out;
    out.rank = static_cast<int>(numericalRank(frameworkRigidityMatrix(fw), relTol));
    out.nontrivialFlexes = 3 * fw.jointCount() - 6 - out.rank;
    out.selfStresses = fw.barCount() - out.rank;
    out.rigid = out.nontrivialFlexes == 0;
    return out;
}

struct FrameworkResolution {
    bool resolvable{false};
    /** Stress per bar (force per unit length, positive in compression) */
    VecX stress;
    /** Flex on which the load does work, when unresolvable */
    VecX witnessFlex;
    double residual{0.0};
};

struct ResolveOptions {
    bool requireEquilibrium{true};
    double relTol{1e-10};
};

inline bool isEquilibriumLoad(const BarJointFramework& fw, const VecX& f, double tol = 1e-9)
{
    Vec3 force = Vec3::Zero(), torque = Vec3::Zero();
    double scale = 1.0;
    for (int i = 0; i < fw.jointCount(); ++i) {
        const Vec3 fi = f.segment<3>(3 * i);
        force += fi;
        torque += fw.joints[i].cross(fi);
        scale = std::max(scale, fi.norm() * std::max(1.0, fw.joints[i].norm()));
    }
    return force.norm() <= tol * scale && torque.norm() <= tol * scale;
}

/**
 * @brief Solve R_G^T sigma + F = 0 by minimum norm
 *
 * F stacks one 3-vector per joint. With the equilibrium requirement off,
 * a load that moves the framework rigidly is reported as unresolvable with
 * that rigid motion as witness.
 */
inline FrameworkResolution frameworkResolve(const BarJointFramework& fw, const VecX& f, const ResolveOptions& opts = {})
{
    if (f.size() != 3 * fw.jointCount()) {
        throw InputError("load must have 3 entries per joint");
    }
    if (opts.requireEquilibrium && !isEquilibriumLoad(fw, f)) {
        throw InputError("joint forces are not in equilibrium");
    }
    const MatX r = frameworkRigidityMatrix(fw);
    const MatX rt = r.transpose();
    RankRevealingSvd svd(rt, opts.relTol);
    FrameworkResolution out;
    const VecX sigma = svd.solve(-f);
    out.residual = f.size() == 0 ? 0.0 : (rt * sigma + f).cwiseAbs().maxCoeff();
    if (out.residual <= 1e-8 * (1.0 + (f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff()))) {
        out.resolvable = true;
        out.stress = sigma;
    } else {
        const MatX k = RankRevealingSvd(r, opts.relTol).kernel();
        out.witnessFlex = (k * (k.transpose() * f)).normalized();
    }
    return out;
}

/**
 * @brief Double-coning framework of a creased paper
 *
 * Joints are the paper vertices followed by two apexes per panel at the
 * centroid plus and minus the mean edge length along the panel normal.
 * Bars are the distinct panel edges followed by the apex bars.
 */
inline DoubleCone doubleCone(const CreasedPaper& paper)
{
    DoubleCone dc;
    auto& fw = dc.framework;
    for (const auto& v : paper.vertices) {
        fw.joints.push_back(v.position);
    }
    std::map<std::pair<int, int>, int> edgeBar;
    for (const auto& p : paper.panels) {
        const auto& cyc = p.vertexCycle;
        for (size_t i = 0; i < cyc.size(); ++i) {
            const int a = cyc[i];
            const int b = cyc[(i + 1) % cyc.size()];
            const auto key = std::minmax(a, b);
            if (edgeBar.count(key) == 0) {
                edgeBar[key] = fw.barCount();
                fw.addBar(a, b);
            }
        }
    }
    dc.creaseBarOfColumn.assign(paper.J, -1);
    for (int j = 0; j < paper.J; ++j) {
        const Crease& c = paper.creases[paper.innerCreaseIds[j]];
        const int bar = edgeBar.at(std::minmax(c.endpoints[0], c.endpoints[1]));
        dc.creaseBarOfColumn[j] = bar;
        fw.creaseBars.push_back(bar);
    }
    for (int p = 0; p < paper.K; ++p) {
        const auto& cyc = paper.panels[p].vertexCycle;
        Vec3 centroid = Vec3::Zero();
        double edgeSum = 0.0;
        for (size_t i = 0; i < cyc.size(); ++i) {
            centroid += paper.vertices[cyc[i]].position;
            edgeSum += (paper.vertices[cyc[(i + 1) % cyc.size()]].position - paper.vertices[cyc[i]].position).norm();
        }
        centroid /= static_cast<double>(cyc.size());
        const double h = edgeSum / static_cast<double>(cyc.size());
        const Vec3 n = detail::panelNormal(paper, p);
        const int up = fw.jointCount();
        fw.joints.push_back(centroid + h * n);
        fw.joints.push_back(centroid - h * n);
        dc.apexes.push_back({up, up + 1});
        dc.centroids.push_back(centroid);
        dc.normals.push_back(n);
        dc.heights.push_back(h);
        for (int v : cyc) {
            dc.apexBar[{p, v, 0}] = fw.barCount();
            fw.addBar(up, v);
            dc.apexBar[{p, v, 1}] = fw.barCount();
            fw.addBar(up + 1, v);
        }
    }
    return dc;
}

/** Framework of one coned panel on its own (panel vertices plus its two apexes) */
inline BarJointFramework conedPanel(const DoubleCone& dc, const CreasedPaper& paper, int panel)
{
    BarJointFramework fw;
    std::map<int, int> local;
    for (int v : paper.panels[panel].vertexCycle) {
        local[v] = fw.jointCount();
        fw.joints.push_back(dc.framework.joints[v]);
    }
    const auto [up, down] = dc.apexes[panel];
    const int lu = fw.jointCount();
    fw.joints.push_back(dc.framework.joints[up]);
    fw.joints.push_back(dc.framework.joints[down]);
    const auto& cyc = paper.panels[panel].vertexCycle;
    for (size_t i = 0; i < cyc.size(); ++i) {
        fw.addBar(local[cyc[i]], local[cyc[(i + 1) % cyc.size()]]);
    }
    for (int v : cyc) {
        fw.addBar(lu, local[v]);
        fw.addBar(lu + 1, local[v]);
    }
    return fw;
}

struct CorrespondenceReport {
    bool origamiRigid{false};
    bool frameworkRigid{false};
    int origamiFlexes{0};
    int frameworkFlexes{0};
    /** Self-stress count predicted from the framework counts */
    int s2Predicted{0};
    /** dim ker(R_G^T) of the generated framework */
    int s2Framework{0};
    /** Self-stress count of the origami model */
    int s1{0};
    bool countsMatch{false};
    bool agree{false};
};

/**
 * @brief Compare origami and double-coning first-order rigidity
 *
 * Also checks the framework self-stress count against its formula and
 * against the origami count shifted by 6(chi - 1 + H).
 */
inline CorrespondenceReport correspondenceCheck(const CreasedPaper& paper, double relTol = 1e-10)
{
    CorrespondenceReport r;
    const MatX ja = assembleJacobian(paper);
    const int rk = static_cast<int>(numericalRank(ja, relTol));
    r.origamiFlexes = paper.J - rk;
    r.origamiRigid = r.origamiFlexes == 0;
    r.s1 = static_cast<int>(ja.rows()) - rk;
    const DoubleCone dc = doubleCone(paper);
    const FrameworkRigidity fr = frameworkFirstOrderRigid(dc.framework, relTol);
    r.frameworkFlexes = fr.nontrivialFlexes;
    r.frameworkRigid = fr.rigid;
    r.s2Framework = fr.selfStresses;
    const CountingReport counts = countingReport(paper, r.origamiFlexes);
    r.s2Predicted = counts.s2;
    const int s1Formula = counts.s1 - 3 * paper.reclassifiedHoles();
    r.countsMatch = r.s2Framework == r.s2Predicted && counts.s1 - counts.s2 == counts.closedSurfaceOffset &&
                    r.s1 == s1Formula && dc.framework.jointCount() == counts.frameworkJoints &&
                    dc.framework.barCount() == counts.frameworkBars;
    r.agree = r.origamiRigid == r.frameworkRigid && r.origamiFlexes == r.frameworkFlexes;
    return r;
}

/** Force and torque on one panel, torque taken about the panel's vertex centroid */
struct PanelWrench {
    Vec3 force{Vec3::Zero()};
    Vec3 torque{Vec3::Zero()};
};

struct GeneralLoadResult {
    bool resolvable{false};
    /** Equivalent joint forces, 3 per framework joint */
    VecX jointForces;
    VecX barStress;
    /** Axial force of each crease bar, by Jacobian column */
    VecX creaseBarForces;
    /** Resultant force of the apex bars of each panel on each of its vertices */
    std::map<std::pair<int, int>, Vec3> vertexReactions;
    VecX witnessFlex;
};

/**
 * @brief Resolve per-panel forces and torques through the double-coning framework
 *
 * Each panel force is applied at its upper apex. The remaining normal torque
 * becomes in-plane forces on the panel vertices and the remaining in-plane
 * torque a couple on the two apexes; the framework is then solved by
 * minimum norm.
 */
inline GeneralLoadResult generalLoadResolve(const CreasedPaper& paper, const std::vector<PanelWrench>& wrenches,
                                            double relTol = 1e-10)
{
    if (static_cast<int>(wrenches.size()) != paper.K) {
        throw InputError("need one wrench per panel");
    }
    const DoubleCone dc = doubleCone(paper);
    const auto& fw = dc.framework;
    VecX f = VecX::Zero(3 * fw.jointCount());
    for (int p = 0; p < paper.K; ++p) {
        const Vec3 c = dc.centroids[p];
        const Vec3 n = dc.normals[p];
        const double h = dc.heights[p];
        const auto [up, down] = dc.apexes[p];
        const Vec3& force = wrenches[p].force;
        f.segment<3>(3 * up) += force;
        Vec3 rest = wrenches[p].torque - (fw.joints[up] - c).cross(force);

        const auto& cyc = paper.panels[p].vertexCycle;
        std::vector<Vec3> perp;
        double norm2 = 0.0;
        for (int v : cyc) {
            const Vec3 r = fw.joints[v] - c;
            perp.push_back(r - n * n.dot(r));
            norm2 += perp.back().squaredNorm();
        }
        const double tn = n.dot(rest);
        for (size_t i = 0; i < cyc.size(); ++i) {
            const Vec3 fi = tn * n.cross(perp[i]) / norm2;
            f.segment<3>(3 * cyc[i]) += fi;
            rest -= (fw.joints[cyc[i]] - c).cross(fi);
        }
        const Vec3 couple = rest.cross(n) / (2.0 * h);
        f.segment<3>(3 * up) += couple;
        f.segment<3>(3 * down) -= couple;
    }
    if (!isEquilibriumLoad(fw, f, 1e-8)) {
        throw InputError("panel wrenches are not in equilibrium");
    }
    GeneralLoadResult out;
    out.jointForces = f;
    const FrameworkResolution res = frameworkResolve(fw, f, {false, relTol});
    out.resolvable = res.resolvable;
    if (!res.resolvable) {
        out.witnessFlex = res.witnessFlex;
        return out;
    }
    out.barStress = res.stress;
    out.creaseBarForces = VecX::Zero(paper.J);
    for (int j = 0; j < paper.J; ++j) {
        const int b = dc.creaseBarOfColumn[j];
        out.creaseBarForces(j) = res.stress(b) * fw.restLengths[b];
    }
    for (const auto& [key, bar] : dc.apexBar) {
        const auto [p, v, side] = key;
        const auto [i, j] = fw.bars[bar];
        const int other = i == v ? j : i;
        auto it = out.vertexReactions.try_emplace({p, v}, Vec3::Zero()).first;
        it->second += res.stress(bar) * (fw.joints[v] - fw.joints[other]);
    }
    return out;
}

}  // namespace ori

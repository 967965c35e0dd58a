#pragma once

#include "derivatives.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ori
{

inline Eigen::Index rank(const MatX& ja, double relTol = 1e-10) { return numericalRank(ja, relTol); }

/** Orthonormal basis of ker(JA), one flex per column */
struct FlexBasis {
    MatX vectors;
    int dimension() const { return static_cast<int>(vectors.cols()); }
};

/** Orthonormal basis of ker(JA^T), one self-stress per column */
struct StressBasis {
    MatX vectors;
    int dimension() const { return static_cast<int>(vectors.cols()); }
};

inline FlexBasis firstOrderFlexes(const MatX& ja, double relTol = 1e-10)
{
    MatX k = RankRevealingSvd(ja, relTol).kernel();
    canonicalizeColumnSigns(k);
    return {k};
}

inline StressBasis selfStresses(const MatX& ja, double relTol = 1e-10)
{
    MatX k = RankRevealingSvd(ja, relTol).cokernel();
    canonicalizeColumnSigns(k);
    return {k};
}

/** Outcome of resolving a crease-torque load */
struct LoadResolution {
    bool resolvable{false};
    /** Minimum-norm particular stress (empty when unresolvable) */
    VecX stress;
    /** Basis of the homogeneous solutions */
    StressBasis selfStresses;
    /** Flex on which the load does work, when unresolvable */
    VecX witnessFlex;
    double residual{0.0};
};

/**
 * @brief Solve JA^T sigma + l = 0 by minimum norm
 *
 * A load is resolvable when the least-squares residual is within
 * 1e-8 (1 + |l|_inf); otherwise the reported witness is the projection of
 * the load on the flex space, which is the direction doing the most work.
 */
inline LoadResolution resolveLoad(const MatX& ja, const VecX& load, double relTol = 1e-10)
{
    if (load.size() != ja.cols()) {
        throw InputError("load has length " + std::to_string(load.size()) + ", expected " + std::to_string(ja.cols()));
    }
    const MatX jt = ja.transpose();
    RankRevealingSvd svd(jt, relTol);
    LoadResolution out;
    const VecX sigma = svd.solve(-load);
    out.residual = load.size() == 0 ? 0.0 : (jt * sigma + load).cwiseAbs().maxCoeff();
    const double scale = 1.0 + (load.size() == 0 ? 0.0 : load.cwiseAbs().maxCoeff());
    out.selfStresses = selfStresses(ja, relTol);
    if (out.residual <= 1e-8 * scale) {
        out.resolvable = true;
        out.stress = sigma;
    } else {
        const MatX f = firstOrderFlexes(ja, relTol).vectors;
        VecX w = f * (f.transpose() * load);
        out.witnessFlex = w.normalized();
    }
    return out;
}

/** Work-conjugacy test: resolvable iff the load is orthogonal to every flex */
inline bool loadOrthogonalToFlexes(const MatX& ja, const VecX& load, double relTol = 1e-10)
{
    const MatX f = firstOrderFlexes(ja, relTol).vectors;
    if (f.cols() == 0) {
        return true;
    }
    const double scale = 1.0 + (load.size() == 0 ? 0.0 : load.cwiseAbs().maxCoeff());
    return (f.transpose() * load).cwiseAbs().maxCoeff() <= 1e-8 * scale;
}

enum class StaticClass { StaticallyRigid, Flexible };

struct StaticClassification {
    StaticClass verdict{StaticClass::Flexible};
    int rank{0};
    int m{0};
    int s{0};
    /** 3I - J + 6H + m */
    int predictedS{0};
    /** s equals the prediction after removing three rows per concurrent hole */
    bool identityHolds{false};
};

inline StaticClassification classifyStatic(const CreasedPaper& paper, const MatX& ja, double relTol)
{
    StaticClassification c;
    c.rank = static_cast<int>(rank(ja, relTol));
    c.m = paper.J - c.rank;
    c.s = static_cast<int>(ja.rows()) - c.rank;
    c.predictedS = 3 * paper.I - paper.J + 6 * paper.H + c.m;
    c.identityHolds = c.s == c.predictedS - 3 * paper.reclassifiedHoles();
    c.verdict = c.m == 0 ? StaticClass::StaticallyRigid : StaticClass::Flexible;
    return c;
}

inline StaticClassification classifyStatic(const CreasedPaper& paper)
{
    return classifyStatic(paper, assembleJacobian(paper), paper.tol.rank);
}

/**
 * @brief Self-stress counts from the three derivations
 *
 * s2 comes from the double-coning framework counts (5J + 3Z bars,
 * I + Z + 2K joints). For closed surfaces the vertex loops carry six extra
 * dependent rows, so the identity generalizes to s1 - s2 = 6(chi - 1 + H),
 * which vanishes for any disk with holes.
 */
struct CountingReport {
    int s1{0};
    int s2{0};
    int s3{0};
    int frameworkJoints{0};
    int frameworkBars{0};
    /** 6(chi - 1 + H): zero for disks, 6 for closed surfaces */
    int closedSurfaceOffset{0};
    bool identityHolds{false};
};

inline CountingReport countingReport(const CreasedPaper& paper, int m)
{
    CountingReport r;
    r.s1 = 3 * paper.I - paper.J + 6 * paper.H + m;
    r.s3 = 6 * paper.I - paper.J + 6 * paper.H + m;
    r.frameworkJoints = paper.I + paper.Z + 2 * paper.K;
    r.frameworkBars = 5 * paper.J + 3 * paper.Z;
    r.s2 = paper.K == 0 ? 0 : r.frameworkBars - 3 * r.frameworkJoints + 6 + m;
    r.closedSurfaceOffset = paper.K == 0 ? 0 : 6 * (paper.euler - 1 + paper.H);
    r.identityHolds = r.s1 - r.s2 == r.closedSurfaceOffset && r.s1 == r.s3 - 3 * paper.I;
    return r;
}

}  // namespace ori

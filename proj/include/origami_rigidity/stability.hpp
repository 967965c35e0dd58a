#pragma once

#include "statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace ori
{

/**
 * @brief Everything the stability questions need about one configuration
 *
 * Built once from a creased paper; all members are read-only afterwards.
 */
struct RigiditySystem {
    MatX ja;
    Hessian ha;
    FlexBasis flexes;
    StressBasis stresses;
    MatX rowSpace;
    int rank{0};
    Tolerances tol;

    int rows() const { return static_cast<int>(ja.rows()); }
    int cols() const { return static_cast<int>(ja.cols()); }
    int m() const { return flexes.dimension(); }
    int s() const { return stresses.dimension(); }

    static RigiditySystem build(const CreasedPaper& paper)
    {
        RigiditySystem sys;
        sys.tol = paper.tol;
        sys.ja = assembleJacobian(paper);
        sys.ha = assembleHessian(paper);
        const RankRevealingSvd svd(sys.ja, sys.tol.rank);
        sys.rank = static_cast<int>(svd.rank());
        sys.flexes = {svd.kernel()};
        canonicalizeColumnSigns(sys.flexes.vectors);
        sys.stresses = {svd.cokernel()};
        canonicalizeColumnSigns(sys.stresses.vectors);
        sys.rowSpace = svd.rowSpace();
        return sys;
    }
};

/** @brief Block-diagonal positive-definite stiffness, one block per unit */
struct StiffnessModel {
    std::vector<MatX> blocks;

    static StiffnessModel identity(const CreasedPaper& paper, double scale = 1.0)
    {
        StiffnessModel b;
        for (const auto& u : paper.units) {
            b.blocks.push_back(scale * MatX::Identity(u.rowCount(), u.rowCount()));
        }
        return b;
    }

    int size() const
    {
        int n = 0;
        for (const auto& b : blocks) {
            n += static_cast<int>(b.rows());
        }
        return n;
    }

    MatX dense() const
    {
        const int n = size();
        MatX d = MatX::Zero(n, n);
        int off = 0;
        for (const auto& b : blocks) {
            d.block(off, off, b.rows(), b.cols()) = b;
            off += static_cast<int>(b.rows());
        }
        return d;
    }

    /** Throws unless every block matches its unit and is symmetric positive definite */
    void validate(const CreasedPaper& paper) const
    {
        if (blocks.size() != paper.units.size()) {
            throw InputError("stiffness model needs one block per unit");
        }
        for (size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = blocks[i];
            if (b.rows() != paper.units[i].rowCount() || b.cols() != b.rows()) {
                throw InputError("stiffness block " + std::to_string(i) + " has the wrong size");
            }
            if (maxAbs(b - b.transpose()) > 1e-12 * (1.0 + maxAbs(b))) {
                throw InputError("stiffness block " + std::to_string(i) + " is not symmetric");
            }
            if (symmetricEigenvalues(b)(0) <= 0.0) {
                throw InputError("stiffness block " + std::to_string(i) + " is not positive definite");
            }
        }
    }
};

/** Symmetrized contraction of the Hessian with a stress */
inline MatX geometricStiffness(const VecX& omega, const Hessian& ha) { return symmetricPart(ha.contract(omega)); }

/** F^T M F on an orthonormal flex basis */
inline MatX restrictedQuadraticForm(const MatX& m, const FlexBasis& flexes)
{
    if (flexes.dimension() == 0) {
        return MatX::Zero(0, 0);
    }
    return symmetricPart(flexes.vectors.transpose() * m * flexes.vectors);
}

inline void requireSelfStress(const RigiditySystem& sys, const VecX& omega)
{
    if (omega.size() != sys.rows()) {
        throw InputError("stress has length " + std::to_string(omega.size()) + ", expected " + std::to_string(sys.rows()));
    }
    if (sys.cols() == 0 || omega.size() == 0) {
        return;
    }
    const double err = (sys.ja.transpose() * omega).cwiseAbs().maxCoeff();
    if (err > 1e-8 * (1.0 + omega.cwiseAbs().maxCoeff())) {
        throw InputError("the given stress is not a self-stress (|JA^T w| = " + std::to_string(err) + ")");
    }
}

struct PrestressVerdict {
    bool stable{false};
    /** Eigenvalues of the restricted geometric stiffness, ascending */
    VecX restrictedEigenvalues;
    /** +inf when there are no flexes */
    double smallestRestricted{std::numeric_limits<double>::infinity()};
    /** A scaling t for which JA^T B JA + t G(w) is certified positive definite */
    std::optional<double> certifiedT;
    /** Smallest eigenvalue of the tangent stiffness at the certified t */
    double tangentMinEigenvalue{0.0};
};

/**
 * @brief Pre-stress stability of a self-stress
 *
 * Stable when the restricted form is positive definite. The certified
 * scaling follows from splitting a vector into flex and complement parts:
 * with mu the smallest restricted eigenvalue, delta the smallest nonzero
 * eigenvalue of JA^T B JA and g = |G|, any t < mu delta / (g (g + mu))
 * makes the tangent stiffness positive definite; half of that is reported.
 */
inline PrestressVerdict isPrestressStable(const RigiditySystem& sys, const VecX& omega, const StiffnessModel& stiffness)
{
    requireSelfStress(sys, omega);
    if (stiffness.size() != sys.rows()) {
        throw InputError("stiffness model size does not match the constraint rows");
    }
    PrestressVerdict v;
    const MatX g = geometricStiffness(omega, sys.ha);
    const MatX q = restrictedQuadraticForm(g, sys.flexes);
    v.restrictedEigenvalues = symmetricEigenvalues(q);
    if (v.restrictedEigenvalues.size() > 0) {
        v.smallestRestricted = v.restrictedEigenvalues(0);
    }
    v.stable = v.smallestRestricted > sys.tol.pd;
    if (!v.stable || sys.cols() == 0) {
        if (v.stable) {
            v.certifiedT = 1.0;
        }
        return v;
    }
    const MatX b = stiffness.dense();
    const MatX elastic = sys.ja.transpose() * b * sys.ja;
    const VecX ge = symmetricEigenvalues(g);
    const double gnorm = std::max(std::abs(ge(0)), std::abs(ge(ge.size() - 1)));
    double t = 1.0;
    if (gnorm > 0.0) {
        const bool hasComplement = sys.rowSpace.cols() > 0;
        const double delta = hasComplement
                                 ? symmetricEigenvalues(sys.rowSpace.transpose() * elastic * sys.rowSpace)(0)
                                 : std::numeric_limits<double>::infinity();
        if (sys.m() == 0) {
            t = 0.5 * delta / gnorm;
        } else if (!hasComplement) {
            t = 1.0;
        } else {
            const double mu = v.smallestRestricted;
            t = 0.5 * mu * delta / (gnorm * (gnorm + mu));
        }
    }
    const VecX ke = symmetricEigenvalues(elastic + t * g);
    v.tangentMinEigenvalue = ke.size() > 0 ? ke(0) : 0.0;
    v.certifiedT = t;
    return v;
}

inline PrestressVerdict isPrestressStable(const CreasedPaper& paper, const VecX& omega, const StiffnessModel& stiffness)
{
    stiffness.validate(paper);
    return isPrestressStable(RigiditySystem::build(paper), omega, stiffness);
}

/** Restricted geometric stiffness of every stress-basis vector */
inline std::vector<MatX> restrictedStressForms(const RigiditySystem& sys)
{
    std::vector<MatX> out;
    for (int i = 0; i < sys.s(); ++i) {
        out.push_back(restrictedQuadraticForm(geometricStiffness(sys.stresses.vectors.col(i), sys.ha), sys.flexes));
    }
    return out;
}

struct StabilizingSearch {
    /** Unit-norm stabilizing self-stress, if one was found */
    std::optional<VecX> omega;
    /** Best smallest restricted eigenvalue reached (for a unit-norm stress) */
    double bestValue{-std::numeric_limits<double>::infinity()};
    /** The verdict is exact (no flexes, no stresses, m = 1 or s = 1) */
    bool exact{true};
};

/**
 * @brief Look for a self-stress making the restricted form positive definite
 *
 * Maximizes the concave function x -> lambda_min(sum x_i M_i) over the unit
 * ball by projected supergradient ascent with deterministic restarts.
 */
inline StabilizingSearch findStabilizingStress(const RigiditySystem& sys, int restarts = 50, int iterations = 500,
                                               unsigned seed = 0)
{
    StabilizingSearch out;
    const int m = sys.m();
    const int s = sys.s();
    if (m == 0) {
        out.omega = VecX::Zero(sys.rows());
        out.bestValue = std::numeric_limits<double>::infinity();
        return out;
    }
    if (s == 0) {
        return out;
    }
    const std::vector<MatX> forms = restrictedStressForms(sys);
    auto lambdaMin = [&](const VecX& x) {
        MatX a = MatX::Zero(m, m);
        for (int i = 0; i < s; ++i) {
            a += x(i) * forms[i];
        }
        return symmetricEigenvalues(a)(0);
    };

    VecX best;
    if (m == 1) {
        VecX c(s);
        for (int i = 0; i < s; ++i) {
            c(i) = forms[i](0, 0);
        }
        if (c.norm() > 0.0) {
            best = c.normalized();
            out.bestValue = c.norm();
        }
    } else if (s == 1) {
        const VecX ev = symmetricEigenvalues(forms[0]);
        best = VecX::Constant(1, ev(0) >= -ev(m - 1) ? 1.0 : -1.0);
        out.bestValue = std::max(ev(0), -ev(m - 1));
    } else {
        out.exact = false;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        for (int r = 0; r < restarts; ++r) {
            VecX x(s);
            if (r == 0) {
                x = VecX::Constant(s, 1.0 / std::sqrt(static_cast<double>(s)));
            } else {
                for (int i = 0; i < s; ++i) {
                    x(i) = normal(rng);
                }
                x.normalize();
            }
            VecX localBest = x;
            double localVal = lambdaMin(x);
            for (int k = 1; k <= iterations; ++k) {
                MatX a = MatX::Zero(m, m);
                for (int i = 0; i < s; ++i) {
                    a += x(i) * forms[i];
                }
                Eigen::SelfAdjointEigenSolver<MatX> es(symmetricPart(a));
                const VecX v = es.eigenvectors().col(0);
                VecX grad(s);
                for (int i = 0; i < s; ++i) {
                    grad(i) = v.dot(forms[i] * v);
                }
                x += grad / std::sqrt(static_cast<double>(k));
                if (x.norm() > 1.0) {
                    x.normalize();
                }
                const double val = lambdaMin(x);
                if (val > localVal) {
                    localVal = val;
                    localBest = x;
                }
            }
            // the objective is positively homogeneous, so compare on the sphere
            if (localBest.norm() > 0.0) {
                const double val = localVal / localBest.norm();
                if (val > out.bestValue) {
                    out.bestValue = val;
                    best = localBest.normalized();
                }
            }
        }
    }
    if (best.size() > 0 && out.bestValue > sys.tol.pd) {
        out.omega = sys.stresses.vectors * best;
    }
    return out;
}

struct SecondOrderExtension {
    bool extendable{false};
    VecX rhoPrime;
    /** Minimum-norm second-order term, when extendable */
    VecX rhoSecond;
    /** Blocking self-stress with rho'^T G(w) rho' > 0, when not */
    VecX witness;
    double witnessValue{0.0};
    /** |rho'^T HA rho' + JA rho''|_inf */
    double residual{0.0};
};

inline void requireFlex(const RigiditySystem& sys, const VecX& rhoPrime)
{
    if (rhoPrime.size() != sys.cols()) {
        throw InputError("flex has length " + std::to_string(rhoPrime.size()) + ", expected " + std::to_string(sys.cols()));
    }
    if (rhoPrime.size() == 0 || rhoPrime.norm() == 0.0) {
        throw InputError("flex must be nonzero");
    }
    if (sys.rows() > 0 && (sys.ja * rhoPrime).cwiseAbs().maxCoeff() > 1e-8 * rhoPrime.norm()) {
        throw InputError("the given vector is not a first-order flex");
    }
}

/** Decision by orthogonality: rho'^T G(w_i) rho' vanishes for every stress-basis vector */
inline bool extendableByForms(const RigiditySystem& sys, const VecX& rhoPrime)
{
    const VecX q = sys.stresses.vectors.transpose() * sys.ha.quadratic(rhoPrime);
    return q.size() == 0 || q.cwiseAbs().maxCoeff() <= sys.tol.pd * rhoPrime.squaredNorm();
}

/** Decision by linear-system solvability: rank [JA | b] equals rank JA */
inline bool extendableByRank(const RigiditySystem& sys, const VecX& rhoPrime)
{
    const VecX b = -sys.ha.quadratic(rhoPrime);
    if (b.size() == 0) {
        return true;
    }
    MatX aug(sys.rows(), sys.cols() + 1);
    aug << sys.ja, b;
    return numericalRank(aug, sys.tol.rank) == sys.rank;
}

/**
 * @brief Try to extend a first-order flex to a second-order one
 *
 * Solves JA rho'' = -rho'^T HA rho' by minimum norm. When some self-stress
 * sees a nonzero quadratic form the flex is blocked; the witness is the
 * combination of basis stresses weighted by their form values, so its own
 * form value is positive.
 */
inline SecondOrderExtension extendToSecondOrder(const RigiditySystem& sys, const VecX& rhoPrime)
{
    requireFlex(sys, rhoPrime);
    SecondOrderExtension out;
    out.rhoPrime = rhoPrime;
    const VecX qa = sys.ha.quadratic(rhoPrime);
    const VecX q = sys.stresses.vectors.transpose() * qa;
    out.extendable = extendableByForms(sys, rhoPrime);
    if (out.extendable) {
        out.rhoSecond = RankRevealingSvd(sys.ja, sys.tol.rank).solve(-qa);
        out.residual = qa.size() == 0 ? 0.0 : (qa + sys.ja * out.rhoSecond).cwiseAbs().maxCoeff();
    } else {
        const VecX w = sys.stresses.vectors * q;
        out.witness = w.normalized();
        out.witnessValue = rhoPrime.dot(geometricStiffness(out.witness, sys.ha) * rhoPrime);
    }
    return out;
}

struct SecondOrderResult {
    bool rigid{true};
    /** False when the verdict rests on sphere sampling */
    bool exact{true};
    /** Extension pair proving foldability */
    std::optional<SecondOrderExtension> witness;
    int samples{0};
};

struct SamplingOptions {
    int samples{10000};
    unsigned seed{0};
    /** Number of best samples refined by Gauss-Newton */
    int refine{20};
};

namespace detail
{

inline double radicalInverse(unsigned long long i, unsigned base)
{
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

/**
 * Deterministic low-discrepancy points on the unit sphere in R^dim: a Halton
 * sequence mapped through Box-Muller and normalized. A nonzero seed applies a
 * Cranley-Patterson shift.
 */
inline std::vector<VecX> spherePoints(int dim, int count, unsigned seed)
{
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
    const int pairs = (dim + 1) / 2;
    const int needed = 2 * pairs;
    std::vector<double> shift(needed, 0.0);
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (auto& s : shift) {
            s = uni(rng);
        }
    }
    std::vector<VecX> pts;
    pts.reserve(count);
    for (int n = 1; n <= count; ++n) {
        VecX x(needed);
        for (int p = 0; p < pairs; ++p) {
            auto coord = [&](int d) {
                double u = radicalInverse(static_cast<unsigned long long>(n), primes[d % 24]) + shift[d];
                u -= std::floor(u);
                return std::clamp(u, 1e-12, 1.0 - 1e-12);
            };
            const double u1 = coord(2 * p);
            const double u2 = coord(2 * p + 1);
            const double r = std::sqrt(-2.0 * std::log(u1));
            x(2 * p) = r * std::cos(2.0 * std::numbers::pi * u2);
            x(2 * p + 1) = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        VecX y = x.head(dim);
        if (y.norm() == 0.0) {
            y(0) = 1.0;
        }
        pts.push_back(y.normalized());
    }
    return pts;
}

/** Gauss-Newton on sum_i (c^T Q_i c)^2 restricted to the unit sphere */
inline VecX refineOnSphere(const std::vector<MatX>& forms, VecX c, int iterations = 60)
{
    const int s = static_cast<int>(forms.size());
    const int m = static_cast<int>(c.size());
    for (int it = 0; it < iterations; ++it) {
        VecX r(s);
        MatX jac(s, m);
        for (int i = 0; i < s; ++i) {
            const VecX qc = forms[i] * c;
            r(i) = c.dot(qc);
            jac.row(i) = 2.0 * qc.transpose();
        }
        if (r.cwiseAbs().maxCoeff() < 1e-15) {
            break;
        }
        // restrict the step to the tangent space of the sphere
        const MatX proj = MatX::Identity(m, m) - c * c.transpose();
        const VecX step = RankRevealingSvd(jac * proj, 1e-12).solve(-r);
        c = (c + proj * step).normalized();
    }
    return c;
}

}  // namespace detail

/**
 * @brief Decide second-order rigidity
 *
 * Exact when there are no flexes, no stresses, a single flex or a single
 * stress. Otherwise the common zero set of the restricted quadratic forms is
 * searched by sphere sampling with local refinement, and a rigid verdict is
 * flagged as sampled.
 */
inline SecondOrderResult secondOrderClassify(const RigiditySystem& sys, const SamplingOptions& opts = {})
{
    SecondOrderResult out;
    const int m = sys.m();
    const int s = sys.s();
    if (m == 0) {
        return out;
    }
    auto witnessFrom = [&](const VecX& c) {
        VecX flex = sys.flexes.vectors * c;
        canonicalizeColumnSigns(flex);
        return extendToSecondOrder(sys, flex);
    };
    if (s == 0) {
        out.rigid = false;
        out.witness = witnessFrom(VecX::Unit(m, 0));
        return out;
    }
    const std::vector<MatX> forms = restrictedStressForms(sys);
    const double tol = sys.tol.pd;
    if (m == 1) {
        // same decision rule as extendToSecondOrder, so the two never disagree
        SecondOrderExtension ext = witnessFrom(VecX::Ones(1));
        if (ext.extendable) {
            out.rigid = false;
            out.witness = ext;
        }
        return out;
    }
    if (s == 1) {
        Eigen::SelfAdjointEigenSolver<MatX> es(forms[0]);
        const VecX ev = es.eigenvalues();
        const double lo = ev(0);
        const double hi = ev(m - 1);
        if (lo > tol || hi < -tol) {
            return out;
        }
        VecX c;
        if (std::abs(lo) <= tol) {
            c = es.eigenvectors().col(0);
        } else if (std::abs(hi) <= tol) {
            c = es.eigenvectors().col(m - 1);
        } else {
            c = std::sqrt(-lo) * es.eigenvectors().col(m - 1) + std::sqrt(hi) * es.eigenvectors().col(0);
            c.normalize();
        }
        out.rigid = false;
        out.witness = witnessFrom(c);
        return out;
    }

    out.exact = false;
    const std::vector<VecX> pts = detail::spherePoints(m, opts.samples, opts.seed);
    out.samples = static_cast<int>(pts.size());
    auto objective = [&](const VecX& c) {
        double f = 0.0;
        for (const auto& q : forms) {
            const double v = c.dot(q * c);
            f += v * v;
        }
        return f;
    };
    auto maxForm = [&](const VecX& c) {
        double f = 0.0;
        for (const auto& q : forms) {
            f = std::max(f, std::abs(c.dot(q * c)));
        }
        return f;
    };
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        ranked.push_back({objective(pts[i]), i});
    }
    const int keep = std::min<int>(opts.refine, static_cast<int>(ranked.size()));
    std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
    for (int r = 0; r < keep; ++r) {
        const VecX c = detail::refineOnSphere(forms, pts[ranked[r].second]);
        if (maxForm(c) <= tol) {
            SecondOrderExtension ext = witnessFrom(c);
            if (ext.extendable) {
                out.rigid = false;
                out.witness = ext;
                return out;
            }
        }
    }
    return out;
}

struct EnergyReport {
    /** JA^T w; zero when w is a self-stress */
    VecX gradient;
    /** JA^T B JA + G(w) */
    MatX hessian;
    VecX hessianEigenvalues;
    bool gradientVanishes{true};
};

inline EnergyReport energyReport(const RigiditySystem& sys, const StiffnessModel& stiffness, const VecX& omega)
{
    if (omega.size() != sys.rows() || stiffness.size() != sys.rows()) {
        throw InputError("stress or stiffness size does not match the constraint rows");
    }
    EnergyReport r;
    r.gradient = sys.ja.transpose() * omega;
    r.gradientVanishes = r.gradient.size() == 0 || r.gradient.cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + maxAbs(omega));
    r.hessian = sys.ja.transpose() * stiffness.dense() * sys.ja + geometricStiffness(omega, sys.ha);
    r.hessianEigenvalues = symmetricEigenvalues(r.hessian);
    return r;
}

}  // namespace ori

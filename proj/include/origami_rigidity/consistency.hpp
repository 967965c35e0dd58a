#pragma once

#include "model.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace ori
{

/** @brief Constant per-unit loop data in the classical sector-angle form */
struct UnitConstraint {
    /** Sector angle of each step, in [0, 2pi) */
    std::vector<double> sectorAngles;
    /** Translation of each step in the preceding panel's local frame (zero for vertex units) */
    std::vector<Vec3> translations;
    Mat4 placement{Mat4::Identity()};
};

inline Mat4 homogeneousRotX(double a) { return homogeneous(rotX(a)); }

inline UnitConstraint unitConstraint(const SingleUnit& unit)
{
    UnitConstraint uc;
    for (const Mat4& g : unit.steps) {
        double a = std::atan2(g(1, 0), g(0, 0));
        if (a < 0) {
            a += 2.0 * std::numbers::pi;
        }
        uc.sectorAngles.push_back(a);
        uc.translations.push_back(g.topRightCorner<3, 1>());
    }
    uc.placement = unit.placement;
    return uc;
}

namespace detail
{

inline double unitAngle(const UnitCrease& uc, const VecX& rho) { return rho(uc.column); }

}  // namespace detail

/** Loop product T_n(rho) of a unit in its local frame; rho is the full angle vector */
inline Mat4 transformProduct(const SingleUnit& unit, const VecX& rho)
{
    Mat4 t = Mat4::Identity();
    for (int j = 0; j < unit.degree(); ++j) {
        t = t * unit.steps[j] * homogeneousRotX(detail::unitAngle(unit.creases[j], rho));
    }
    return t;
}

/** Rotation block of the loop product R_n(rho) */
inline Mat3 rotationProduct(const SingleUnit& unit, const VecX& rho)
{
    Mat3 r = Mat3::Identity();
    for (int j = 0; j < unit.degree(); ++j) {
        r = r * unit.steps[j].topLeftCorner<3, 3>() * rotX(detail::unitAngle(unit.creases[j], rho));
    }
    return r;
}

/** Loop product expressed in global coordinates: T' T_n T'^{-1} */
inline Mat4 globalProduct(const SingleUnit& unit, const VecX& rho)
{
    return unit.placement * transformProduct(unit, rho) * rigidInverse(unit.placement);
}

/** Independent entries of a 4x4 matrix for a unit of the given row count */
inline void selectEntries(const Mat4& m, int rowCount, Eigen::Ref<VecX> out)
{
    out(0) = m(2, 1);
    out(1) = m(0, 2);
    out(2) = m(1, 0);
    if (rowCount == 6) {
        out(3) = m(0, 3);
        out(4) = m(1, 3);
        out(5) = m(2, 3);
    }
}

inline void checkAngleVector(const CreasedPaper& paper, const VecX& rho)
{
    if (rho.size() != paper.J) {
        throw InputError("angle vector has length " + std::to_string(rho.size()) + ", expected " + std::to_string(paper.J));
    }
}

/** @brief Stacked independent consistency residual A(rho) in the global frame */
inline VecX residual(const CreasedPaper& paper, const VecX& rho)
{
    checkAngleVector(paper, rho);
    VecX a = VecX::Zero(paper.constraintRows());
    for (const auto& u : paper.units) {
        selectEntries(globalProduct(u, rho), u.rowCount(), a.segment(u.rowOffset, u.rowCount()));
    }
    return a;
}

/**
 * @brief Exact Jacobian of the residual at an arbitrary angle vector
 *
 * Product rule over the loop factors. Agrees with the closed-form Jacobian
 * at valid configurations and is used there as an independent check.
 */
inline MatX residualJacobian(const CreasedPaper& paper, const VecX& rho)
{
    checkAngleVector(paper, rho);
    MatX jac = MatX::Zero(paper.constraintRows(), paper.J);
    Mat4 dRx = Mat4::Zero();
    for (const auto& u : paper.units) {
        const int n = u.degree();
        std::vector<Mat4> factor(n);
        for (int j = 0; j < n; ++j) {
            factor[j] = u.steps[j] * homogeneousRotX(rho(u.creases[j].column));
        }
        std::vector<Mat4> suffix(n + 1, Mat4::Identity());
        for (int j = n - 1; j >= 0; --j) {
            suffix[j] = factor[j] * suffix[j + 1];
        }
        const Mat4 inv = rigidInverse(u.placement);
        Mat4 prefix = Mat4::Identity();
        for (int j = 0; j < n; ++j) {
            const double a = rho(u.creases[j].column);
            dRx.setZero();
            dRx(1, 1) = -std::sin(a);
            dRx(1, 2) = -std::cos(a);
            dRx(2, 1) = std::cos(a);
            dRx(2, 2) = -std::sin(a);
            const Mat4 d = u.placement * prefix * u.steps[j] * dRx * suffix[j + 1] * inv;
            VecX col(u.rowCount());
            selectEntries(d, u.rowCount(), col);
            jac.block(u.rowOffset, u.creases[j].column, u.rowCount(), 1) += col;
            prefix = prefix * factor[j];
        }
    }
    return jac;
}

/**
 * @brief Whether an angle vector satisfies the constraints
 *
 * Besides the selected entries, the full loop products are compared with the
 * identity so that products such as rotations by pi are not mistaken for
 * closure.
 */
inline bool isConsistent(const CreasedPaper& paper, const VecX& rho)
{
    const VecX a = residual(paper, rho);
    if (a.size() > 0 && a.cwiseAbs().maxCoeff() > paper.tol.res) {
        return false;
    }
    for (const auto& u : paper.units) {
        const Mat4 g = globalProduct(u, rho);
        Mat4 diff = g - Mat4::Identity();
        if (u.kind == UnitKind::Vertex) {
            diff.topRightCorner<3, 1>().setZero();
        }
        if (diff.cwiseAbs().maxCoeff() > paper.tol.res) {
            return false;
        }
    }
    return true;
}

}  // namespace ori

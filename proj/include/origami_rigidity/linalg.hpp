#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ori
{

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/** @brief Base class for all library errors */
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/** @brief Malformed or inconsistent input (file contents, sizes) */
class InputError : public Error
{
public:
    using Error::Error;
};

/** @brief A numerical analysis step could not produce a valid result */
class AnalysisError : public Error
{
public:
    using Error::Error;
};

inline Mat3 skew(const Vec3& v)
{
    Mat3 s;
    s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return s;
}

inline Mat3 rotZ(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
}

inline Mat3 rotX(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
    return r;
}

/** @brief Homogeneous transform from a rotation block and a translation */
inline Mat4 homogeneous(const Mat3& r, const Vec3& t = Vec3::Zero())
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = r;
    m.topRightCorner<3, 1>() = t;
    return m;
}

inline Mat4 rigidInverse(const Mat4& m)
{
    const Mat3 rt = m.topLeftCorner<3, 3>().transpose();
    return homogeneous(rt, -rt * m.topRightCorner<3, 1>());
}

/**
 * @brief Singular value decomposition with a relative rank cut-off
 *
 * Holds full U and V so that kernel and cokernel bases can be read off
 * directly. Works for empty matrices (any dimension zero).
 */
class RankRevealingSvd
{
public:
    RankRevealingSvd(const MatX& a, double relTol) : rows_(a.rows()), cols_(a.cols())
    {
        if (rows_ == 0 || cols_ == 0) {
            u_ = MatX::Identity(rows_, rows_);
            v_ = MatX::Identity(cols_, cols_);
            sigma_ = VecX::Zero(0);
            rank_ = 0;
            return;
        }
        Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        u_ = svd.matrixU();
        v_ = svd.matrixV();
        sigma_ = svd.singularValues();
        const double smax = sigma_.size() > 0 ? sigma_(0) : 0.0;
        rank_ = 0;
        if (smax > 0.0) {
            for (Eigen::Index i = 0; i < sigma_.size(); ++i) {
                if (sigma_(i) > relTol * smax) {
                    ++rank_;
                }
            }
        }
    }

    Eigen::Index rank() const { return rank_; }
    const VecX& singularValues() const { return sigma_; }
    double largestSingularValue() const { return sigma_.size() > 0 ? sigma_(0) : 0.0; }

    /** Orthonormal basis of ker(A), one vector per column */
    MatX kernel() const { return v_.rightCols(cols_ - rank_); }
    /** Orthonormal basis of ker(A^T), one vector per column */
    MatX cokernel() const { return u_.rightCols(rows_ - rank_); }
    /** Orthonormal basis of the orthogonal complement of ker(A) */
    MatX rowSpace() const { return v_.leftCols(rank_); }

    /** Minimum-norm least-squares solution of A x = b */
    VecX solve(const VecX& b) const
    {
        VecX x = VecX::Zero(cols_);
        for (Eigen::Index i = 0; i < rank_; ++i) {
            x += (u_.col(i).dot(b) / sigma_(i)) * v_.col(i);
        }
        return x;
    }

private:
    Eigen::Index rows_;
    Eigen::Index cols_;
    MatX u_;
    MatX v_;
    VecX sigma_;
    Eigen::Index rank_{0};
};

inline Eigen::Index numericalRank(const MatX& a, double relTol)
{
    return RankRevealingSvd(a, relTol).rank();
}

/**
 * @brief Flip the sign of each column so its largest-magnitude entry is positive
 *
 * Makes SVD-derived bases deterministic up to rotation within degenerate
 * subspaces.
 */
template <typename Derived>
inline void canonicalizeColumnSigns(Eigen::MatrixBase<Derived>& basis)
{
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index idx = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < basis.rows(); ++r) {
            // prefer the first of (nearly) tied entries
            if (std::abs(basis(r, c)) > best + 1e-12) {
                best = std::abs(basis(r, c));
                idx = r;
            }
        }
        if (basis.rows() > 0 && basis(idx, c) < 0.0) {
            basis.col(c) *= -1.0;
        }
    }
}

inline double maxAbs(const MatX& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline MatX symmetricPart(const MatX& m) { return 0.5 * (m + m.transpose()); }

/** Eigenvalues of a symmetric matrix in ascending order; empty for 0x0 */
inline VecX symmetricEigenvalues(const MatX& m)
{
    if (m.rows() == 0) {
        return VecX::Zero(0);
    }
    Eigen::SelfAdjointEigenSolver<MatX> es(symmetricPart(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace ori

#pragma once

#include "consistency.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

namespace ori
{

/** Row block of a unit's global twist for one crease: [p] or [p; O x p] */
inline VecX twistColumn(const SingleUnit& unit, const UnitCrease& uc)
{
    VecX col(unit.rowCount());
    col.head<3>() = uc.direction;
    if (unit.rowCount() == 6) {
        col.tail<3>() = uc.origin.cross(uc.direction);
    }
    return col;
}

/**
 * @brief Closed-form Jacobian JA, one row block per unit
 *
 * Directions point away from each unit, so the block column is the stored
 * direction times its incidence sign.
 */
inline MatX assembleJacobian(const CreasedPaper& paper)
{
    MatX ja = MatX::Zero(paper.constraintRows(), paper.J);
    for (const auto& u : paper.units) {
        for (const auto& uc : u.creases) {
            ja.block(u.rowOffset, uc.column, u.rowCount(), 1) = twistColumn(u, uc);
        }
    }
    return ja;
}

struct SparseEntry {
    int row;
    int col;
    double value;
};

inline std::vector<SparseEntry> sparseEntries(const MatX& m, double dropTol = 0.0)
{
    std::vector<SparseEntry> out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) > dropTol) {
                out.push_back({static_cast<int>(r), static_cast<int>(c), m(r, c)});
            }
        }
    }
    return out;
}

/**
 * @brief Second derivative of the residual, stored per unit block
 *
 * Only crease pairs of the same unit can be nonzero, so each unit keeps its
 * row slices over its own columns.
 */
class Hessian
{
public:
    struct Block {
        int rowOffset{0};
        int rowCount{0};
        std::vector<int> columns;
        /** One degree x degree symmetric matrix per constraint row */
        std::vector<MatX> slices;
    };

    Hessian() = default;
    Hessian(int rows, int cols, std::vector<Block> blocks) : rows_(rows), cols_(cols), blocks_(std::move(blocks)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<Block>& blocks() { return blocks_; }

    double operator()(int i, int j, int k) const
    {
        for (const auto& b : blocks_) {
            if (i < b.rowOffset || i >= b.rowOffset + b.rowCount) {
                continue;
            }
            const int a = localIndex(b, j);
            const int c = localIndex(b, k);
            return a < 0 || c < 0 ? 0.0 : b.slices[i - b.rowOffset](a, c);
        }
        return 0.0;
    }

    /** Dense J x J slice for constraint row i */
    MatX slice(int i) const
    {
        MatX s = MatX::Zero(cols_, cols_);
        for (const auto& b : blocks_) {
            if (i >= b.rowOffset && i < b.rowOffset + b.rowCount) {
                scatter(b, b.slices[i - b.rowOffset], s);
            }
        }
        return s;
    }

    /** G[j][k] = sum_i w_i H[i][j][k] */
    MatX contract(const VecX& w) const
    {
        if (w.size() != rows_) {
            throw InputError("stress vector has length " + std::to_string(w.size()) + ", expected " + std::to_string(rows_));
        }
        MatX g = MatX::Zero(cols_, cols_);
        for (const auto& b : blocks_) {
            const int n = static_cast<int>(b.columns.size());
            MatX local = MatX::Zero(n, n);
            for (int r = 0; r < b.rowCount; ++r) {
                local += w(b.rowOffset + r) * b.slices[r];
            }
            scatter(b, local, g);
        }
        return g;
    }

    /** q_i = v^T H[i] v for every row */
    VecX quadratic(const VecX& v) const { return bilinear(v, v); }

    /** q_i = u^T H[i] v for every row */
    VecX bilinear(const VecX& u, const VecX& v) const
    {
        VecX q = VecX::Zero(rows_);
        for (const auto& b : blocks_) {
            const VecX lu = gather(b, u);
            const VecX lv = gather(b, v);
            for (int r = 0; r < b.rowCount; ++r) {
                q(b.rowOffset + r) = lu.dot(b.slices[r] * lv);
            }
        }
        return q;
    }

    /** Directional contraction: D[i][j] = sum_k H[i][j][k] d_k */
    MatX directional(const VecX& d) const
    {
        MatX out = MatX::Zero(rows_, cols_);
        for (const auto& b : blocks_) {
            const VecX ld = gather(b, d);
            for (int r = 0; r < b.rowCount; ++r) {
                const VecX col = b.slices[r] * ld;
                for (size_t a = 0; a < b.columns.size(); ++a) {
                    out(b.rowOffset + r, b.columns[a]) += col(static_cast<Eigen::Index>(a));
                }
            }
        }
        return out;
    }

    /** Nonzero entries as (row, j, k, value), both (j,k) and (k,j) listed */
    std::vector<std::tuple<int, int, int, double>> entries() const
    {
        std::vector<std::tuple<int, int, int, double>> out;
        for (const auto& b : blocks_) {
            for (int r = 0; r < b.rowCount; ++r) {
                for (size_t a = 0; a < b.columns.size(); ++a) {
                    for (size_t c = 0; c < b.columns.size(); ++c) {
                        const double v = b.slices[r](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
                        if (v != 0.0) {
                            out.emplace_back(b.rowOffset + r, b.columns[a], b.columns[c], v);
                        }
                    }
                }
            }
        }
        return out;
    }

private:
    static int localIndex(const Block& b, int col)
    {
        for (size_t a = 0; a < b.columns.size(); ++a) {
            if (b.columns[a] == col) {
                return static_cast<int>(a);
            }
        }
        return -1;
    }
    static VecX gather(const Block& b, const VecX& v)
    {
        VecX out(static_cast<Eigen::Index>(b.columns.size()));
        for (size_t a = 0; a < b.columns.size(); ++a) {
            out(static_cast<Eigen::Index>(a)) = v(b.columns[a]);
        }
        return out;
    }
    static void scatter(const Block& b, const MatX& local, MatX& dense)
    {
        for (size_t a = 0; a < b.columns.size(); ++a) {
            for (size_t c = 0; c < b.columns.size(); ++c) {
                dense(b.columns[a], b.columns[c]) += local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
            }
        }
    }

    int rows_{0};
    int cols_{0};
    std::vector<Block> blocks_;
};

/**
 * @brief Closed-form Hessian HA at the current configuration
 *
 * For creases k <= j in loop order the mixed derivative of the global loop
 * product is the product of the two global twists; its rotation block is
 * skew(p_k) skew(p_j) and its translation column p_k x (O_j x p_j).
 */
inline Hessian assembleHessian(const CreasedPaper& paper)
{
    std::vector<Hessian::Block> blocks;
    for (const auto& u : paper.units) {
        Hessian::Block b;
        b.rowOffset = u.rowOffset;
        b.rowCount = u.rowCount();
        const int n = u.degree();
        for (const auto& uc : u.creases) {
            b.columns.push_back(uc.column);
        }
        b.slices.assign(b.rowCount, MatX::Zero(n, n));
        for (int j = 0; j < n; ++j) {
            const Vec3& pj = u.creases[j].direction;
            const Vec3 mj = u.creases[j].origin.cross(pj);
            for (int k = 0; k <= j; ++k) {
                const Vec3& pk = u.creases[k].direction;
                const Mat3 r = skew(pk) * skew(pj);
                double v[6] = {r(2, 1), r(0, 2), r(1, 0), 0.0, 0.0, 0.0};
                if (b.rowCount == 6) {
                    const Vec3 t = pk.cross(mj);
                    v[3] = t.x();
                    v[4] = t.y();
                    v[5] = t.z();
                }
                for (int r6 = 0; r6 < b.rowCount; ++r6) {
                    b.slices[r6](j, k) = v[r6];
                    b.slices[r6](k, j) = v[r6];
                }
            }
        }
        blocks.push_back(std::move(b));
    }
    return Hessian(paper.constraintRows(), paper.J, std::move(blocks));
}

/** Jacobian and Hessian with respect to t_j = tan(rho_j / 2) */
struct TangentDerivatives {
    MatX jacobian;
    Hessian hessian;
};

/**
 * @brief Change of variables to half-angle tangents
 *
 * Uses the exact chain rule, so the Hessian carries the extra diagonal term
 * JA_j * d2rho/dt2 besides the scaled rho-Hessian.
 */
inline TangentDerivatives tangentSubstitution(const CreasedPaper& paper)
{
    const VecX rho = paper.foldingAngles();
    VecX d1(paper.J), d2(paper.J);
    for (int j = 0; j < paper.J; ++j) {
        if (std::abs(std::abs(rho(j)) - std::numbers::pi) < 1e-12 || std::abs(rho(j)) > std::numbers::pi) {
            throw AnalysisError("crease column " + std::to_string(j) + " has |rho| = pi; tangent coordinate is infinite");
        }
        const double t = std::tan(0.5 * rho(j));
        d1(j) = 2.0 / (1.0 + t * t);
        d2(j) = -4.0 * t / ((1.0 + t * t) * (1.0 + t * t));
    }
    const MatX ja = assembleJacobian(paper);
    TangentDerivatives out;
    out.jacobian = ja * d1.asDiagonal();
    out.hessian = assembleHessian(paper);
    for (auto& b : out.hessian.blocks()) {
        const int n = static_cast<int>(b.columns.size());
        for (int r = 0; r < b.rowCount; ++r) {
            for (int a = 0; a < n; ++a) {
                for (int c = 0; c < n; ++c) {
                    b.slices[r](a, c) *= d1(b.columns[a]) * d1(b.columns[c]);
                }
                b.slices[r](a, a) += ja(b.rowOffset + r, b.columns[a]) * d2(b.columns[a]);
            }
        }
    }
    return out;
}

}  // namespace ori

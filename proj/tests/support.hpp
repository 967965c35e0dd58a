#pragma once

#include <origami_rigidity/origami_rigidity.hpp>

#include <random>
#include <string>
#include <vector>

namespace ori::test
{

inline CreasedPaper load(const nlohmann::json& doc) { return loadCreasedPaper(doc); }

inline CreasedPaper fixture(const std::string& name)
{
    for (const auto& f : fixtures::all()) {
        if (f.name == name) {
            return loadCreasedPaper(f.document);
        }
    }
    throw std::runtime_error("no fixture " + name);
}

inline std::vector<std::string> builtInNames()
{
    std::vector<std::string> out;
    for (const auto& f : fixtures::builtIn()) {
        out.push_back(f.name);
    }
    return out;
}

inline std::vector<std::string> allNames()
{
    std::vector<std::string> out;
    for (const auto& f : fixtures::all()) {
        out.push_back(f.name);
    }
    return out;
}

inline nlohmann::json document(const std::string& name)
{
    for (const auto& f : fixtures::all()) {
        if (f.name == name) {
            return f.document;
        }
    }
    throw std::runtime_error("no fixture " + name);
}

inline VecX gaussian(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> nd;
    VecX v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = nd(rng);
    }
    return v;
}

inline VecX unitGaussian(std::mt19937_64& rng, Eigen::Index n)
{
    VecX v = gaussian(rng, n);
    return v.size() > 0 ? VecX(v.normalized()) : v;
}

/** Central difference of the residual along d */
inline VecX residualSlope(const CreasedPaper& paper, const VecX& rho, const VecX& d, double h = 1e-5)
{
    return (residual(paper, rho + h * d) - residual(paper, rho - h * d)) / (2.0 * h);
}

/** Central difference of the residual Jacobian along d */
inline MatX jacobianSlope(const CreasedPaper& paper, const VecX& rho, const VecX& d, double h = 1e-5)
{
    return (residualJacobian(paper, rho + h * d) - residualJacobian(paper, rho - h * d)) / (2.0 * h);
}

/** H contracted with d in its last index: row i, column j is sum_k H[i][j][k] d_k */
inline MatX hessianTimes(const Hessian& ha, const VecX& d)
{
    MatX out(ha.rows(), ha.cols());
    for (int i = 0; i < ha.rows(); ++i) {
        out.row(i) = (ha.slice(i) * d).transpose();
    }
    return out;
}

/** Apply x -> R x + t to every 3-D vertex of a document */
inline nlohmann::json moved(nlohmann::json doc, const Mat3& r, const Vec3& t)
{
    for (auto& v : doc["vertices"]) {
        const auto xyz = v["xyz"].get<std::vector<double>>();
        const Vec3 p = r * Vec3(xyz[0], xyz[1], xyz[2]) + t;
        v["xyz"] = {p.x(), p.y(), p.z()};
    }
    return doc;
}

inline Mat3 someRotation(double a = 0.7, double b = -1.1, double c = 0.4)
{
    return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) * Eigen::AngleAxisd(c, Vec3::UnitX()))
        .toRotationMatrix();
}

}  // namespace ori::test

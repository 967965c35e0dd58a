#pragma once

#include "model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace ori::fixtures
{

namespace detail
{

using Json = nlohmann::json;

struct Builder {
    std::vector<Vec3> points;
    std::vector<std::vector<int>> panels;
    std::vector<std::pair<int, int>> creases;  // (from, to)
    bool flat{false};

    /**
     * Produce the document, taking folding angles from the geometry so the
     * stored configuration is consistent to full precision.
     */
    Json document() const
    {
        Json doc;
        doc["vertices"] = Json::array();
        for (size_t i = 0; i < points.size(); ++i) {
            doc["vertices"].push_back({{"id", i}, {"xyz", {points[i].x(), points[i].y(), points[i].z()}}});
        }
        doc["panels"] = panels;
        doc["creases"] = Json::array();
        for (size_t i = 0; i < creases.size(); ++i) {
            doc["creases"].push_back({{"id", i}, {"ends", {creases[i].first, creases[i].second}}, {"from", creases[i].first}});
        }
        const CreasedPaper paper = loadCreasedPaper(doc);
        for (size_t i = 0; i < creases.size(); ++i) {
            doc["creases"][i]["rho"] = paper.creases[i].foldingAngle;
        }
        if (flat) {
            doc["flat_vertices"] = Json::array();
            for (size_t i = 0; i < points.size(); ++i) {
                doc["flat_vertices"].push_back({{"id", i}, {"xyz2", {points[i].x(), points[i].y()}}});
            }
        }
        return doc;
    }
};

/** Orient each triangle so that its normal points away from the given interior point */
inline std::vector<int> outward(const std::vector<Vec3>& pts, std::vector<int> face, const Vec3& inside)
{
    const Vec3 n = (pts[face[1]] - pts[face[0]]).cross(pts[face[2]] - pts[face[0]]);
    if (n.dot(pts[face[0]] - inside) < 0) {
        std::swap(face[1], face[2]);
    }
    return face;
}

}  // namespace detail

/** Flat degree-3 vertex with a triangular boundary */
inline nlohmann::json degree3Vertex()
{
    const double r3 = std::sqrt(3.0) / 2.0;
    detail::Builder b;
    b.points = {{0, 0, 0}, {1, 0, 0}, {-0.5, r3, 0}, {-0.5, -r3, 0}};
    b.panels = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
    b.creases = {{0, 1}, {0, 2}, {0, 3}};
    b.flat = true;
    return b.document();
}

/**
 * Degree-5 single hole: square hole O1..O4 (ids 0-3) with outer points A..E
 * (ids 4-8). E is lifted off the plane, so the two panels touching it are not
 * planar.
 */
inline nlohmann::json degree5Hole()
{
    const double h = std::sqrt(2.0) / 2.0;
    detail::Builder b;
    b.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {-h, -h, 0}, {1, -h, 0}, {1 + h, 0, 0}, {1 + h, 1 + h, 0}, {0, 1, 1}};
    b.panels = {{0, 4, 5, 1}, {1, 5, 6}, {1, 6, 7, 2}, {2, 7, 8, 3}, {3, 8, 4, 0}};
    b.creases = {{0, 4}, {1, 5}, {1, 6}, {2, 7}, {3, 8}};
    return b.document();
}

/**
 * Flat composite with two inner vertices and one hole. Vertex k of the
 * labelled drawing has id k-1 and crease k has id k-1.
 */
inline nlohmann::json fig3Composite()
{
    detail::Builder b;
    b.points = {{0, 0, 0},    {1.5, 1.5, 0},   {2, 0, 0},      {0.5, -1, 0}, {-1, -1.5, 0}, {-1, 1, 0},  {3.5, 0, 0},
                {1.5, -1, 0}, {1.5, -2, 0}, {3, -2.5, 0}, {0.5, -2, 0}, {1.5, -3.5, 0}, {0, -3, 0}};
    auto v = [](std::vector<int> ids) {
        for (auto& i : ids) {
            i -= 1;
        }
        return ids;
    };
    b.panels = {v({1, 3, 2}), v({1, 2, 6}), v({1, 6, 5}), v({1, 5, 13, 4}), v({1, 4, 8, 3}),
                v({3, 7, 2}), v({8, 9, 10, 7, 3}), v({11, 12, 10, 9}), v({4, 13, 12, 11})};
    const std::vector<std::pair<int, int>> c = {{1, 2}, {1, 3}, {1, 4}, {1, 5},  {1, 6}, {2, 3},
                                                {3, 7}, {3, 8}, {9, 10}, {11, 12}, {4, 13}};
    for (const auto& [a, e] : c) {
        b.creases.push_back({a - 1, e - 1});
    }
    b.flat = true;
    return b.document();
}

/** Regular tetrahedron surface; every edge is a crease */
inline nlohmann::json tetrahedron()
{
    detail::Builder b;
    b.points = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    const Vec3 centre = Vec3::Zero();
    for (std::vector<int> f : std::vector<std::vector<int>>{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}) {
        b.panels.push_back(detail::outward(b.points, f, centre));
    }
    b.creases = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    return b.document();
}

/** Tetrahedron whose face (0,1,2) is split into three triangles at its centroid (id 4) */
inline nlohmann::json triangulatedTetrahedron()
{
    detail::Builder b;
    b.points = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    const Vec3 centre = Vec3::Zero();
    b.points.push_back((b.points[0] + b.points[1] + b.points[2]) / 3.0);
    const std::vector<int> face = detail::outward(b.points, {0, 1, 2}, centre);
    for (int i = 0; i < 3; ++i) {
        b.panels.push_back({face[i], face[(i + 1) % 3], 4});
    }
    for (std::vector<int> f : std::vector<std::vector<int>>{{0, 1, 3}, {0, 2, 3}, {1, 2, 3}}) {
        b.panels.push_back(detail::outward(b.points, f, centre));
    }
    b.creases = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {4, 0}, {4, 1}, {4, 2}};
    return b.document();
}

/** Non-flat degree-4 vertex: creases at azimuths 0, 80, 180, 260 degrees, 70 degrees from the axis */
inline nlohmann::json degree4Cone()
{
    detail::Builder b;
    b.points = {{0, 0, 0}};
    const double phi = 70.0 * std::numbers::pi / 180.0;
    for (double deg : {0.0, 80.0, 180.0, 260.0}) {
        const double t = deg * std::numbers::pi / 180.0;
        b.points.push_back({std::sin(phi) * std::cos(t), std::sin(phi) * std::sin(t), std::cos(phi)});
    }
    b.panels = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
    b.creases = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    return b.document();
}

inline nlohmann::json lonePanel()
{
    detail::Builder b;
    b.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    b.panels = {{0, 1, 2, 3}};
    b.flat = true;
    return b.document();
}

/** Square hole whose four creases all lie on lines through the hole centre */
inline nlohmann::json concurrentHole()
{
    detail::Builder b;
    b.points = {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}, {-2, -2, 0}, {2, -2, 0}, {2, 2, 0}, {-2, 2, 0}};
    b.panels = {{0, 4, 5, 1}, {1, 5, 6, 2}, {2, 6, 7, 3}, {3, 7, 4, 0}};
    b.creases = {{0, 4}, {1, 5}, {2, 6}, {3, 7}};
    b.flat = true;
    return b.document();
}

struct Named {
    std::string name;
    nlohmann::json document;
};

/** The six reference structures, in a fixed order */
inline std::vector<Named> builtIn()
{
    return {{"degree3", degree3Vertex()},
            {"degree5-hole", degree5Hole()},
            {"fig3", fig3Composite()},
            {"tetrahedron", tetrahedron()},
            {"triangulated-tetrahedron", triangulatedTetrahedron()},
            {"degree4-cone", degree4Cone()}};
}

/** Built-in structures plus the extra ones used by the tests */
inline std::vector<Named> all()
{
    auto out = builtIn();
    out.push_back({"lone-panel", lonePanel()});
    out.push_back({"concurrent-hole", concurrentHole()});
    return out;
}

}  // namespace ori::fixtures

#pragma once

#include "linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ori
{

/** @brief Numerical tolerances shared by every analysis stage */
struct Tolerances {
    /** Geometric tolerance, relative to the bounding-box diagonal */
    double geomRel{1e-8};
    /** Unit-norm and symmetry checks */
    double num{1e-10};
    /** Absolute residual tolerance on the consistency constraints */
    double res{1e-9};
    /** Relative singular-value cut-off for ranks and kernels */
    double rank{1e-10};
    /** Absolute threshold on restricted eigenvalues */
    double pd{1e-9};
    /** Allowed mismatch between stored and geometric folding angles */
    double rho{1e-9};
};

struct Vertex {
    int id{0};
    Vec3 position{Vec3::Zero()};
};

/** Vertex ids in counter-clockwise order with respect to the paper normal */
struct Panel {
    std::vector<int> vertexCycle;
};

struct Crease {
    int id{0};
    std::array<int, 2> endpoints{0, 0};
    /** Stored direction vector points away from this endpoint */
    int directionFrom{0};
    double foldingAngle{0.0};
    /** Second entry is -1 for a boundary crease */
    std::array<int, 2> adjacentPanels{-1, -1};

    bool inner() const { return adjacentPanels[1] >= 0; }
    int otherEnd(int v) const { return endpoints[0] == v ? endpoints[1] : endpoints[0]; }
};

enum class UnitKind { Vertex, Hole };

/** One crease of a single unit, in loop order */
struct UnitCrease {
    /** Column of the crease in the Jacobian */
    int column{0};
    int creaseId{0};
    /** +1 when the stored direction already points away from the unit */
    int sign{1};
    /** Unit direction pointing away from the unit, global frame */
    Vec3 direction{Vec3::Zero()};
    /** Point of the unit on the crease line (centre or hole vertex) */
    Vec3 origin{Vec3::Zero()};
    int unitVertex{0};
    /** Panel preceding the crease in the loop, and the one following it */
    int panelBefore{0};
    int panelAfter{0};
};

/**
 * @brief A single-vertex or single-hole sub-structure with its constant loop data
 *
 * steps[j] is the rigid transform between consecutive crease frames inside
 * the panel preceding crease j, so the loop product is
 * steps[0]*Rx(rho_0)*...*steps[n-1]*Rx(rho_{n-1}). placement maps the
 * local frame of the last panel to global coordinates.
 */
struct SingleUnit {
    UnitKind kind{UnitKind::Vertex};
    /** Vertex id for vertex units, hole index for hole units */
    int centre{0};
    /** True for a hole whose creases are concurrent */
    bool reclassifiedHole{false};
    Vec3 centrePoint{Vec3::Zero()};
    std::vector<UnitCrease> creases;
    std::vector<Mat4> steps;
    Mat4 placement{Mat4::Identity()};
    int rowOffset{0};

    int rowCount() const { return kind == UnitKind::Vertex ? 3 : 6; }
    int degree() const { return static_cast<int>(creases.size()); }
};

struct IncidenceMatrix {
    Eigen::MatrixXi D;
    Eigen::MatrixXi Lv;
    Eigen::MatrixXi Lh;
};

struct CreasedPaper {
    std::vector<Vertex> vertices;
    std::vector<Panel> panels;
    std::vector<Crease> creases;

    std::vector<int> innerVertexIds;
    /** Crease id for each Jacobian column */
    std::vector<int> innerCreaseIds;
    std::vector<std::vector<int>> holeBoundaries;
    std::vector<int> outerBoundary;
    std::vector<int> boundaryVertexIds;
    std::vector<SingleUnit> units;
    std::vector<std::string> warnings;

    int I{0}, J{0}, H{0}, K{0}, Z{0};
    /** Euler characteristic V - E + K of the panel complex */
    int euler{1};
    /** Absolute geometric tolerance */
    double tauGeom{1e-8};
    Tolerances tol;

    int constraintRows() const
    {
        int r = 0;
        for (const auto& u : units) {
            r += u.rowCount();
        }
        return r;
    }
    int reclassifiedHoles() const
    {
        return static_cast<int>(std::count_if(units.begin(), units.end(),
                                              [](const SingleUnit& u) { return u.reclassifiedHole; }));
    }
    bool closedSurface() const { return Z == 0 && !panels.empty(); }

    /** Folding angles ordered by Jacobian column */
    VecX foldingAngles() const
    {
        VecX r(J);
        for (int j = 0; j < J; ++j) {
            r(j) = creases[innerCreaseIds[j]].foldingAngle;
        }
        return r;
    }
    /** Column of a crease id, or -1 for a boundary crease */
    int columnOf(int creaseId) const
    {
        auto it = std::find(innerCreaseIds.begin(), innerCreaseIds.end(), creaseId);
        return it == innerCreaseIds.end() ? -1 : static_cast<int>(it - innerCreaseIds.begin());
    }
};

namespace detail
{

using Edge = std::pair<int, int>;

inline Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline Vec3 newellVector(const std::vector<Vec3>& pts)
{
    Vec3 n = Vec3::Zero();
    const size_t k = pts.size();
    for (size_t i = 0; i < k; ++i) {
        n += pts[i].cross(pts[(i + 1) % k]);
    }
    return 0.5 * n;
}

inline std::vector<Vec3> panelPoints(const CreasedPaper& paper, int panel)
{
    std::vector<Vec3> pts;
    for (int v : paper.panels[panel].vertexCycle) {
        pts.push_back(paper.vertices[v].position);
    }
    return pts;
}

inline Vec3 panelNormal(const CreasedPaper& paper, int panel)
{
    const Vec3 n = newellVector(panelPoints(paper, panel));
    if (n.norm() <= paper.tauGeom * paper.tauGeom) {
        throw InputError("panel " + std::to_string(panel) + " has zero area");
    }
    return n.normalized();
}

/** True when the panel cycle contains the directed edge a->b */
inline bool traverses(const Panel& p, int a, int b)
{
    const size_t k = p.vertexCycle.size();
    for (size_t i = 0; i < k; ++i) {
        if (p.vertexCycle[i] == a && p.vertexCycle[(i + 1) % k] == b) {
            return true;
        }
    }
    return false;
}

/** Panel normal projected perpendicular to a unit axis */
inline Vec3 normalAcross(const CreasedPaper& paper, int panel, const Vec3& axis)
{
    const Vec3 n = panelNormal(paper, panel);
    const Vec3 z = n - axis * axis.dot(n);
    if (z.norm() < 1e-12) {
        throw InputError("panel " + std::to_string(panel) + " is degenerate along one of its edges");
    }
    return z.normalized();
}

/** Rigid frame on a panel at a crease: x along the axis, z along the projected normal */
inline Mat4 crossingFrame(const CreasedPaper& paper, int panel, const Vec3& origin, const Vec3& axis)
{
    const Vec3 z = normalAcross(paper, panel, axis);
    Mat3 r;
    r.col(0) = axis;
    r.col(1) = z.cross(axis);
    r.col(2) = z;
    return homogeneous(r, origin);
}

/**
 * Dihedral folding angle of a crease from the current geometry. With panel A
 * traversing a->b and u the unit direction a->b, the angle satisfies
 * n_A = Rot(u, rho) n_B, which gives the same value from either endpoint.
 */
inline double geometricFoldAngle(const CreasedPaper& paper, const Crease& c)
{
    int a = c.endpoints[0];
    int b = c.endpoints[1];
    int pa = c.adjacentPanels[0];
    int pb = c.adjacentPanels[1];
    if (!traverses(paper.panels[pa], a, b)) {
        std::swap(pa, pb);
    }
    const Vec3 u = (paper.vertices[b].position - paper.vertices[a].position).normalized();
    const Vec3 na = normalAcross(paper, pa, u);
    const Vec3 nb = normalAcross(paper, pb, u);
    return std::atan2(u.dot(nb.cross(na)), nb.dot(na));
}

inline double wrapAngle(double a)
{
    const double twoPi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, twoPi);
    if (a < 0) {
        a += twoPi;
    }
    return a - std::numbers::pi;
}

}  // namespace detail

/**
 * @brief Least-squares common point of a set of lines and whether all lines pass near it
 */
inline std::pair<Vec3, bool> concurrencyPoint(const std::vector<Vec3>& origins, const std::vector<Vec3>& dirs, double tol)
{
    Mat3 a = Mat3::Zero();
    Vec3 b = Vec3::Zero();
    for (size_t i = 0; i < origins.size(); ++i) {
        const Mat3 proj = Mat3::Identity() - dirs[i] * dirs[i].transpose();
        a += proj;
        b += proj * origins[i];
    }
    const Vec3 c = RankRevealingSvd(a, 1e-10).solve(b);
    bool concurrent = !origins.empty();
    for (size_t i = 0; i < origins.size(); ++i) {
        const Vec3 d = (Mat3::Identity() - dirs[i] * dirs[i].transpose()) * (c - origins[i]);
        if (d.norm() > tol) {
            concurrent = false;
        }
    }
    return {c, concurrent};
}

/**
 * @brief Walk the panels around a unit and return its creases in loop order
 *
 * The unit is the set of vertices `members` (one centre vertex or the
 * boundary vertices of a hole).
 */
inline std::vector<UnitCrease> traverseUnit(const CreasedPaper& paper, const std::vector<int>& members, const std::string& label)
{
    const std::set<int> S(members.begin(), members.end());
    std::map<int, int> incident;  // column -> unit vertex
    for (int j = 0; j < paper.J; ++j) {
        const Crease& c = paper.creases[paper.innerCreaseIds[j]];
        const bool in0 = S.count(c.endpoints[0]) > 0;
        const bool in1 = S.count(c.endpoints[1]) > 0;
        if (in0 && in1) {
            throw InputError(label + ": crease " + std::to_string(c.id) + " joins two vertices of the same unit");
        }
        if (in0 || in1) {
            incident[j] = in0 ? c.endpoints[0] : c.endpoints[1];
        }
    }
    std::vector<UnitCrease> out;
    if (incident.empty()) {
        return out;
    }

    auto creaseOf = [&](int a, int b) -> int {
        for (const auto& [col, s] : incident) {
            const Crease& c = paper.creases[paper.innerCreaseIds[col]];
            if (c.endpoints == std::array<int, 2>{a, b} || c.endpoints == std::array<int, 2>{b, a}) {
                return col;
            }
        }
        return -1;
    };

    const int startCol = incident.begin()->first;
    int col = startCol;
    int prevPanel = -1;
    std::set<int> seen;
    while (true) {
        if (seen.count(col) > 0) {
            throw InputError(label + ": panels around the unit do not form a single loop");
        }
        seen.insert(col);
        const Crease& c = paper.creases[paper.innerCreaseIds[col]];
        const int s = incident[col];
        const int t = c.otherEnd(s);
        int panel = c.adjacentPanels[0];
        if (!detail::traverses(paper.panels[panel], s, t)) {
            panel = c.adjacentPanels[1];
        }
        const int otherPanel = panel == c.adjacentPanels[0] ? c.adjacentPanels[1] : c.adjacentPanels[0];

        UnitCrease uc;
        uc.column = col;
        uc.creaseId = c.id;
        uc.sign = c.directionFrom == s ? 1 : -1;
        uc.unitVertex = s;
        uc.origin = paper.vertices[s].position;
        const Vec3 d = paper.vertices[t].position - paper.vertices[s].position;
        uc.direction = d.normalized();
        uc.panelAfter = panel;
        uc.panelBefore = otherPanel;
        if (prevPanel >= 0 && prevPanel != otherPanel) {
            throw InputError(label + ": inconsistent panel adjacency around the unit");
        }
        out.push_back(uc);

        // walk forward along the panel cycle until the next unit vertex
        const auto& cyc = paper.panels[panel].vertexCycle;
        const size_t k = cyc.size();
        size_t pos = static_cast<size_t>(std::find(cyc.begin(), cyc.end(), s) - cyc.begin());
        int prev = s;
        int cur = cyc[(pos + 1) % k];
        for (size_t step = 0; step < k && S.count(cur) == 0; ++step) {
            pos = (pos + 1) % k;
            prev = cur;
            cur = cyc[(pos + 1) % k];
        }
        const int next = creaseOf(cur, prev);
        if (next < 0) {
            throw InputError(label + ": unit is not surrounded by inner creases (non-manifold or boundary vertex)");
        }
        prevPanel = panel;
        if (next == startCol) {
            if (out.front().panelBefore != panel) {
                throw InputError(label + ": inconsistent panel adjacency around the unit");
            }
            break;
        }
        col = next;
    }
    if (out.size() != incident.size()) {
        throw InputError(label + ": non-manifold unit (" + std::to_string(incident.size()) + " incident creases, " +
                         std::to_string(out.size()) + " in one loop)");
    }
    return out;
}

/** Fill the constant loop data (frames, steps, placement) of a unit from its creases */
inline void buildLoopData(const CreasedPaper& paper, SingleUnit& unit)
{
    const int n = unit.degree();
    std::vector<Mat4> before(n), after(n);
    for (int j = 0; j < n; ++j) {
        const auto& uc = unit.creases[j];
        const Vec3 origin = unit.reclassifiedHole ? unit.centrePoint : uc.origin;
        before[j] = detail::crossingFrame(paper, uc.panelBefore, origin, uc.direction);
        after[j] = detail::crossingFrame(paper, uc.panelAfter, origin, uc.direction);
    }
    unit.steps.assign(n, Mat4::Identity());
    for (int j = 0; j < n; ++j) {
        const Mat4& prevFrame = after[(j + n - 1) % n];
        unit.steps[j] = rigidInverse(prevFrame) * before[j];
        if (unit.kind == UnitKind::Vertex) {
            unit.steps[j].topRightCorner<3, 1>().setZero();
        }
    }
    unit.placement = after[n - 1];
}

/**
 * @brief One unit per inner vertex and per hole, holes first checked for concurrent creases
 */
inline std::vector<SingleUnit> extractSingleUnits(const CreasedPaper& paper)
{
    for (int j = 0; j < paper.J; ++j) {
        const Crease& c = paper.creases[paper.innerCreaseIds[j]];
        const double len = (paper.vertices[c.endpoints[0]].position - paper.vertices[c.endpoints[1]].position).norm();
        if (len <= paper.tauGeom) {
            throw InputError("crease " + std::to_string(c.id) + " has zero length");
        }
    }
    std::vector<SingleUnit> units;
    int row = 0;
    for (int v : paper.innerVertexIds) {
        SingleUnit u;
        u.kind = UnitKind::Vertex;
        u.centre = v;
        u.centrePoint = paper.vertices[v].position;
        u.creases = traverseUnit(paper, {v}, "vertex " + std::to_string(v));
        if (u.creases.empty()) {
            throw InputError("inner vertex " + std::to_string(v) + " has no inner creases");
        }
        buildLoopData(paper, u);
        u.rowOffset = row;
        row += u.rowCount();
        units.push_back(std::move(u));
    }
    for (int h = 0; h < static_cast<int>(paper.holeBoundaries.size()); ++h) {
        SingleUnit u;
        u.kind = UnitKind::Hole;
        u.centre = h;
        u.creases = traverseUnit(paper, paper.holeBoundaries[h], "hole " + std::to_string(h));
        if (u.creases.empty()) {
            // a hole without inner creases imposes no constraint
            continue;
        }
        std::vector<Vec3> origins, dirs;
        for (const auto& uc : u.creases) {
            origins.push_back(uc.origin);
            dirs.push_back(uc.direction);
        }
        const auto [c, concurrent] = concurrencyPoint(origins, dirs, paper.tauGeom);
        u.centrePoint = c;
        if (concurrent) {
            u.kind = UnitKind::Vertex;
            u.reclassifiedHole = true;
            for (auto& uc : u.creases) {
                uc.origin = c;
            }
        }
        buildLoopData(paper, u);
        u.rowOffset = row;
        row += u.rowCount();
        units.push_back(std::move(u));
    }
    return units;
}

inline IncidenceMatrix buildIncidence(const CreasedPaper& paper)
{
    IncidenceMatrix inc;
    const int V = static_cast<int>(paper.vertices.size());
    inc.D = Eigen::MatrixXi::Zero(V, paper.J);
    for (int j = 0; j < paper.J; ++j) {
        const Crease& c = paper.creases[paper.innerCreaseIds[j]];
        inc.D(c.directionFrom, j) = 1;
        inc.D(c.otherEnd(c.directionFrom), j) = -1;
    }
    inc.Lv = Eigen::MatrixXi::Zero(paper.I, paper.J);
    for (int i = 0; i < paper.I; ++i) {
        inc.Lv.row(i) = inc.D.row(paper.innerVertexIds[i]);
    }
    inc.Lh = Eigen::MatrixXi::Zero(paper.H, paper.J);
    for (int h = 0; h < paper.H; ++h) {
        for (int v : paper.holeBoundaries[h]) {
            inc.Lh.row(h) += inc.D.row(v);
        }
    }
    return inc;
}

/** Current geometric folding angle of every inner crease, by column */
inline VecX geometricFoldAngles(const CreasedPaper& paper)
{
    VecX r(paper.J);
    for (int j = 0; j < paper.J; ++j) {
        r(j) = detail::geometricFoldAngle(paper, paper.creases[paper.innerCreaseIds[j]]);
    }
    return r;
}

namespace detail
{

/** Derive topology: adjacency, boundary cycles, inner entities and counts */
inline void deriveTopology(CreasedPaper& paper)
{
    const int V = static_cast<int>(paper.vertices.size());
    const int K = static_cast<int>(paper.panels.size());
    std::map<Edge, std::vector<std::pair<int, Edge>>> edgeUse;  // undirected -> (panel, directed)
    std::vector<int> vertexUse(V, 0);
    for (int p = 0; p < K; ++p) {
        const auto& cyc = paper.panels[p].vertexCycle;
        for (size_t i = 0; i < cyc.size(); ++i) {
            const int a = cyc[i];
            const int b = cyc[(i + 1) % cyc.size()];
            edgeUse[undirected(a, b)].push_back({p, {a, b}});
            ++vertexUse[a];
        }
    }
    for (int v = 0; v < V; ++v) {
        if (vertexUse[v] == 0) {
            throw InputError("vertex " + std::to_string(v) + " belongs to no panel");
        }
    }
    for (const auto& [e, uses] : edgeUse) {
        if (uses.size() > 2) {
            throw InputError("non-manifold edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                             " shared by " + std::to_string(uses.size()) + " panels");
        }
        if (uses.size() == 2 && uses[0].second == uses[1].second) {
            throw InputError("panels " + std::to_string(uses[0].first) + " and " + std::to_string(uses[1].first) +
                             " have inconsistent orientation along edge " + std::to_string(e.first) + "-" +
                             std::to_string(e.second));
        }
    }

    // creases: adjacency, inner classification
    std::set<Edge> listed;
    for (auto& c : paper.creases) {
        const Edge e = undirected(c.endpoints[0], c.endpoints[1]);
        auto it = edgeUse.find(e);
        if (it == edgeUse.end()) {
            throw InputError("crease " + std::to_string(c.id) + " is not an edge of any panel");
        }
        if (!listed.insert(e).second) {
            throw InputError("crease " + std::to_string(c.id) + " duplicates another crease");
        }
        c.adjacentPanels = {it->second[0].first, it->second.size() > 1 ? it->second[1].first : -1};
    }
    for (const auto& [e, uses] : edgeUse) {
        if (uses.size() == 2 && listed.count(e) == 0) {
            throw InputError("edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                             " is shared by two panels but is not listed as a crease");
        }
    }
    paper.innerCreaseIds.clear();
    for (const auto& c : paper.creases) {
        if (c.inner()) {
            paper.innerCreaseIds.push_back(c.id);
        }
    }

    // connectivity through shared edges
    if (K > 0) {
        std::vector<std::vector<int>> adj(K);
        for (const auto& [e, uses] : edgeUse) {
            if (uses.size() == 2) {
                adj[uses[0].first].push_back(uses[1].first);
                adj[uses[1].first].push_back(uses[0].first);
            }
        }
        std::vector<bool> seen(K, false);
        std::queue<int> q;
        q.push(0);
        seen[0] = true;
        int count = 1;
        while (!q.empty()) {
            const int p = q.front();
            q.pop();
            for (int nb : adj[p]) {
                if (!seen[nb]) {
                    seen[nb] = true;
                    ++count;
                    q.push(nb);
                }
            }
        }
        if (count != K) {
            throw InputError("panels do not form a connected paper");
        }
    }

    // boundary cycles from directed single-use edges
    std::map<int, int> nextOnBoundary;
    for (const auto& [e, uses] : edgeUse) {
        if (uses.size() == 1) {
            const auto [a, b] = uses[0].second;
            if (nextOnBoundary.count(a) > 0) {
                throw InputError("boundary is pinched at vertex " + std::to_string(a));
            }
            nextOnBoundary[a] = b;
        }
    }
    std::vector<std::vector<int>> cycles;
    std::set<int> visited;
    for (const auto& [start, unused] : nextOnBoundary) {
        if (visited.count(start) > 0) {
            continue;
        }
        std::vector<int> cyc;
        int cur = start;
        while (visited.count(cur) == 0) {
            visited.insert(cur);
            cyc.push_back(cur);
            auto it = nextOnBoundary.find(cur);
            if (it == nextOnBoundary.end()) {
                throw InputError("open boundary at vertex " + std::to_string(cur));
            }
            cur = it->second;
        }
        if (cur != start) {
            throw InputError("boundary is pinched at vertex " + std::to_string(cur));
        }
        cycles.push_back(cyc);
    }
    std::vector<double> area;
    for (const auto& cyc : cycles) {
        std::vector<Vec3> pts;
        for (int v : cyc) {
            pts.push_back(paper.vertices[v].position);
        }
        area.push_back(newellVector(pts).norm());
    }
    paper.outerBoundary.clear();
    paper.holeBoundaries.clear();
    if (!cycles.empty()) {
        const size_t outer = static_cast<size_t>(std::max_element(area.begin(), area.end()) - area.begin());
        for (size_t i = 0; i < cycles.size(); ++i) {
            if (i != outer && area[i] >= area[outer] * (1.0 - 1e-6)) {
                paper.warnings.push_back("outer boundary is ambiguous: two boundary cycles enclose the same area");
            }
        }
        paper.outerBoundary = cycles[outer];
        for (size_t i = 0; i < cycles.size(); ++i) {
            if (i != outer) {
                paper.holeBoundaries.push_back(cycles[i]);
            }
        }
        // holes ordered by their smallest vertex id for determinism
        std::sort(paper.holeBoundaries.begin(), paper.holeBoundaries.end(),
                  [](const auto& a, const auto& b) { return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end()); });
    }

    paper.boundaryVertexIds.assign(visited.begin(), visited.end());
    paper.innerVertexIds.clear();
    for (int v = 0; v < V; ++v) {
        if (visited.count(v) == 0) {
            paper.innerVertexIds.push_back(v);
        }
    }

    paper.I = static_cast<int>(paper.innerVertexIds.size());
    paper.J = static_cast<int>(paper.innerCreaseIds.size());
    paper.H = static_cast<int>(paper.holeBoundaries.size());
    paper.K = K;
    paper.Z = static_cast<int>(paper.boundaryVertexIds.size());
    paper.euler = V - static_cast<int>(edgeUse.size()) + K;

    const bool disk = !cycles.empty() && paper.euler == 1 - paper.H;
    const bool sphere = cycles.empty() && paper.euler == 2;
    if (!disk && !sphere) {
        throw InputError("Euler identity violated: V-E+K = " + std::to_string(paper.euler) + " with " +
                         std::to_string(paper.H) + " holes (expected a disk with holes or a closed sphere)");
    }
}

/**
 * Fold the flat development with the stored angles and compare with the
 * 3-D positions. The first panel is placed by a best rigid fit; every other
 * panel is reached through creases by rotating about the crease line.
 */
inline void checkDevelopment(const CreasedPaper& paper, const std::vector<Vec3>& flat)
{
    const int K = paper.K;
    std::vector<std::optional<Mat4>> place(K);
    {
        const auto& cyc = paper.panels[0].vertexCycle;
        Eigen::Matrix3Xd src(3, cyc.size()), dst(3, cyc.size());
        for (size_t i = 0; i < cyc.size(); ++i) {
            src.col(i) = flat[cyc[i]];
            dst.col(i) = paper.vertices[cyc[i]].position;
        }
        place[0] = Mat4(Eigen::umeyama(src, dst, false));
    }
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
        const int p = q.front();
        q.pop();
        for (const auto& c : paper.creases) {
            if (!c.inner() || (c.adjacentPanels[0] != p && c.adjacentPanels[1] != p)) {
                continue;
            }
            const int other = c.adjacentPanels[0] == p ? c.adjacentPanels[1] : c.adjacentPanels[0];
            if (place[other]) {
                continue;
            }
            const int a = c.endpoints[0];
            const int b = c.endpoints[1];
            // rho rotates the panel traversing a->b relative to the other one about a->b
            const bool childTraverses = traverses(paper.panels[other], a, b);
            const double angle = childTraverses ? c.foldingAngle : -c.foldingAngle;
            const Vec3 u = (flat[b] - flat[a]).normalized();
            const Mat3 r = Eigen::AngleAxisd(angle, u).toRotationMatrix();
            const Mat4 local = homogeneous(r, flat[a] - r * flat[a]);
            place[other] = (*place[p]) * local;
            q.push(other);
        }
    }
    const double tol = std::max(paper.tauGeom, 1e-9);
    for (int p = 0; p < K; ++p) {
        for (int v : paper.panels[p].vertexCycle) {
            const Vec3 folded = (*place[p] * flat[v].homogeneous()).head<3>();
            const double err = (folded - paper.vertices[v].position).norm();
            if (err > tol * 10.0) {
                throw InputError("configuration inconsistency: folding the flat state moves vertex " + std::to_string(v) +
                                 " by " + std::to_string(err) + " from its stored position");
            }
        }
    }
}

}  // namespace detail

/**
 * @brief Assemble a creased paper from raw parts and derive everything else
 *
 * Creases with a NaN folding angle take their geometric value.
 */
inline CreasedPaper makeCreasedPaper(std::vector<Vertex> vertices, std::vector<Panel> panels, std::vector<Crease> creases,
                                     const Tolerances& tol = {}, const std::optional<std::vector<Vec3>>& flat = std::nullopt)
{
    CreasedPaper paper;
    paper.tol = tol;
    const int V = static_cast<int>(vertices.size());
    std::sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    for (int i = 0; i < V; ++i) {
        if (vertices[i].id != i) {
            throw InputError("vertex ids must be unique and dense 0..V-1");
        }
        if (!vertices[i].position.allFinite()) {
            throw InputError("vertex " + std::to_string(i) + " has a non-finite position");
        }
    }
    for (size_t p = 0; p < panels.size(); ++p) {
        const auto& cyc = panels[p].vertexCycle;
        if (cyc.size() < 3) {
            throw InputError("panel " + std::to_string(p) + " has fewer than 3 vertices");
        }
        std::set<int> uniq(cyc.begin(), cyc.end());
        if (uniq.size() != cyc.size()) {
            throw InputError("panel " + std::to_string(p) + " repeats a vertex");
        }
        for (int v : cyc) {
            if (v < 0 || v >= V) {
                throw InputError("panel " + std::to_string(p) + " references unknown vertex " + std::to_string(v));
            }
        }
    }
    std::sort(creases.begin(), creases.end(), [](const Crease& a, const Crease& b) { return a.id < b.id; });
    for (int i = 0; i < static_cast<int>(creases.size()); ++i) {
        const Crease& c = creases[i];
        if (c.id != i) {
            throw InputError("crease ids must be unique and dense 0..C-1");
        }
        for (int e : c.endpoints) {
            if (e < 0 || e >= V) {
                throw InputError("crease " + std::to_string(i) + " references unknown vertex " + std::to_string(e));
            }
        }
        if (c.endpoints[0] == c.endpoints[1]) {
            throw InputError("crease " + std::to_string(i) + " has identical endpoints");
        }
        if (c.directionFrom != c.endpoints[0] && c.directionFrom != c.endpoints[1]) {
            throw InputError("crease " + std::to_string(i) + ": 'from' must be one of its endpoints");
        }
        if (!std::isnan(c.foldingAngle) &&
            (!std::isfinite(c.foldingAngle) || std::abs(c.foldingAngle) > std::numbers::pi + 1e-12)) {
            throw InputError("crease " + std::to_string(i) + ": folding angle outside [-pi, pi]");
        }
    }
    paper.vertices = std::move(vertices);
    paper.panels = std::move(panels);
    paper.creases = std::move(creases);

    double diag = 1.0;
    if (V > 0) {
        Vec3 lo = paper.vertices[0].position, hi = lo;
        for (const auto& v : paper.vertices) {
            lo = lo.cwiseMin(v.position);
            hi = hi.cwiseMax(v.position);
        }
        diag = std::max((hi - lo).norm(), 1e-300);
    }
    paper.tauGeom = tol.geomRel * diag;

    detail::deriveTopology(paper);

    for (int p = 0; p < paper.K; ++p) {
        const Vec3 n = detail::panelNormal(paper, p);
        const Vec3 o = paper.vertices[paper.panels[p].vertexCycle[0]].position;
        for (int v : paper.panels[p].vertexCycle) {
            if (std::abs(n.dot(paper.vertices[v].position - o)) > paper.tauGeom) {
                paper.warnings.push_back("panel " + std::to_string(p) + " is not planar; treated as a rigid body");
                break;
            }
        }
    }

    const VecX geo = geometricFoldAngles(paper);
    for (int j = 0; j < paper.J; ++j) {
        Crease& c = paper.creases[paper.innerCreaseIds[j]];
        if (std::isnan(c.foldingAngle)) {
            c.foldingAngle = geo(j);
            paper.warnings.push_back("crease " + std::to_string(c.id) + ": folding angle taken from the geometry");
            continue;
        }
        const double diff = std::abs(detail::wrapAngle(c.foldingAngle - geo(j)));
        if (diff > tol.rho) {
            throw InputError("configuration inconsistency: crease " + std::to_string(c.id) + " stores folding angle " +
                             std::to_string(c.foldingAngle) + " but the geometry gives " + std::to_string(geo(j)));
        }
    }
    for (auto& c : paper.creases) {
        if (!c.inner() && std::isnan(c.foldingAngle)) {
            c.foldingAngle = 0.0;
        }
    }

    if (flat) {
        if (static_cast<int>(flat->size()) != V) {
            throw InputError("flat_vertices must list every vertex");
        }
        detail::checkDevelopment(paper, *flat);
    }

    paper.units = extractSingleUnits(paper);
    return paper;
}

/** @brief Parse the JSON document format into a creased paper */
inline CreasedPaper loadCreasedPaper(const nlohmann::json& doc, const Tolerances& tol = {})
{
    try {
        std::vector<Vertex> vertices;
        for (const auto& v : doc.at("vertices")) {
            const auto xyz = v.at("xyz").get<std::vector<double>>();
            if (xyz.size() != 3) {
                throw InputError("vertex xyz must have 3 components");
            }
            vertices.push_back({v.at("id").get<int>(), Vec3(xyz[0], xyz[1], xyz[2])});
        }
        std::vector<Panel> panels;
        for (const auto& p : doc.at("panels")) {
            panels.push_back({p.get<std::vector<int>>()});
        }
        std::vector<Crease> creases;
        if (doc.contains("creases")) {
            for (const auto& c : doc.at("creases")) {
                Crease cr;
                cr.id = c.at("id").get<int>();
                const auto ends = c.at("ends").get<std::vector<int>>();
                if (ends.size() != 2) {
                    throw InputError("crease ends must have 2 entries");
                }
                cr.endpoints = {ends[0], ends[1]};
                cr.directionFrom = c.contains("from") ? c.at("from").get<int>() : ends[0];
                cr.foldingAngle = c.contains("rho") ? c.at("rho").get<double>() : std::numeric_limits<double>::quiet_NaN();
                creases.push_back(cr);
            }
        }
        std::optional<std::vector<Vec3>> flat;
        std::vector<std::string> notes;
        if (doc.contains("flat_vertices")) {
            std::vector<std::optional<Vec3>> f(vertices.size());
            for (const auto& v : doc.at("flat_vertices")) {
                const int id = v.at("id").get<int>();
                const auto xy = v.at("xyz2").get<std::vector<double>>();
                if (id < 0 || id >= static_cast<int>(f.size()) || xy.size() != 2) {
                    throw InputError("malformed flat_vertices entry");
                }
                f[id] = Vec3(xy[0], xy[1], 0.0);
            }
            std::vector<Vec3> out;
            for (const auto& p : f) {
                if (!p) {
                    throw InputError("flat_vertices must list every vertex");
                }
                out.push_back(*p);
            }
            flat = out;
        } else {
            notes.push_back("no flat_vertices given; development consistency check skipped");
        }
        CreasedPaper paper = makeCreasedPaper(std::move(vertices), std::move(panels), std::move(creases), tol, flat);
        paper.warnings.insert(paper.warnings.end(), notes.begin(), notes.end());
        return paper;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed document: ") + e.what());
    }
}

/** @brief Serialize a creased paper back to the document format */
inline nlohmann::json toJson(const CreasedPaper& paper)
{
    nlohmann::json doc;
    doc["vertices"] = nlohmann::json::array();
    for (const auto& v : paper.vertices) {
        doc["vertices"].push_back({{"id", v.id}, {"xyz", {v.position.x(), v.position.y(), v.position.z()}}});
    }
    doc["panels"] = nlohmann::json::array();
    for (const auto& p : paper.panels) {
        doc["panels"].push_back(p.vertexCycle);
    }
    doc["creases"] = nlohmann::json::array();
    for (const auto& c : paper.creases) {
        doc["creases"].push_back(
            {{"id", c.id}, {"ends", {c.endpoints[0], c.endpoints[1]}}, {"from", c.directionFrom}, {"rho", c.foldingAngle}});
    }
    return doc;
}

}  // namespace ori

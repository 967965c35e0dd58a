#pragma once

#include "barjoint.hpp"
#include "stability.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ori
{

/**
 * @brief Summary of the whole rigidity ladder for one structure
 *
 * The ladder runs first-order rigid => pre-stress stable => second-order
 * rigid => rigid; ladderConsistent records that no implication was violated.
 */
struct AnalysisReport {
    int I{0}, J{0}, H{0}, K{0}, Z{0};
    int rows{0};
    int rank{0};
    int m{0};
    int s{0};
    bool firstOrderRigid{false};
    bool staticallyRigid{false};
    bool prestressStable{false};
    std::optional<std::vector<double>> omega;
    std::vector<double> restrictedEigenvalues;
    std::optional<double> certifiedT;
    bool secondOrderRigid{false};
    bool secondOrderSampled{false};
    bool rigidImplied{false};
    int s1{0}, s2{0}, s3{0};
    bool countingHolds{false};
    bool correspondenceAgrees{false};
    int frameworkFlexes{0};
    bool ladderConsistent{true};
    std::vector<std::string> warnings;

    bool operator==(const AnalysisReport&) const = default;
};

struct AnalysisOptions {
    SamplingOptions sampling;
    bool correspondence{true};
};

inline std::vector<double> toStd(const VecX& v) { return {v.data(), v.data() + v.size()}; }

inline VecX fromStd(const std::vector<double>& v)
{
    VecX out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v[i];
    }
    return out;
}

inline AnalysisReport analyze(const CreasedPaper& paper, const AnalysisOptions& opts = {})
{
    AnalysisReport r;
    r.I = paper.I;
    r.J = paper.J;
    r.H = paper.H;
    r.K = paper.K;
    r.Z = paper.Z;
    r.warnings = paper.warnings;
    const RigiditySystem sys = RigiditySystem::build(paper);
    r.rows = sys.rows();
    r.rank = sys.rank;
    r.m = sys.m();
    r.s = sys.s();
    r.firstOrderRigid = r.m == 0;
    r.staticallyRigid = classifyStatic(paper, sys.ja, sys.tol.rank).verdict == StaticClass::StaticallyRigid;

    const StabilizingSearch search = findStabilizingStress(sys);
    if (search.omega) {
        const PrestressVerdict v = isPrestressStable(sys, *search.omega, StiffnessModel::identity(paper));
        r.prestressStable = v.stable;
        r.omega = toStd(*search.omega);
        r.restrictedEigenvalues = toStd(v.restrictedEigenvalues);
        r.certifiedT = v.certifiedT;
    }
    const SecondOrderResult so = secondOrderClassify(sys, opts.sampling);
    r.secondOrderRigid = so.rigid;
    r.secondOrderSampled = !so.exact;
    r.rigidImplied = r.secondOrderRigid;

    const CountingReport counts = countingReport(paper, r.m);
    r.s1 = counts.s1;
    r.s2 = counts.s2;
    r.s3 = counts.s3;
    r.countingHolds = counts.identityHolds;
    if (opts.correspondence && paper.K > 0) {
        const CorrespondenceReport cc = correspondenceCheck(paper, sys.tol.rank);
        r.correspondenceAgrees = cc.agree && cc.countsMatch;
        r.frameworkFlexes = cc.frameworkFlexes;
    } else {
        r.correspondenceAgrees = true;
    }
    r.ladderConsistent = (!r.firstOrderRigid || r.prestressStable) && (!r.prestressStable || r.secondOrderRigid) &&
                         r.firstOrderRigid == r.staticallyRigid;
    return r;
}

inline void to_json(nlohmann::json& j, const AnalysisReport& r)
{
    j = nlohmann::json{{"I", r.I},
                       {"J", r.J},
                       {"H", r.H},
                       {"K", r.K},
                       {"Z", r.Z},
                       {"jacobian_shape", {r.rows, r.J}},
                       {"rank", r.rank},
                       {"m", r.m},
                       {"s", r.s},
                       {"firstOrderRigid", r.firstOrderRigid},
                       {"staticallyRigid", r.staticallyRigid},
                       {"prestressStable", r.prestressStable},
                       {"restricted_eigenvalues", r.restrictedEigenvalues},
                       {"secondOrderRigid", r.secondOrderRigid},
                       {"secondOrder", r.secondOrderSampled ? "sampled" : "exact"},
                       {"rigidImplied", r.rigidImplied},
                       {"counting", {{"s1", r.s1}, {"s2", r.s2}, {"s3", r.s3}, {"holds", r.countingHolds}}},
                       {"correspondence", {{"agrees", r.correspondenceAgrees}, {"framework_flexes", r.frameworkFlexes}}},
                       {"ladderConsistent", r.ladderConsistent},
                       {"warnings", r.warnings}};
    if (r.omega) {
        j["omega"] = *r.omega;
    }
    if (r.certifiedT) {
        j["certified_t"] = *r.certifiedT;
    }
}

inline void from_json(const nlohmann::json& j, AnalysisReport& r)
{
    j.at("I").get_to(r.I);
    j.at("J").get_to(r.J);
    j.at("H").get_to(r.H);
    j.at("K").get_to(r.K);
    j.at("Z").get_to(r.Z);
    r.rows = j.at("jacobian_shape").at(0).get<int>();
    j.at("rank").get_to(r.rank);
    j.at("m").get_to(r.m);
    j.at("s").get_to(r.s);
    j.at("firstOrderRigid").get_to(r.firstOrderRigid);
    j.at("staticallyRigid").get_to(r.staticallyRigid);
    j.at("prestressStable").get_to(r.prestressStable);
    j.at("restricted_eigenvalues").get_to(r.restrictedEigenvalues);
    j.at("secondOrderRigid").get_to(r.secondOrderRigid);
    r.secondOrderSampled = j.at("secondOrder").get<std::string>() == "sampled";
    j.at("rigidImplied").get_to(r.rigidImplied);
    const auto& c = j.at("counting");
    c.at("s1").get_to(r.s1);
    c.at("s2").get_to(r.s2);
    c.at("s3").get_to(r.s3);
    c.at("holds").get_to(r.countingHolds);
    j.at("correspondence").at("agrees").get_to(r.correspondenceAgrees);
    j.at("correspondence").at("framework_flexes").get_to(r.frameworkFlexes);
    j.at("ladderConsistent").get_to(r.ladderConsistent);
    j.at("warnings").get_to(r.warnings);
    r.omega = j.contains("omega") ? std::optional(j.at("omega").get<std::vector<double>>()) : std::nullopt;
    r.certifiedT = j.contains("certified_t") ? std::optional(j.at("certified_t").get<double>()) : std::nullopt;
}

/** Group a stress vector by unit: torque for every unit, force for holes */
inline nlohmann::json stressByUnit(const CreasedPaper& paper, const VecX& sigma)
{
    nlohmann::json out = nlohmann::json::array();
    for (size_t i = 0; i < paper.units.size(); ++i) {
        const auto& u = paper.units[i];
        const VecX t = sigma.segment(u.rowOffset, 3);
        nlohmann::json e{{"unit", i},
                         {"kind", u.kind == UnitKind::Vertex ? "vertex" : "hole"},
                         {"centre", u.centre},
                         {"torque", toStd(t)}};
        if (u.reclassifiedHole) {
            e["kind"] = "hole";
            e["concurrent"] = true;
        }
        if (u.rowCount() == 6) {
            e["force"] = toStd(sigma.segment(u.rowOffset + 3, 3));
        }
        out.push_back(e);
    }
    return out;
}

inline nlohmann::json frameworkJson(const BarJointFramework& fw)
{
    nlohmann::json j;
    j["joints"] = nlohmann::json::array();
    for (const auto& p : fw.joints) {
        j["joints"].push_back({p.x(), p.y(), p.z()});
    }
    j["bars"] = nlohmann::json::array();
    for (const auto& [a, b] : fw.bars) {
        j["bars"].push_back({a, b});
    }
    j["crease_bars"] = fw.creaseBars;
    return j;
}

}  // namespace ori

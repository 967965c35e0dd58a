#pragma once

#include "fixtures.hpp"
#include "report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ori::cli
{

enum ExitCode { Ok = 0, AnalysisFailure = 1, InputFailure = 2 };

struct Options {
    std::string format{"text"};
    double tolRank{1e-10};
    double tolPd{1e-9};
    int samples{10000};
    unsigned seed{0};
    bool sparse{false};
    std::string input;
    std::string load;
    std::string stress;
    bool search{false};
    std::string flex;
    bool classify{false};
    std::string out;
};

namespace detail
{

inline nlohmann::json readJson(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline VecX readVector(const std::string& path, const std::string& key)
{
    const nlohmann::json doc = readJson(path);
    if (!doc.contains(key)) {
        throw InputError(path + ": missing field '" + key + "'");
    }
    try {
        return fromStd(doc.at(key).get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline CreasedPaper loadPaper(const Options& o)
{
    Tolerances tol;
    tol.rank = o.tolRank;
    tol.pd = o.tolPd;
    return loadCreasedPaper(readJson(o.input), tol);
}

inline std::string vecText(const VecX& v)
{
    std::ostringstream s;
    s << std::setprecision(10) << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        s << (i ? ", " : "") << v(i);
    }
    s << "]";
    return s.str();
}

inline void writeMatrixText(std::ostream& out, const MatX& m)
{
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << (c ? " " : "") << m(r, c);
        }
        out << "\n";
    }
}

inline nlohmann::json matrixJson(const MatX& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows.push_back(toStd(m.row(r).transpose()));
    }
    return rows;
}

inline void emit(std::ostream& out, const Options& o, const nlohmann::json& j, const std::string& text)
{
    if (o.format == "json") {
        out << j.dump(2) << "\n";
    } else {
        out << text;
    }
}

inline const char* yesNo(bool b) { return b ? "yes" : "no"; }

inline std::string reportText(const AnalysisReport& r)
{
    std::ostringstream s;
    s << std::setprecision(6);
    s << "structure: I=" << r.I << " J=" << r.J << " H=" << r.H << " K=" << r.K << " Z=" << r.Z << "\n";
    s << "Jacobian: " << r.rows << " x " << r.J << ", rank " << r.rank << " (" << r.m << " flexes, " << r.s
      << " self-stresses)\n";
    s << "rigidity ladder:\n";
    s << "      first-order rigid   " << yesNo(r.firstOrderRigid) << " (statically rigid: " << yesNo(r.staticallyRigid)
      << ")\n";
    s << "   => pre-stress stable   " << yesNo(r.prestressStable);
    if (r.omega && r.prestressStable && r.m > 0) {
        s << " (stress " << vecText(fromStd(*r.omega)) << ")";
    }
    s << "\n";
    s << "   => second-order rigid  " << yesNo(r.secondOrderRigid) << (r.secondOrderSampled ? " (sampled)" : " (exact)")
      << "\n";
    s << "   => rigid               " << (r.rigidImplied ? "yes" : "not implied") << "\n";
    s << "counting: s1=" << r.s1 << " s2=" << r.s2 << " s3=" << r.s3 << (r.countingHolds ? " (identity holds)" : " (identity FAILS)")
      << "\n";
    s << "double-coning: " << (r.correspondenceAgrees ? "agrees" : "DISAGREES") << " (framework flexes "
      << r.frameworkFlexes << ")\n";
    if (!r.ladderConsistent) {
        s << "warning: rigidity ladder violated\n";
    }
    return s.str();
}

inline int runAnalyze(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    AnalysisOptions ao;
    ao.sampling.samples = o.samples;
    ao.sampling.seed = o.seed;
    const AnalysisReport r = analyze(paper, ao);
    emit(out, o, nlohmann::json(r), reportText(r));
    return r.ladderConsistent ? Ok : AnalysisFailure;
}

inline int runJacobian(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const MatX ja = assembleJacobian(paper);
    nlohmann::json j{{"rows", ja.rows()}, {"cols", ja.cols()}};
    std::ostringstream text;
    if (o.sparse) {
        j["entries"] = nlohmann::json::array();
        text << std::setprecision(17);
        for (const auto& e : sparseEntries(ja)) {
            j["entries"].push_back({e.row, e.col, e.value});
            text << e.row << " " << e.col << " " << e.value << "\n";
        }
    } else {
        j["data"] = matrixJson(ja);
        writeMatrixText(text, ja);
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runHessian(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const Hessian ha = assembleHessian(paper);
    nlohmann::json j{{"rows", ha.rows()}, {"cols", ha.cols()}};
    std::ostringstream text;
    text << std::setprecision(17);
    if (o.sparse) {
        j["entries"] = nlohmann::json::array();
        for (const auto& [i, a, b, v] : ha.entries()) {
            j["entries"].push_back({i, a, b, v});
            text << i << " " << a << " " << b << " " << v << "\n";
        }
    } else {
        j["slices"] = nlohmann::json::array();
        for (int i = 0; i < ha.rows(); ++i) {
            const MatX s = ha.slice(i);
            j["slices"].push_back(matrixJson(s));
            text << "# row " << i << "\n";
            writeMatrixText(text, s);
        }
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runFlexes(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const RigiditySystem sys = RigiditySystem::build(paper);
    nlohmann::json j{{"dimension", sys.m()}, {"flexes", nlohmann::json::array()}};
    std::ostringstream text;
    text << "first-order flexes: " << sys.m() << (sys.m() == 0 ? " (first-order rigid)" : "") << "\n";
    for (int i = 0; i < sys.m(); ++i) {
        j["flexes"].push_back(toStd(sys.flexes.vectors.col(i)));
        text << "  " << vecText(sys.flexes.vectors.col(i)) << "\n";
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runSelfStresses(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const RigiditySystem sys = RigiditySystem::build(paper);
    nlohmann::json j{{"dimension", sys.s()}, {"stresses", nlohmann::json::array()}};
    std::ostringstream text;
    text << "self-stresses: " << sys.s() << "\n";
    for (int i = 0; i < sys.s(); ++i) {
        const VecX w = sys.stresses.vectors.col(i);
        j["stresses"].push_back({{"vector", toStd(w)}, {"units", stressByUnit(paper, w)}});
        text << "  " << vecText(w) << "\n";
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runResolveLoad(const Options& o, std::ostream& out)
{
    if (o.load.empty()) {
        throw InputError("resolve-load needs --load <file>");
    }
    const CreasedPaper paper = loadPaper(o);
    const VecX load = readVector(o.load, "load");
    const MatX ja = assembleJacobian(paper);
    const LoadResolution res = resolveLoad(ja, load, paper.tol.rank);
    nlohmann::json j{{"resolvable", res.resolvable}, {"residual", res.residual}};
    std::ostringstream text;
    if (res.resolvable) {
        j["stress"] = toStd(res.stress);
        j["units"] = stressByUnit(paper, res.stress);
        j["self_stress_dimension"] = res.selfStresses.dimension();
        text << "resolvable; minimum-norm stress " << vecText(res.stress) << "\n";
        text << "plus any combination of " << res.selfStresses.dimension() << " self-stresses\n";
    } else {
        j["witness_flex"] = toStd(res.witnessFlex);
        text << "unresolvable; the load does work on flex " << vecText(res.witnessFlex) << "\n";
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runPrestress(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const RigiditySystem sys = RigiditySystem::build(paper);
    const StiffnessModel b = StiffnessModel::identity(paper);
    std::optional<VecX> omega;
    bool sampled = false;
    if (!o.stress.empty()) {
        omega = readVector(o.stress, "stress");
    } else {
        const StabilizingSearch search = findStabilizingStress(sys);
        omega = search.omega;
        sampled = !search.exact;
    }
    nlohmann::json j{{"m", sys.m()}, {"s", sys.s()}, {"sampled", sampled}};
    std::ostringstream text;
    if (!omega) {
        j["classification"] = "not-prestress-stable";
        j["restricted_eigenvalues"] = nlohmann::json::array();
        text << "no stabilizing self-stress found" << (sampled ? " (search)" : "") << "\n";
    } else {
        const PrestressVerdict v = isPrestressStable(sys, *omega, b);
        j["classification"] = v.stable ? "prestress-stable" : "not-prestress-stable";
        j["omega"] = toStd(*omega);
        j["restricted_eigenvalues"] = toStd(v.restrictedEigenvalues);
        if (v.certifiedT) {
            j["certified_t"] = *v.certifiedT;
        }
        text << (v.stable ? "pre-stress stable" : "not pre-stress stable") << " with stress " << vecText(*omega) << "\n";
        text << "restricted eigenvalues " << vecText(v.restrictedEigenvalues) << "\n";
        if (v.certifiedT) {
            text << "certified t = " << *v.certifiedT << "\n";
        }
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline nlohmann::json extensionJson(const SecondOrderExtension& e)
{
    nlohmann::json j{{"extendable", e.extendable}, {"flex", toStd(e.rhoPrime)}};
    if (e.extendable) {
        j["second_order"] = toStd(e.rhoSecond);
        j["residual"] = e.residual;
    } else {
        j["blocking_stress"] = toStd(e.witness);
        j["form_value"] = e.witnessValue;
    }
    return j;
}

inline int runSecondOrder(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const RigiditySystem sys = RigiditySystem::build(paper);
    std::ostringstream text;
    nlohmann::json j;
    if (!o.flex.empty()) {
        const SecondOrderExtension e = extendToSecondOrder(sys, readVector(o.flex, "flex"));
        j = extensionJson(e);
        if (e.extendable) {
            text << "extends to second order: rho'' = " << vecText(e.rhoSecond) << "\n";
        } else {
            text << "blocked by self-stress " << vecText(e.witness) << " (form value " << e.witnessValue << ")\n";
        }
    } else {
        SamplingOptions so;
        so.samples = o.samples;
        so.seed = o.seed;
        const SecondOrderResult r = secondOrderClassify(sys, so);
        j = {{"classification", r.rigid ? "second-order-rigid" : "second-order-foldable"},
             {"m", sys.m()},
             {"s", sys.s()},
             {"sampled", !r.exact}};
        text << (r.rigid ? "second-order rigid" : "second-order foldable") << (r.exact ? " (exact)" : " (sampled)") << "\n";
        if (r.witness) {
            j["witness"] = extensionJson(*r.witness);
            text << "witness flex " << vecText(r.witness->rhoPrime) << "\n";
        }
    }
    emit(out, o, j, text.str());
    return Ok;
}

inline int runDoubleCone(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const DoubleCone dc = doubleCone(paper);
    const nlohmann::json j = frameworkJson(dc.framework);
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) {
            throw InputError("cannot write " + o.out);
        }
        f << j.dump(2) << "\n";
    }
    const CorrespondenceReport cc = correspondenceCheck(paper, paper.tol.rank);
    std::ostringstream text;
    text << "double-coning framework: " << dc.framework.jointCount() << " joints, " << dc.framework.barCount() << " bars, "
         << dc.framework.creaseBars.size() << " crease bars\n";
    text << "origami flexes " << cc.origamiFlexes << ", framework non-trivial flexes " << cc.frameworkFlexes
         << (cc.agree ? " (agree)" : " (DISAGREE)") << "\n";
    emit(out, o, j, text.str());
    return cc.agree ? Ok : AnalysisFailure;
}

inline int runCount(const Options& o, std::ostream& out)
{
    const CreasedPaper paper = loadPaper(o);
    const nlohmann::json j{{"I", paper.I},
                           {"J", paper.J},
                           {"H", paper.H},
                           {"K", paper.K},
                           {"Z", paper.Z},
                           {"jacobian_shape", {paper.constraintRows(), paper.J}}};
    std::ostringstream text;
    text << "I=" << paper.I << " J=" << paper.J << " H=" << paper.H << " K=" << paper.K << " Z=" << paper.Z
         << " jacobian " << paper.constraintRows() << "x" << paper.J << "\n";
    emit(out, o, j, text.str());
    return Ok;
}

inline int runFixtures(const Options& o, std::ostream& out)
{
    const std::filesystem::path dir = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
    std::filesystem::create_directories(dir);
    nlohmann::json written = nlohmann::json::array();
    std::ostringstream text;
    for (const auto& f : fixtures::builtIn()) {
        const auto path = dir / (f.name + ".json");
        std::ofstream file(path);
        if (!file) {
            throw InputError("cannot write " + path.string());
        }
        file << f.document.dump(2) << "\n";
        written.push_back(path.string());
        text << "wrote " << path.string() << "\n";
    }
    emit(out, o, nlohmann::json{{"written", written}}, text.str());
    return Ok;
}

}  // namespace detail

/**
 * @brief Command-line entry point
 *
 * args excludes the program name. Returns 0 on success, 1 on analysis
 * failure, 2 on bad input or usage.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Rigidity analysis of rigid origami"};
    app.name("origami-rigidity");
    app.require_subcommand(1);
    Options o;
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--tol-rank", o.tolRank, "Relative singular-value cut-off");
    app.add_option("--tol-pd", o.tolPd, "Threshold on restricted eigenvalues");
    app.add_option("--samples", o.samples, "Sphere samples for second-order search")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Sampling seed (0 = unshifted)");

    auto withInput = [&](CLI::App* sub) {
        sub->add_option("file", o.input, "Creased paper document")->required();
        sub->fallthrough();
        return sub;
    };
    std::string which;
    auto* analyzeCmd = withInput(app.add_subcommand("analyze", "Run the whole rigidity ladder"));
    auto* jacCmd = withInput(app.add_subcommand("jacobian", "Print the Jacobian"));
    jacCmd->add_flag("--sparse", o.sparse, "Coordinate-list output");
    auto* hesCmd = withInput(app.add_subcommand("hessian", "Print the Hessian"));
    hesCmd->add_flag("--sparse", o.sparse, "Coordinate-list output");
    auto* flexCmd = withInput(app.add_subcommand("flexes", "First-order flex basis"));
    auto* stressCmd = withInput(app.add_subcommand("self-stresses", "Self-stress basis"));
    auto* loadCmd = withInput(app.add_subcommand("resolve-load", "Resolve a crease-torque load"));
    loadCmd->add_option("--load", o.load, "Load document")->required();
    auto* preCmd = withInput(app.add_subcommand("prestress", "Pre-stress stability"));
    auto* stressOpt = preCmd->add_option("--stress", o.stress, "Self-stress document");
    auto* searchOpt = preCmd->add_flag("--search", o.search, "Search for a stabilizing self-stress");
    stressOpt->excludes(searchOpt);
    auto* soCmd = withInput(app.add_subcommand("second-order", "Second-order rigidity"));
    auto* flexOpt = soCmd->add_option("--flex", o.flex, "Flex document");
    auto* classifyOpt = soCmd->add_flag("--classify", o.classify, "Classify over all flexes");
    flexOpt->excludes(classifyOpt);
    auto* dcCmd = withInput(app.add_subcommand("double-cone", "Export the double-coning framework"));
    dcCmd->add_option("--out", o.out, "Write the framework to this file");
    auto* countCmd = withInput(app.add_subcommand("count", "Structure counts"));
    auto* fixCmd = app.add_subcommand("fixtures", "Write the built-in structures");
    fixCmd->add_option("--out", o.out, "Output directory");
    fixCmd->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return InputFailure;
    }

    try {
        if (analyzeCmd->parsed()) {
            return detail::runAnalyze(o, out);
        }
        if (jacCmd->parsed()) {
            return detail::runJacobian(o, out);
        }
        if (hesCmd->parsed()) {
            return detail::runHessian(o, out);
        }
        if (flexCmd->parsed()) {
            return detail::runFlexes(o, out);
        }
        if (stressCmd->parsed()) {
            return detail::runSelfStresses(o, out);
        }
        if (loadCmd->parsed()) {
            return detail::runResolveLoad(o, out);
        }
        if (preCmd->parsed()) {
            return detail::runPrestress(o, out);
        }
        if (soCmd->parsed()) {
            return detail::runSecondOrder(o, out);
        }
        if (dcCmd->parsed()) {
            return detail::runDoubleCone(o, out);
        }
        if (countCmd->parsed()) {
            return detail::runCount(o, out);
        }
        if (fixCmd->parsed()) {
            return detail::runFixtures(o, out);
        }
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return InputFailure;
    } catch (const std::exception& e) {
        err << "analysis error: " << e.what() << "\n";
        return AnalysisFailure;
    }
    err << app.help();
    return InputFailure;
}

}  // namespace ori::cli

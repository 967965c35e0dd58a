#include "support.hpp"

#include <origami_rigidity/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ori;

namespace
{

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = std::filesystem::temp_directory_path() /
               ("origami-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
        ASSERT_EQ(run({"fixtures", "--out", dir_.string()}).code, 0);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / (name + ".json")).string(); }

    std::string write(const std::string& name, const nlohmann::json& j) const
    {
        const std::string p = (dir_ / name).string();
        std::ofstream(p) << j.dump();
        return p;
    }

    std::filesystem::path dir_;
};

}  // namespace

TEST_F(CliTest, WritesAllFixtures)
{
    for (const auto& name : test::builtInNames()) {
        EXPECT_TRUE(std::filesystem::exists(path(name))) << name;
    }
}

TEST_F(CliTest, AnalyzeJsonMatchesLibrary)
{
    for (const auto& name : {"degree3", "tetrahedron", "degree5-hole"}) {
        const CliRun r = run({"--format", "json", "analyze", path(name)});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto report = nlohmann::json::parse(r.out).get<AnalysisReport>();
        EXPECT_EQ(report, analyze(test::fixture(name))) << name;
    }
}

TEST_F(CliTest, AnalyzeTextShowsLadder)
{
    const CliRun r = run({"analyze", path("degree3")});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("=> pre-stress stable   yes"), std::string::npos) << r.out;
}

TEST_F(CliTest, Count)
{
    const CliRun r = run({"--format", "json", "count", path("fig3")});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["I"], 2);
    EXPECT_EQ(j["J"], 11);
    EXPECT_EQ(j["H"], 1);
    EXPECT_EQ(j["jacobian_shape"], nlohmann::json({12, 11}));
}

TEST_F(CliTest, JacobianDenseAndSparse)
{
    const CliRun dense = run({"--format", "json", "jacobian", path("degree3")});
    ASSERT_EQ(dense.code, 0);
    const auto d = nlohmann::json::parse(dense.out);
    EXPECT_EQ(d["rows"], 3);
    EXPECT_NEAR(d["data"][1][1].get<double>(), std::sqrt(3.0) / 2, 1e-12);
    const CliRun sparse = run({"--format", "json", "jacobian", "--sparse", path("degree3")});
    ASSERT_EQ(sparse.code, 0);
    EXPECT_EQ(nlohmann::json::parse(sparse.out)["entries"].size(), 5u);
}

TEST_F(CliTest, HessianSlices)
{
    const CliRun r = run({"--format", "json", "hessian", path("degree3")});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["slices"].size(), 3u);
    EXPECT_NEAR(j["slices"][2][0][1].get<double>(), std::sqrt(3.0) / 2, 1e-12);
}

TEST_F(CliTest, FlexesAndStresses)
{
    const auto f = nlohmann::json::parse(run({"--format", "json", "flexes", path("degree5-hole")}).out);
    EXPECT_EQ(f["dimension"], 1);
    const auto s = nlohmann::json::parse(run({"--format", "json", "self-stresses", path("degree5-hole")}).out);
    EXPECT_EQ(s["dimension"], 2);
    EXPECT_EQ(s["stresses"][0]["units"][0]["kind"], "hole");
}

TEST_F(CliTest, ResolveLoad)
{
    const std::string good = write("good.json", {{"load", {1, 2, 3, -1, 4}}});
    const CliRun ok = run({"--format", "json", "resolve-load", path("degree5-hole"), "--load", good});
    ASSERT_EQ(ok.code, 0) << ok.err;
    EXPECT_TRUE(nlohmann::json::parse(ok.out)["resolvable"].get<bool>());
    const std::string bad = write("bad.json", {{"load", {1, 0, 0, 0, 0}}});
    const CliRun no = run({"--format", "json", "resolve-load", path("degree5-hole"), "--load", bad});
    ASSERT_EQ(no.code, 0);
    EXPECT_FALSE(nlohmann::json::parse(no.out)["resolvable"].get<bool>());
    const std::string wrong = write("wrong.json", {{"load", {1, 0}}});
    EXPECT_EQ(run({"resolve-load", path("degree5-hole"), "--load", wrong}).code, 2);
}

TEST_F(CliTest, Prestress)
{
    const std::string pos = write("pos.json", {{"stress", {0, 0, 1}}});
    const auto a = nlohmann::json::parse(run({"--format", "json", "prestress", path("degree3"), "--stress", pos}).out);
    EXPECT_EQ(a["classification"], "prestress-stable");
    const std::string neg = write("neg.json", {{"stress", {0, 0, -1}}});
    const auto b = nlohmann::json::parse(run({"--format", "json", "prestress", path("degree3"), "--stress", neg}).out);
    EXPECT_EQ(b["classification"], "not-prestress-stable");
    const auto c = nlohmann::json::parse(run({"--format", "json", "prestress", path("triangulated-tetrahedron"), "--search"}).out);
    EXPECT_EQ(c["classification"], "prestress-stable");
    const std::string notStress = write("ns.json", {{"stress", {1, 0, 0}}});
    EXPECT_EQ(run({"prestress", path("degree3"), "--stress", notStress}).code, 2);
}

TEST_F(CliTest, SecondOrder)
{
    const auto a = nlohmann::json::parse(run({"--format", "json", "second-order", path("degree4-cone"), "--classify"}).out);
    EXPECT_EQ(a["classification"], "second-order-foldable");
    const std::string flex = write("flex.json", {{"flex", {1, 1, 1}}});
    const auto b = nlohmann::json::parse(run({"--format", "json", "second-order", path("degree3"), "--flex", flex}).out);
    EXPECT_FALSE(b["extendable"].get<bool>());
}

TEST_F(CliTest, DoubleConeExport)
{
    const std::string out = (dir_ / "fw.json").string();
    const CliRun r = run({"double-cone", path("tetrahedron"), "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(out);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["joints"].size(), 12u);
    EXPECT_EQ(j["bars"].size(), 30u);
}

TEST_F(CliTest, ExitCodes)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"analyze"}).code, 2);
    EXPECT_EQ(run({"analyze", (dir_ / "missing.json").string()}).code, 2);
    EXPECT_EQ(run({"--format", "xml", "count", path("degree3")}).code, 2);
    const std::string garbage = (dir_ / "garbage.json").string();
    std::ofstream(garbage) << "{not json";
    EXPECT_EQ(run({"count", garbage}).code, 2);
    auto doc = test::document("degree4-cone");
    doc["creases"][0]["rho"] = 0.5;
    EXPECT_EQ(run({"count", write("bad-rho.json", doc)}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "homlab/cli.hpp"
#include "oracles.hpp"

using namespace homlab;
using Json = nlohmann::ordered_json;

namespace {

struct Result {
    int status = -1;
    std::vector<std::string> lines;
    Json last() const { return lines.empty() ? Json() : Json::parse(lines.back()); }
};

Result run_cli(const std::string& args) {
    std::string cmd = std::string(HOMLAB_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    Result r;
    if (!pipe) return r;
    std::string text;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, got);
    int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) r.lines.push_back(line);
    return r;
}

std::string raw_output(const std::string& args) {
    std::string out;
    for (const auto& l : run_cli(args).lines) out += l + "\n";
    return out;
}

class Files : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("homlab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::string write(const std::string& name, const FinStructure& m) {
        auto p = dir_ / name;
        std::ofstream(p) << to_text(m);
        return p.string();
    }

    std::filesystem::path dir_;
};

}  // namespace

TEST(CliExamples, UniformLinearOrderFrequencies) {
    auto r = run_cli("sample --sampler ulo --window 3 --trials 60000 --seed 7");
    ASSERT_EQ(r.status, 0);
    auto j = r.last();
    ASSERT_EQ(j["frequencies"].size(), 6U);
    for (const auto& [k, f] : j["frequencies"].items()) EXPECT_NEAR(f.get<double>(), 1.0 / 6.0, 0.01) << k;
}

TEST(CliExamples, DloGagbHolds) {
    auto r = run_cli("gagb --catalog dlo --A 1,3 --B 3,5 --k 1");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.last()["result"], "Holds");
}

TEST(CliExamples, IrsRealizeExact) {
    auto r = run_cli("irs realize --group S4 --H \"(01)(23)\" --trials 100 --seed 1");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.last()["exact_match"], true);
}

TEST_F(Files, EveryCommandIsReachable) {
    auto g = oracle::random_graph(6, 0.5, 3);
    auto gf = write("g.txt", g), hf = write("h.txt", act(oracle::random_permutation(6, 4), g));
    auto tri = write("tri.txt", oracle::graph(3, {{0, 1}, {1, 2}, {0, 2}}));
    auto wants = qf_type(oracle::graph(2, {{0, 1}}), Tuple{0, 1}).key();
    std::map<std::string, std::string> args = {
        {"qftype", "--in " + gf + " --tuple 0,1"},
        {"act", "--in " + gf + " --perm \"(0 1 2)\""},
        {"induced", "--in " + gf + " --subset 0,2,4"},
        {"generate", "--catalog rado --window 8"},
        {"age", "--catalog kfree:3 --in " + tri},
        {"witness", "--catalog rado --window 8 --A 0 --type '" + wants + "'"},
        {"backforth", "--left " + gf + " --right " + hf},
        {"extend", "--left " + gf + " --right " + gf + " --pairs 0:0 --side forth --x 1"},
        {"automorphism", "--in " + tri},
        {"orbits", "--catalog dlo --window 8 --k 1 --A 2,5"},
        {"gagb", "--catalog rado --A 0,1 --B 1,2 --k 1"},
        {"acl", "--catalog matched --A 0 --max-window 12"},
        {"separate", "--catalog rado --x 0 --y 1"},
        {"sample", "--sampler er:0.3 --window 4 --trials 50 --seed 1"},
        {"invariance", "--sampler ulo --k 2 --trials 1000 --seed 1"},
        {"dissociation", "--sampler er:0.3 --A 0,1 --B 2,3 --trials 2000 --seed 1"},
        {"definetti", "--sampler bshift:ber:0.3 --window 100 --trials 100 --seed 1"},
        {"fixedpoints", "--sampler ulo --window 12 --trials 50 --seed 1"},
        {"irs stab", "--group S4 --labels 0.1,0.1,0.5,0.7"},
        {"irs mgh", "--group S4 --H \"(01)\""},
        {"irs realize", "--group S3 --H \"(01)\" --trials 30 --seed 1"},
        {"irs normalizer", "--group S4 --H \"(01)(23)\""},
        {"irs conjugate", "--group S4 --H \"(01)\" --g \"(12)\""},
        {"irs subgroups", "--group S4"},
        {"dichotomy", "--sampler bshift:diffuse --window 20 --trials 100 --seed 1"},
        {"probe", "--catalog dlo --window 10 --trials 20 --seed 1"},
    };
    std::set<std::string> seen;
    for (const auto& c : cli::commands()) {
        seen.insert(c.name);
        auto it = args.find(c.name);
        ASSERT_NE(it, args.end()) << "no invocation for " << c.name;
        auto r = run_cli(c.name + " " + it->second);
        EXPECT_EQ(r.status, 0) << c.name << ": " << (r.lines.empty() ? "" : r.lines.back());
        ASSERT_FALSE(r.lines.empty()) << c.name;
        for (const auto& l : r.lines) ASSERT_TRUE(Json::accept(l)) << c.name << ": " << l;
        EXPECT_EQ(r.last()["command"], c.name);
        EXPECT_FALSE(r.last().contains("error")) << r.lines.back();
    }
    EXPECT_EQ(seen.size(), args.size());
}

TEST(CliDeterminism, IdenticalInvocationsAreByteIdentical) {
    for (std::string a : {"sample --sampler kaleido:3 --window 4 --trials 300 --seed 11 --per-trial",
                          "invariance --sampler twograph --k 3 --trials 2000 --seed 5",
                          "dichotomy --sampler bshift:atomic:2 --window 30 --trials 100 --seed 2",
                          "irs realize --group S4 --H \"(0123)\" --trials 50 --seed 3 --per-trial"}) {
        auto once = raw_output(a);
        EXPECT_FALSE(once.empty());
        EXPECT_EQ(once, raw_output(a)) << a;
        EXPECT_EQ(once, raw_output(a + " --threads 3")) << a;
    }
    EXPECT_NE(raw_output("sample --sampler er:0.5 --window 4 --trials 50 --seed 1"),
              raw_output("sample --sampler er:0.5 --window 4 --trials 50 --seed 2"));
}

TEST(CliOutput, PerTrialRecordsPrecedeSummary) {
    auto r = run_cli("sample --sampler ulo --window 3 --trials 25 --seed 4 --per-trial");
    ASSERT_EQ(r.lines.size(), 26U);
    for (std::size_t t = 0; t < 25; ++t) EXPECT_EQ(Json::parse(r.lines[t])["trial"], t);
    EXPECT_EQ(r.last()["command"], "sample");
}

TEST_F(Files, OutFlagWritesJsonLines) {
    auto path = (dir_ / "out.jsonl").string();
    auto r = run_cli("gagb --catalog dlo --A 1,3 --B 3,5 --k 1 --out " + path);
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(r.lines.empty());
    std::ifstream in(path);
    std::string line;
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_EQ(Json::parse(line)["result"], "Holds");
}

TEST(CliExitCodes, FailedChecksReturnOne) {
    auto parity = run_cli("invariance --sampler parity --k 2 --trials 4000 --seed 1");
    EXPECT_EQ(parity.status, 1);
    EXPECT_EQ(parity.last()["pass"], false);
    auto matched = run_cli("gagb --catalog matched --A 0 --B 1 --k 1");
    EXPECT_EQ(matched.status, 1);
    EXPECT_EQ(matched.last()["result"], "FailsWithCertificate");
}

TEST(CliExitCodes, InputErrorsReturnTwo) {
    for (std::string a : {"bogus", "irs frobnicate --group S4", "sample --sampler ulo --window 3",
                          "probe --catalog dlo --window 10", "sample --sampler nope --seed 1",
                          "gagb --catalog nope --A 0 --B 1", "invariance --sampler ulo --seed 1 --significance 1.5",
                          "sample --sampler ulo --seed 1 --window 0", "gagb --catalog dlo --A 0 --B 1 --wat 3",
                          "qftype --in /nonexistent/file --tuple 0", "irs realize --group S4 --H \"(01)\" --seed 1 --law x",
                          "dichotomy --sampler bshift:diffuse --window 20 --trials 10 --seed 1"}) {
        auto r = run_cli(a);
        EXPECT_EQ(r.status, 2) << a;
    }
    auto missing = run_cli("dichotomy --sampler ulo --window 10 --trials 100");
    ASSERT_EQ(missing.status, 2);
    EXPECT_NE(missing.last()["error"].get<std::string>().find("--seed"), std::string::npos);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include "fairtune/runlog.hpp"
#include "../support/tempdir.hpp"

using fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result cli(std::string const& args) {
    std::string cmd = std::string(FAIRTUNE_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (auto n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string const kStub = STUB_BRIDGE_PATH;

void write_config(fs::path const& path, std::string const& extra, std::string const& strategies = R"(["SustainDiffusion", "RandomSearch"])") {
    fixtures::spit(path, R"({
  "campaign_seed": 4,
  "strategies": )" + strategies + R"(,
  "repetitions": 2,
  "search": {"population_size": 8, "generations": 2, "images_per_individual": 5},
  "strategy_options": {"random_iterations": 4},
  "output_dir": "out")" + extra + "\n}\n");
}

}  // namespace

TEST(Cli, RunWritesLogsAndReport) {
    TempDir dir("cli_run");
    write_config(dir / "c.json", "");
    auto r = cli("run " + (dir / "c.json").string());
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir / "out/runs/SustainDiffusion_rep01.jsonl"));
    EXPECT_TRUE(fs::exists(dir / "out/report/hypervolume.json"));
    EXPECT_TRUE(fs::exists(dir / "out/report/objectives.csv"));

    auto a = cli("analyze " + (dir / "out").string());
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("runs loaded: 4"), std::string::npos);
    EXPECT_NE(a.out.find("hypervolume (raw"), std::string::npos);
    EXPECT_NE(cli("analyze --normalize " + (dir / "out").string()).out.find("hypervolume (normalized"), std::string::npos);

    auto rep = cli("report " + (dir / "out").string() + " --out " + (dir / "rep2").string());
    EXPECT_EQ(rep.code, 0);
    EXPECT_EQ(fixtures::tree(dir / "out/report"), fixtures::tree(dir / "rep2"));
}

TEST(Cli, CompareAcrossDirectories) {
    TempDir dir("cli_compare");
    write_config(dir / "a.json", "", R"(["SustainDiffusion"])");
    write_config(dir / "b.json", "", R"(["RandomSearch"])");
    EXPECT_EQ(cli("run --no-report " + (dir / "a.json").string() + " --output " + (dir / "A").string()).code, 0);
    EXPECT_EQ(cli("run --no-report " + (dir / "b.json").string() + " --output " + (dir / "B").string()).code, 0);
    EXPECT_FALSE(fs::exists(dir / "A/report"));
    auto r = cli("compare " + (dir / "A").string() + " " + (dir / "B").string() + " --out " + (dir / "AB").string());
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(fixtures::slurp(dir / "AB/hypervolume.json").find("RandomSearch"), std::string::npos);
    EXPECT_EQ(cli("compare " + (dir / "A").string() + " " + (dir / "A").string() + " --out " + (dir / "AA").string()).code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
    TempDir dir("cli_config");
    EXPECT_EQ(cli("run " + (dir / "missing.json").string()).code, 2);
    fixtures::spit(dir / "bad.json", "{\"repetitions\": 0}");
    EXPECT_EQ(cli("run " + (dir / "bad.json").string()).code, 2);
    fixtures::spit(dir / "junk.json", "{ not json");
    EXPECT_EQ(cli("run " + (dir / "junk.json").string()).code, 2);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("analyze " + (dir / "nowhere").string()).code, 2);
    EXPECT_EQ(cli("analyze --tie-rule lenient " + dir.path().string()).code, 2);
    EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, UnreachableBridgeExitsThree) {
    TempDir dir("cli_bridge_down");
    write_config(dir / "c.json", R"(,
  "evaluator": {"kind": "bridge", "endpoint": "exec:/nonexistent/bridge"})");
    EXPECT_EQ(cli("run " + (dir / "c.json").string()).code, 3);
    EXPECT_EQ(cli("protocol-check exec:/nonexistent/bridge --timeout-ms 2000").code, 3);
}

TEST(Cli, BridgeCrashMidCampaignIsPartialThenResumes) {
    TempDir dir("cli_partial");
    write_config(dir / "c.json", R"(,
  "evaluator": {"kind": "bridge", "endpoint": "exec:)" + kStub + R"( --fail-after 25"})");
    EXPECT_EQ(cli("run " + (dir / "c.json").string()).code, 4);
    auto manifest = fixtures::slurp(dir / "out/campaign.json");
    EXPECT_NE(manifest.find("\"partial\""), std::string::npos);
    write_config(dir / "c.json", R"(,
  "evaluator": {"kind": "bridge", "endpoint": "exec:)" + kStub + R"("})");
    EXPECT_EQ(cli("run " + (dir / "c.json").string()).code, 0);
    EXPECT_NE(fixtures::slurp(dir / "out/campaign.json").find("\"complete\""), std::string::npos);
}

TEST(Cli, ProtocolCheckAgainstStub) {
    auto r = cli("protocol-check 'exec:" + kStub + "' --timeout-ms 5000");
    EXPECT_EQ(r.code, 0);
    for (auto name : {"handshake", "round-trip", "malformed-json", "invalid-request", "recovery-and-determinism",
                      "image-count"})
        EXPECT_NE(r.out.find(std::string("PASS ") + name), std::string::npos) << name;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

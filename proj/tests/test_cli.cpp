#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

/// Runs the CLI through the shell; stderr is discarded.
Result run(const std::string& args, const std::string& stdin_text = "") {
    std::string cmd = std::string("'") + QSBPS_CLI + "' " + args + " 2>/dev/null";
    if (!stdin_text.empty()) {
        cmd = "printf '" + stdin_text + "' | " + cmd;
    }
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("qsbps_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return "'" + (dir / name).string() + "'"; }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("train --corpus x.jsonl").code, 2);  // --out missing
    EXPECT_EQ(run("gen-synthetic --n-products 9 --n-bit-entities 3").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, InputErrorsExitThree) {
    std::ofstream(dir / "bad.jsonl") << "{\"product_id\": 1}\n";
    EXPECT_EQ(run("train --corpus " + p("bad.jsonl") + " --out " + p("m.json")).code, 3);
    EXPECT_EQ(run("train --corpus " + p("missing.jsonl") + " --out " + p("m.json")).code, 3);
    std::ofstream(dir / "m.json") << "{\"format_version\": 7}";
    EXPECT_EQ(run("evaluate --model " + p("m.json")).code, 3);
}

TEST_F(Cli, GenerateTrainEvaluate) {
    ASSERT_EQ(run("gen-synthetic --n-topics 3 --n-products 16 --n-bit-entities 4 --n-distractors 8 --out " +
                  p("c.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run("train --corpus " + p("c.jsonl") + " --mode duet --seed 1 --out " + p("model.json")).code, 0);
    EXPECT_TRUE(fs::exists(dir / "model.json"));
    auto ev = run("evaluate --model " + p("model.json") + " --nq 5,10,15 --noise fixed:0.1 --out " + p("e.csv"));
    ASSERT_EQ(ev.code, 0);
    auto csv = slurp(dir / "e.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

    // the echoed configuration replays to the same output
    ASSERT_TRUE(fs::exists(dir / "e.csv.config.toml"));
    fs::rename(dir / "e.csv", dir / "first.csv");
    ASSERT_EQ(run("--config " + p("e.csv.config.toml")).code, 0);
    EXPECT_EQ(slurp(dir / "e.csv"), slurp(dir / "first.csv"));

    auto sim = run("simulate --model " + p("model.json") + " --topic t1 --target t1_p03 --nq 4");
    ASSERT_EQ(sim.code, 0);
    EXPECT_NE(sim.out.find("\"final_rank\""), std::string::npos);
    EXPECT_EQ(run("simulate --model " + p("model.json") + " --topic t9 --target t1_p03").code, 3);
}

TEST_F(Cli, InteractiveSessionFindsProduct) {
    ASSERT_EQ(run("gen-synthetic --n-products 8 --n-bit-entities 3 --out " + p("c.jsonl")).code, 0);
    ASSERT_EQ(run("train --corpus " + p("c.jsonl") + " --mode none --out " + p("m.json")).code, 0);
    // product 5 = bits 0 and 2
    auto r = run("session --model " + p("m.json") + " --topic t1 --transcript " + p("tr.json"), "y\\nn\\ny\\n");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Found: t1_p5"), std::string::npos) << r.out;
    EXPECT_NE(slurp(dir / "tr.json").find("\"finished\""), std::string::npos);
}

TEST_F(Cli, SweepWritesTables) {
    ASSERT_EQ(run("gen-synthetic --n-topics 2 --n-products 16 --n-bit-entities 4 --n-distractors 4 --out " +
                  p("c.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run("train --corpus " + p("c.jsonl") + " --out " + p("m.json")).code, 0);
    auto r = run("sweep --model " + p("m.json") + " --nq 2,4 --gammas 0,0.5,1 --out-dir " + p("sw"));
    ASSERT_EQ(r.code, 0);
    auto best = slurp(dir / "sw" / "best.csv");
    EXPECT_EQ(std::count(best.begin(), best.end(), '\n'), 3);
    auto heat = slurp(dir / "sw" / "heatmap.csv");
    EXPECT_EQ(std::count(heat.begin(), heat.end(), '\n'), 7);
}

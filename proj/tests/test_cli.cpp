#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "colprune/model_io.hpp"
#include "colprune/pipeline.hpp"
#include "colprune/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace colprune;

namespace {

struct CliRun {
  int code;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("colprune_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = std::string(COLPRUNE_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
  }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  void gen(const std::string& name, int seed, int depth = 3) const {
    const CliRun r = run("gen --seed " + std::to_string(seed) + " --width 8 --depth " + std::to_string(depth) +
                      " --n_calib 40 --n_eval 30 --out " + path(name));
    ASSERT_EQ(r.code, 0) << r.out;
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_F(CliTest, GenIsByteDeterministic) {
  gen("a", 5);
  gen("b", 5);
  for (const auto& e : fs::directory_iterator(dir_ / "a" / "model")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / "model" / e.path().filename()));
  }
  EXPECT_EQ(slurp(path("a/calib.rcpu")), slurp(path("b/calib.rcpu")));
  EXPECT_EQ(slurp(path("a/eval.rcpu")), slurp(path("b/eval.rcpu")));
  const Matrix calib = read_tensor(path("a/calib.rcpu"));
  EXPECT_EQ(calib.rows(), 8u);
  EXPECT_EQ(calib.cols(), 40u);
  EXPECT_TRUE(calib.all_finite());
  gen("one", 5, 1);
  EXPECT_EQ(load_model(path("one/model")).prunable_count(), 1u);
}

TEST_F(CliTest, PruneZeroRatioKeepsPayloads) {
  gen("g", 1);
  const CliRun r = run("prune --model " + path("g/model") + " --calib " + path("g/calib.rcpu") + " --out " +
                    path("p") + " --ratio 0 --compensation_variant none");
  ASSERT_EQ(r.code, 0) << r.out;
  for (int i = 0; i < 3; ++i) {
    const std::string f = "layer00" + std::to_string(i) + ".weight.rcpu";
    EXPECT_EQ(slurp(path("g/model/" + f)), slurp(path("p/" + f)));
  }
}

TEST_F(CliTest, PruneReportsEveryLayer) {
  gen("g", 2);
  const CliRun r = run("prune --model " + path("g/model") + " --calib " + path("g/calib.rcpu") + " --out " +
                    path("p") + " --ratio 0.2");
  ASSERT_EQ(r.code, 0) << r.out;
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 3u);
  EXPECT_TRUE(fs::exists(path("p/report.json")));
  EXPECT_EQ(load_model(path("p")).layers[0].weight.cols(), 6u);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  gen("g", 3);
  const std::string base = "prune --model " + path("g/model") + " --calib " + path("g/calib.rcpu") + " --out " +
                           path("p");
  EXPECT_EQ(run(base + " --compensation_variant spin").code, 2);
  EXPECT_EQ(run(base + " --score_variant magnitude").code, 2);
  EXPECT_EQ(run(base + " --ratio 1.5").code, 2);
  EXPECT_EQ(run(base + " --ratio abc").code, 2);
  EXPECT_EQ(run("prune --model x").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, DataErrorsExitOne) {
  gen("g", 4);
  EXPECT_EQ(run("eval --model " + path("missing") + " --reference " + path("g/model") + " --eval " +
                path("g/eval.rcpu"))
                .code,
            1);
  std::ofstream(path("junk.rcpu")) << "not a tensor";
  EXPECT_EQ(run("prune --model " + path("g/model") + " --calib " + path("junk.rcpu") + " --out " + path("p")).code,
            1);
}

TEST_F(CliTest, EvalPrintsRelativeError) {
  gen("g", 6);
  CliRun r = run("eval --model " + path("g/model") + " --reference " + path("g/model") + " --eval " +
              path("g/eval.rcpu"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "relative_error 0");

  ASSERT_EQ(run("prune --model " + path("g/model") + " --calib " + path("g/calib.rcpu") + " --out " + path("p") +
                " --ratio 0.3")
                .code,
            0);
  r = run("eval --model " + path("p") + " --reference " + path("g/model") + " --eval " + path("g/eval.rcpu"));
  ASSERT_EQ(r.code, 0) << r.out;
  const double printed = std::stod(r.out.substr(r.out.find(' ') + 1));
  const double direct = evaluate(load_model(path("p")), read_tensor(path("g/eval.rcpu")), load_model(path("g/model")))
                            .relative_error;
  EXPECT_EQ(printed, direct);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  gen("g", 7);
  std::ofstream(path("c.toml")) << "[prune]\nratio = 0.5\ncompensation_variant = \"ls\"\n";
  const std::string base = "--config " + path("c.toml") + " prune --model " + path("g/model") + " --calib " +
                           path("g/calib.rcpu") + " --out " + path("p");
  CliRun r = run(base);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("kept=4 "), std::string::npos);
  EXPECT_NE(r.out.find("variant=ls"), std::string::npos);
  r = run(base + " --ratio 0.25");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("kept=6 "), std::string::npos);
  EXPECT_NE(r.out.find("variant=ls"), std::string::npos);
  EXPECT_EQ(run("--config " + path("absent.toml") + " eval --model a --reference b --eval c").code, 1);
}

TEST_F(CliTest, SweepTableAndManifestRerun) {
  gen("g", 8);
  CliRun r = run("sweep --model " + path("g/model") + " --calib " + path("g/calib.rcpu") + " --eval " +
              path("g/eval.rcpu") + " --out " + path("s") + " --no_timing");
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string table = slurp(path("s/sweep.csv"));
  std::size_t lines = 0;
  for (char c : table) lines += c == '\n';
  EXPECT_EQ(lines, 31u);
  EXPECT_TRUE(fs::exists(path("s/sweep_manifest.json")));

  r = run("sweep --manifest " + path("s/sweep_manifest.json") + " --out " + path("s2"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(path("s2/sweep.csv")), table);

  r = run("sweep --generate --seeds 1 2 --width 8 --depth 2 --n_calib 32 --n_eval 16 --ratios 0.25 "
          "--score_variants wanda_sp --compensation_variants rot --out " + path("s3"));
  ASSERT_EQ(r.code, 0) << r.out;
  lines = 0;
  for (char c : slurp(path("s3/sweep.csv"))) lines += c == '\n';
  EXPECT_EQ(lines, 3u);
  EXPECT_EQ(run("sweep --out " + path("s4")).code, 2);
}

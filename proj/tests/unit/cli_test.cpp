#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace flowdep::app;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "flowdep");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("flowdep_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Small synthetic trace shared by the pipeline tests.
  fs::path make_trace() {
    const auto r = run({"-q", "-s", "3", "-w", (root_ / "synth").string(), "synth", "--clients", "20",
                        "--duration", "60", "--flows-out", (root_ / "trace.csv").string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return root_ / "trace.csv";
  }

  std::vector<std::string> small_run(const fs::path& workdir) {
    return {"-q", "-s", "11", "-w", workdir.string()};
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, VersionAndHelp) {
  EXPECT_EQ(run({"--version"}).code, kExitOk);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"walks", "--walk-length", "many"}).code, kExitUsage);
}

TEST_F(CliTest, MissingInputIsUsageError) {
  const auto r = run({"-w", root_.string(), "ingest", "-i", (root_ / "absent.csv").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("absent.csv"), std::string::npos);

  EXPECT_EQ(run({"-w", root_.string(), "ingest"}).code, kExitUsage);
  EXPECT_EQ(run({"-c", (root_ / "nope.yaml").string(), "oracle"}).code, kExitUsage);
}

TEST_F(CliTest, MissingUpstreamArtifactIsUsageError) {
  EXPECT_EQ(run({"-w", root_.string(), "walks"}).code, kExitUsage);
}

TEST_F(CliTest, ConfigViolationsAreAllListed) {
  const auto cfg = root_ / "bad.yaml";
  std::ofstream(cfg) << "walks:\n  length: 3\ncontext:\n  size: 6\nforest:\n  trees: 0\n";
  const auto r = run({"-c", cfg.string(), "-w", root_.string(), "oracle"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("context.size"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("forest.trees"), std::string::npos) << r.err;

  std::ofstream(cfg) << "walks:\n  lenght: 3\n";
  const auto typo = run({"-c", cfg.string(), "oracle"});
  EXPECT_EQ(typo.code, kExitUsage);
  EXPECT_NE(typo.err.find("lenght"), std::string::npos) << typo.err;
}

TEST_F(CliTest, PipelineMatchesIndividualStagesAndRerunsIdentically) {
  const auto trace = make_trace();
  const auto piped = root_ / "piped";
  const auto staged = root_ / "staged";
  const std::vector<std::string> tuning{"--walks-per-vertex", "3", "--epochs", "2", "--dims", "16",
                                        "--trees", "15"};

  auto args = small_run(piped);
  args.insert(args.end(), {"pipeline", "-i", trace.string(), "--splits", "2"});
  args.insert(args.end(), tuning.begin(), tuning.end());
  const auto p = run(args);
  ASSERT_EQ(p.code, kExitOk) << p.err;

  auto stage = [&](std::vector<std::string> extra) {
    auto a = small_run(staged);
    a.insert(a.end(), extra.begin(), extra.end());
    const auto r = run(a);
    EXPECT_EQ(r.code, kExitOk) << extra.front() << ": " << r.err;
  };
  stage({"ingest", "-i", trace.string()});
  stage({"sample"});
  stage({"walks", "--walks-per-vertex", "3"});
  stage({"embed", "--epochs", "2", "--dims", "16"});
  stage({"oracle"});
  stage({"train", "--trees", "15"});
  stage({"predict"});
  stage({"eval", "--splits", "2", "--trees", "15"});
  stage({"simindex"});

  for (const auto* name : {"flows.csv", "graph.jsonl", "walks.jsonl", "embedding.bin", "ground_truth.csv",
                           "labels.csv", "model.json", "predictions.csv", "eval.json", "roc.csv",
                           "pr.csv", "simindex.csv", "simindex_summary.json"}) {
    ASSERT_TRUE(fs::exists(piped / name)) << name;
    EXPECT_EQ(slurp(piped / name), slurp(staged / name)) << name;
  }

  const auto first = slurp(piped / "eval.json");
  stage({"eval", "--splits", "2", "--trees", "15"});
  EXPECT_EQ(slurp(staged / "eval.json"), first);
}

TEST_F(CliTest, ResumeSkipsFinishedStages) {
  const auto trace = make_trace();
  const auto dir = root_ / "resume";
  auto args = small_run(dir);
  args.insert(args.end(), {"pipeline", "-i", trace.string(), "--splits", "1", "--walks-per-vertex", "2",
                           "--epochs", "1", "--dims", "8", "--trees", "5"});
  ASSERT_EQ(run(args).code, kExitOk);
  const auto stamp = fs::last_write_time(dir / "walks.jsonl");
  fs::remove(dir / "eval.json");
  args.push_back("--resume");
  args.erase(args.begin());  // drop -q to see the log
  const auto r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(fs::last_write_time(dir / "walks.jsonl"), stamp);
  EXPECT_TRUE(fs::exists(dir / "eval.json"));
}

#include "cli.hpp"

#include "rpgrasp/archive.hpp"
#include "rpgrasp/point_cloud.hpp"
#include "rpgrasp/run_config.hpp"

#include "calibration_fixture.hpp"
#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rpgrasp {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "rpgrasp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Synthetic train/test clouds, a demonstration and a trained model in one directory.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("cli_pipeline");
    const auto d = dir_->path().string();
    ASSERT_EQ(run({"--seed", "1", "synth-scene", "--primitive", "cylinder:0.04:0.16", "--view", "-0.5,0,-1",
                   "--points", "1500", "-o", d + "/train.ply", "--demo-out", d + "/demo.json", "--label", "pinch"})
                  .code,
              0);
    ASSERT_EQ(run({"--seed", "2", "synth-scene", "--primitive", "cylinder:0.04:0.16", "--pose", "0.1,0.05,0,0,0,0.7",
                   "--view", "-0.5,0,-1", "--points", "1500", "-o", d + "/test.ply"})
                  .code,
              0);
    const Outcome t = run({"--seed", "3", "train", d + "/demo.json", "-o", d + "/model.json", "--synthetic-trajectories"});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::string path(const std::string& leaf) { return (*dir_ / leaf).string(); }
  static Outcome infer(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"--seed", "4", "infer", path("model.json"), path("test.ply"), "-o", path(out),
                                  "--candidates", "4", "--budget", "150", "--query-kernels", "150"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  static test::TempDir* dir_;
};

test::TempDir* CliPipeline::dir_ = nullptr;

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"infer", "--frobnicate"}).code, 1);
  EXPECT_EQ(run({"plan-reconfig", "m.json", "--current", "0,0", "--out-dir", "x"}).code, 1) << "no target given";
  const Outcome help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("infer"), std::string::npos);
}

TEST(Cli, MissingInputsAreDataErrors) {
  test::TempDir dir("cli_missing");
  const auto d = dir.path().string();
  EXPECT_EQ(run({"infer", d + "/none.json", d + "/none.ply", "-o", d + "/r.json"}).code, 2);
  EXPECT_EQ(run({"train", d + "/none.json", "-o", d + "/m.json"}).code, 2);
  write_atomic(dir / "cfg.json", R"({"plan": {"candidatez": 3}})");
  const Outcome bad = run({"--config", d + "/cfg.json", "synth-scene", "--primitive", "sphere:0.1", "-o", d + "/s.ply"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("candidatez"), std::string::npos) << bad.err;
  EXPECT_FALSE(fs::exists(dir / "s.ply"));
}

TEST(Cli, SynthSceneShowsOnlyFacesTowardTheCamera) {
  test::TempDir dir("cli_synth");
  ASSERT_EQ(run({"synth-scene", "--primitive", "sphere:0.1", "--view", "0,0,-1", "--points", "800", "-o",
                 (dir / "s.ply").string()})
                .code,
            0);
  const PointCloud c = load_cloud(dir / "s.ply");
  ASSERT_EQ(c.size(), 800u);
  ASSERT_TRUE(c.has_normals());
  for (const auto& n : c.normals) EXPECT_GT(n.z(), 0.0);
}

TEST_F(CliPipeline, TrainWritesArchiveDeterministically) {
  const ModelArchive a = load_archive(path("model.json"));
  ASSERT_EQ(a.grasps.grasps.size(), 1u);
  EXPECT_EQ(a.grasps.grasps[0].label, "pinch");
  EXPECT_EQ(a.trajectories.size(), 4u);
  EXPECT_EQ(a.metadata.at("seed"), 3);
  ASSERT_EQ(run({"--seed", "3", "train", path("demo.json"), "-o", path("model2.json"), "--synthetic-trajectories"}).code, 0);
  EXPECT_EQ(read_text(path("model2.json")), read_text(path("model.json")));
}

TEST_F(CliPipeline, InferIsDeterministicAndWritesBothOutputs) {
  const Outcome a = infer("r1.json");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(infer("r2.json").code, 0);
  EXPECT_EQ(read_text(path("r1.json")), read_text(path("r2.json")));
  EXPECT_EQ(read_text(path("r1.csv")), read_text(path("r2.csv")));
  const Json r = read_json(path("r1.json"));
  EXPECT_EQ(r.at("summary").at("candidates"), 4);
  EXPECT_NE(a.out.find("pinch"), std::string::npos) << a.out;
  ASSERT_EQ(run({"--seed", "5", "infer", path("model.json"), path("test.ply"), "-o", path("r3.json"), "--candidates",
                 "4", "--budget", "150", "--query-kernels", "150"})
                .code,
            0);
  EXPECT_NE(read_text(path("r3.json")), read_text(path("r1.json")));
}

TEST_F(CliPipeline, NothingFeasibleExitsWithThreeAndStillReports) {
  const Outcome o = infer("blocked.json", {"--obstacle", "0,0,1,10"});
  EXPECT_EQ(o.code, 3);
  const Json r = read_json(path("blocked.json"));
  EXPECT_TRUE(r.at("summary").at("selected").is_null());
  EXPECT_NE(r.at("summary").at("message").get<std::string>().find("wrist inside obstacle 0"), std::string::npos);
  EXPECT_EQ(infer("bad.json", {"--obstacle", "0,0,1"}).code, 1);
}

TEST_F(CliPipeline, QueryDumpAndPlot) {
  const fs::path dump = *dir_ / "queries";
  ASSERT_EQ(infer("rq.json", {"--dump-queries", dump.string()}).code, 0);
  std::vector<std::string> csvs;
  for (const auto& e : fs::directory_iterator(dump)) csvs.push_back(e.path().string());
  ASSERT_FALSE(csvs.empty());
  std::vector<std::string> args{"plot", "--cloud", path("test.ply"), "--report", path("rq.json"), "--model",
                                path("model.json"), "--title", "test", "-o", path("plot.svg")};
  for (const auto& c : csvs) {
    args.push_back("--queries");
    args.push_back(c);
  }
  ASSERT_EQ(run(args).code, 0);
  const std::string svg = read_text(path("plot.svg"));
  EXPECT_NE(svg.find("<line "), std::string::npos);
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read_text(path("plot.svg")), svg);
  // A broken overlay is skipped with a warning.
  const Outcome partial = run({"plot", "--cloud", path("test.ply"), "--queries", path("missing.csv"), "-o", path("p2.svg")});
  EXPECT_EQ(partial.code, 0);
  EXPECT_FALSE(partial.err.empty());
}

TEST_F(CliPipeline, PlanReconfigFromTargetsAndReports) {
  const auto out = *dir_ / "reconfig";
  const Outcome o = run({"plan-reconfig", path("model.json"), "--current", "0,0", "--target", "90,90", "--degrees",
                         "--out-dir", out.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json s = read_json(out / "summary.json");
  EXPECT_EQ(s.at("segments").size(), 6u);
  EXPECT_TRUE(fs::exists(out / "plan.csv"));
  EXPECT_TRUE(fs::exists(out / "segment_5.csv"));
  EXPECT_EQ(run({"plan-reconfig", path("model.json"), "--current", "0,0", "--target", "3,0", "--out-dir",
                 out.string()})
                .code,
            2);
  ASSERT_EQ(infer("rr.json").code, 0);
  EXPECT_EQ(run({"plan-reconfig", path("model.json"), "--current", "0,0", "--report", path("rr.json"), "--out-dir",
                 (*dir_ / "from_report").string()})
                .code,
            0);
  EXPECT_EQ(run({"plan-reconfig", path("model.json"), "--current", "0,0", "--report", path("rr.json"), "--rank",
                 "99", "--out-dir", (*dir_ / "bad_rank").string()})
                .code,
            2);
}

TEST(Cli, PlanReconfigNeedsATrajectoryLibrary) {
  test::TempDir dir("cli_nolib");
  const auto d = dir.path().string();
  ASSERT_EQ(run({"synth-scene", "--primitive", "cylinder:0.04:0.16", "--points", "1200", "-o", d + "/c.ply",
                 "--demo-out", d + "/demo.json"})
                .code,
            0);
  ASSERT_EQ(run({"train", d + "/demo.json", "-o", d + "/m.json"}).code, 0);
  EXPECT_EQ(run({"plan-reconfig", d + "/m.json", "--current", "0,0", "--target", "1,0", "--out-dir", d + "/o"}).code,
            2);
}

TEST(Cli, CalibrateRecoversSyntheticModel) {
  test::TempDir dir("cli_calib");
  const auto truth =
      test::synthetic_calibration(finger_chain(GripperSpec::defaults()), 40, 0.0, 8);
  {
    std::ofstream f(dir / "log.csv");
    f << std::setprecision(17) << "s0,s1,s2,s3,motor,bpx,bpy,bpz,bqw,bqx,bqy,bqz,tpx,tpy,tpz,tqw,tqx,tqy,tqz\n";
    for (const auto& s : truth.samples) {
      for (int j = 0; j < 4; ++j) f << s.sensors[j] << ',';
      f << s.motor;
      for (const Pose* p : {&s.base, &s.tracker})
        f << ',' << p->position().x() << ',' << p->position().y() << ',' << p->position().z() << ','
          << p->orientation().w() << ',' << p->orientation().x() << ',' << p->orientation().y() << ','
          << p->orientation().z();
      f << '\n';
    }
  }
  const Outcome o = run({"calibrate", (dir / "log.csv").string(), "-o", (dir / "cal.json").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json j = read_json(dir / "cal.json");
  const LinearSensorModel m = sensor_model_from_json(j.at("model"));
  EXPECT_LE((m.gain - truth.model.gain).cwiseAbs().maxCoeff(), 1e-6);

  // Channel count mismatch and an invalid filter factor.
  EXPECT_EQ(run({"calibrate", (dir / "log.csv").string(), "--joints", "3", "-o", (dir / "x.json").string()}).code, 1);
  EXPECT_EQ(run({"calibrate", (dir / "log.csv").string(), "--alpha", "0", "-o", (dir / "x.json").string()}).code, 1);
}

TEST(Cli, EnvironmentConfigIsUsedByDefault) {
  test::TempDir dir("cli_env");
  write_atomic(dir / "cfg.json", R"({"colour": 1})");
  ::setenv(kConfigEnv, (dir / "cfg.json").c_str(), 1);
  const Outcome o = run({"synth-scene", "--primitive", "sphere:0.1", "-o", (dir / "s.ply").string()});
  ::unsetenv(kConfigEnv);
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(run({"synth-scene", "--primitive", "sphere:0.1", "-o", (dir / "s.ply").string()}).code, 0);
}

}  // namespace
}  // namespace rpgrasp

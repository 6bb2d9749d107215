#include "rpgrasp/plot.hpp"
#include "rpgrasp/report.hpp"

#include "support.hpp"

#include <iomanip>
#include <sstream>

namespace rpgrasp {
namespace {

GraspHypothesis hyp(int grasp, std::size_t candidate, double score, bool feasible, std::string reason = "") {
  GraspHypothesis h;
  h.grasp_id = grasp;
  h.candidate = candidate;
  h.seed_link = candidate % kLinkCount;
  h.log_score = score;
  h.feasibility = feasible ? Feasibility::Feasible : Feasibility::Infeasible;
  h.reason = std::move(reason);
  h.config.wrist = Pose::translation(0.1 * candidate, 0.0, 0.0);
  return h;
}

TrainedGraspSet two_grasps() {
  TrainedGraspSet ts;
  ts.grasps.resize(3);
  ts.grasps[0].grasp_id = 1;
  ts.grasps[0].label = "pinch";
  ts.grasps[1].grasp_id = 4;
  ts.grasps[1].label = "wrap";
  ts.grasps[2].grasp_id = 9;
  ts.grasps[2].label = "unused";
  return ts;
}

PlanResult mixed_result() {
  PlanResult r;
  r.ranked = {hyp(4, 2, -1.0, true), hyp(1, 0, -2.5, true), hyp(4, 3, -3.0, true)};
  r.rejected = {hyp(1, 1, -std::numeric_limits<double>::infinity(), false, "zero likelihood"),
                hyp(4, 4, -0.5, false, "wrist inside obstacle 0"), hyp(4, 5, -0.7, false, "wrist inside obstacle 0")};
  return r;
}

TEST(Report, TallyCountsPerGrasp) {
  const auto rows = tally_by_grasp(two_grasps(), mixed_result());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].grasp_id, 1);
  EXPECT_EQ(rows[0].candidates, 2u);
  EXPECT_EQ(rows[0].feasible, 1u);
  EXPECT_EQ(*rows[0].best_rank, 2u);
  EXPECT_EQ(rows[0].best_score, -2.5);
  EXPECT_EQ(rows[1].candidates, 4u);
  EXPECT_EQ(rows[1].feasible, 2u);
  EXPECT_EQ(*rows[1].best_rank, 1u);
  EXPECT_EQ(rows[2].candidates, 0u);
  EXPECT_FALSE(rows[2].best_rank);

  const std::string table = format_tally(rows);
  EXPECT_NE(table.find("2/4"), std::string::npos) << table;
  EXPECT_NE(table.find("-1.0000"), std::string::npos) << table;
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST(Report, JsonSummarisesRankingAndRejections) {
  const Json run = {{"seed", 3}};
  const Json j = infer_report(two_grasps(), mixed_result(), run);
  EXPECT_EQ(j.at("format"), "rpgrasp-report");
  EXPECT_EQ(j.at("run"), run);
  const Json& s = j.at("summary");
  EXPECT_EQ(s.at("candidates"), 6);
  EXPECT_EQ(s.at("feasible"), 3);
  EXPECT_EQ(s.at("rejected_by_reason").at("wrist inside obstacle 0"), 2);
  EXPECT_EQ(s.at("selected").at("grasp_id"), 4);
  EXPECT_FALSE(s.contains("message"));
  ASSERT_EQ(j.at("ranked").size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(j.at("ranked")[r].at("rank"), r + 1);
  EXPECT_TRUE(j.at("rejected")[0].at("log_score").is_null());
  EXPECT_EQ(j.at("rejected")[0].at("reason"), "zero likelihood");
  EXPECT_EQ(j.at("by_grasp")[2].at("best_rank"), nullptr);
}

TEST(Report, EmptyRankingExplainsWhy) {
  PlanResult r = mixed_result();
  r.ranked.clear();
  const Json s = infer_report(two_grasps(), r, Json::object()).at("summary");
  EXPECT_TRUE(s.at("selected").is_null());
  EXPECT_EQ(s.at("message"), "no feasible grasp among 3 candidates; 2 rejected: wrist inside obstacle 0; "
                             "1 rejected: zero likelihood");
}

TEST(Report, CsvHasHeaderAndOneRowPerCandidate) {
  std::ostringstream out;
  out << std::setprecision(3);
  write_infer_csv(out, mixed_result());
  EXPECT_EQ(out.precision(), 3);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("rank,feasible,grasp_id,seed_link,candidate,log_score,px,py,pz,qw,qx,qy,qz,j0,", 0), 0u);
  EXPECT_EQ(line.substr(line.size() - 10), "j13,reason");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].rfind("1,1,4,2,2,-1,0.20000000000000001,", 0), 0u) << rows[0];
  EXPECT_EQ(rows[3].rfind(",0,1,1,1,-inf,", 0), 0u) << rows[3];
  EXPECT_EQ(rows[4].substr(rows[4].size() - 23), "wrist inside obstacle 0");
  for (const auto& r : rows) EXPECT_EQ(std::count(r.begin(), r.end(), ','), 27) << r;
}

TEST(Plot, WeightRanksAreDescendingWithStableTies) {
  const std::vector<WeightedPoint> k{{{0, 0, 0}, 0.2}, {{0, 0, 0}, 0.5}, {{0, 0, 0}, 0.2}, {{0, 0, 0}, 0.1}};
  EXPECT_EQ(weight_ranks(k), (std::vector<std::size_t>{1, 0, 2, 3}));
}

TEST(Plot, GripperSegmentsFollowLinkAxes) {
  const GripperSpec spec = GripperSpec::defaults();
  Rng rng(1);
  GripperConfig cfg;
  cfg.wrist = test::random_pose(rng);
  cfg.joints[1] = 0.4;
  const auto segs = gripper_segments(spec, cfg);
  const LinkPoses links = forward_kinematics(spec, cfg);
  ASSERT_EQ(segs.size(), kLinkCount);
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    EXPECT_EQ(segs[i].a, links[i].position());
    EXPECT_NEAR((segs[i].b - segs[i].a).norm(), spec.capsule(i).length, 1e-12);
  }
  // Consecutive links of a finger join end to start.
  EXPECT_LE((segs[0].b - segs[1].a).norm(), 1e-12);
}

TEST(Plot, SvgIsDeterministicAndColoursByRank) {
  PlotLayers layers;
  layers.cloud = {{0, 0, 0}, {0.1, 0.05, 0.02}, {-0.05, 0.1, -0.03}};
  layers.links = {{{0, 0, 0}, {0.02, 0.0, 0.0}}};
  layers.kernels = {{{0.01, 0.01, 0.0}, 0.1}, {{0.02, 0.0, 0.0}, 0.9}};
  PlotOptions opt;
  opt.title = "cup & <saucer>";
  const std::string a = render_svg(layers, opt);
  EXPECT_EQ(a, render_svg(layers, opt));
  EXPECT_EQ(a.rfind("<svg ", 0), 0u);
  EXPECT_NE(a.find("cup &amp; &lt;saucer&gt;"), std::string::npos);
  EXPECT_EQ(a.find("-0.00"), std::string::npos);
  // Three panels, each with three cloud points, one link and two kernels.
  const auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = a.find(needle); p != std::string::npos; p = a.find(needle, p + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("fill=\"#888888\""), 9u);
  EXPECT_EQ(count("<line "), 3u);
  EXPECT_EQ(count("fill=\"#dc401e\""), 3u);
  EXPECT_EQ(count("fill=\"#1e40dc\""), 3u);
  // The heaviest kernel is drawn after the lightest in every panel.
  EXPECT_LT(a.find("#1e40dc"), a.find("#dc401e"));
  EXPECT_GT(a.rfind("#dc401e"), a.rfind("#1e40dc"));
}

TEST(Plot, EmptyLayersStillRender) {
  const std::string svg = render_svg({});
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

}  // namespace
}  // namespace rpgrasp

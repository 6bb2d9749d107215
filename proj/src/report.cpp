#include "rpgrasp/report.hpp"

#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

namespace rpgrasp {

namespace {

Json hypothesis_json(const GraspHypothesis& h, std::optional<std::size_t> rank) {
  Json joints = Json::array();
  for (Eigen::Index k = 0; k < h.config.joints.size(); ++k) joints.push_back(h.config.joints[k]);
  Json j = {{"grasp_id", h.grasp_id},
            {"seed_link", h.seed_link},
            {"candidate", h.candidate},
            {"log_score", std::isfinite(h.log_score) ? Json(h.log_score) : Json(nullptr)},
            {"wrist", to_json(h.config.wrist)},
            {"joints", joints},
            {"feasible", h.feasibility == Feasibility::Feasible}};
  if (rank) j["rank"] = *rank;
  if (!h.reason.empty()) j["reason"] = h.reason;
  return j;
}

}  // namespace

std::vector<GraspTally> tally_by_grasp(const TrainedGraspSet& ts, const PlanResult& result) {
  std::vector<GraspTally> rows;
  std::map<int, std::size_t> index;
  for (const auto& g : ts.grasps) {
    index[g.grasp_id] = rows.size();
    rows.push_back({g.grasp_id, g.label, 0, 0, std::nullopt, -std::numeric_limits<double>::infinity()});
  }
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const auto it = index.find(result.ranked[r].grasp_id);
    if (it == index.end()) continue;
    GraspTally& t = rows[it->second];
    ++t.candidates;
    ++t.feasible;
    if (!t.best_rank) {
      t.best_rank = r + 1;
      t.best_score = result.ranked[r].log_score;
    }
  }
  for (const auto& h : result.rejected) {
    const auto it = index.find(h.grasp_id);
    if (it != index.end()) ++rows[it->second].candidates;
  }
  return rows;
}

Json infer_report(const TrainedGraspSet& ts, const PlanResult& result, const Json& run) {
  Json by_grasp = Json::array();
  for (const auto& t : tally_by_grasp(ts, result)) {
    by_grasp.push_back({{"grasp_id", t.grasp_id},
                        {"label", t.label},
                        {"candidates", t.candidates},
                        {"feasible", t.feasible},
                        {"best_rank", t.best_rank ? Json(*t.best_rank) : Json(nullptr)},
                        {"best_score", t.best_rank ? Json(t.best_score) : Json(nullptr)}});
  }
  std::map<std::string, std::size_t> reasons;
  for (const auto& h : result.rejected) ++reasons[h.reason.empty() ? "unspecified" : h.reason];

  Json ranked = Json::array(), rejected = Json::array();
  for (std::size_t r = 0; r < result.ranked.size(); ++r) ranked.push_back(hypothesis_json(result.ranked[r], r + 1));
  for (const auto& h : result.rejected) rejected.push_back(hypothesis_json(h, std::nullopt));

  const std::size_t total = result.ranked.size() + result.rejected.size();
  Json summary = {{"candidates", total},
                  {"feasible", result.ranked.size()},
                  {"rejected_by_reason", reasons},
                  {"selected", result.ranked.empty() ? Json(nullptr) : hypothesis_json(result.ranked.front(), 1)}};
  if (result.ranked.empty()) {
    std::ostringstream msg;
    msg << "no feasible grasp among " << total << " candidates";
    for (const auto& [reason, n] : reasons) msg << "; " << n << " rejected: " << reason;
    summary["message"] = msg.str();
  }
  return {{"format", "rpgrasp-report"}, {"version", 1},          {"run", run},
          {"summary", summary},         {"by_grasp", by_grasp}, {"ranked", ranked},
          {"rejected", rejected}};
}

void write_infer_csv(std::ostream& out, const PlanResult& result) {
  out << "rank,feasible,grasp_id,seed_link,candidate,log_score,px,py,pz,qw,qx,qy,qz";
  for (std::size_t k = 0; k < kJointCount; ++k) out << ",j" << k;
  out << ",reason\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  auto row = [&](const GraspHypothesis& h, const std::string& rank) {
    const auto& p = h.config.wrist.position();
    const auto& q = h.config.wrist.orientation();
    out << rank << ',' << (h.feasibility == Feasibility::Feasible ? 1 : 0) << ',' << h.grasp_id << ','
        << h.seed_link << ',' << h.candidate << ',' << h.log_score << ',' << p.x() << ',' << p.y() << ',' << p.z()
        << ',' << q.w() << ',' << q.x() << ',' << q.y() << ',' << q.z();
    for (Eigen::Index k = 0; k < h.config.joints.size(); ++k) out << ',' << h.config.joints[k];
    out << ',' << h.reason << '\n';
  };
  for (std::size_t r = 0; r < result.ranked.size(); ++r) row(result.ranked[r], std::to_string(r + 1));
  for (const auto& h : result.rejected) row(h, "");
  out.flags(flags);
  out.precision(precision);
}

std::string format_tally(const std::vector<GraspTally>& tally) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-20s %12s %10s %12s\n", "grasp", "label", "feasible", "best_rank",
                "best_score");
  out << line;
  for (const auto& t : tally) {
    const std::string ratio = std::to_string(t.feasible) + "/" + std::to_string(t.candidates);
    const std::string rank = t.best_rank ? std::to_string(*t.best_rank) : "-";
    char score[32] = "-";
    if (t.best_rank) std::snprintf(score, sizeof score, "%.4f", t.best_score);
    std::snprintf(line, sizeof line, "%-8d %-20.20s %12s %10s %12s\n", t.grasp_id, t.label.c_str(), ratio.c_str(),
                  rank.c_str(), score);
    out << line;
  }
  return out.str();
}

}  // namespace rpgrasp

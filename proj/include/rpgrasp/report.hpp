#pragma once

#include "rpgrasp/archive.hpp"

#include <ostream>

namespace rpgrasp {

/// Outcome of the candidates seeded from one trained grasp.
struct GraspTally {
  int grasp_id = 0;
  std::string label;
  std::size_t candidates = 0;
  std::size_t feasible = 0;
  /// 1-based position of this grasp's best feasible candidate in the ranking.
  std::optional<std::size_t> best_rank;
  double best_score = -std::numeric_limits<double>::infinity();
};

/// One row per trained grasp, in archive order.
std::vector<GraspTally> tally_by_grasp(const TrainedGraspSet& ts, const PlanResult& result);

/// Structured inference report. `run` records the command settings (config,
/// seed, inputs) so the run can be repeated.
Json infer_report(const TrainedGraspSet& ts, const PlanResult& result, const Json& run);

/// One row per candidate, ranked feasible ones first, then the rejected ones.
void write_infer_csv(std::ostream& out, const PlanResult& result);

/// Fixed-width "feasible/candidates by training example" table.
std::string format_tally(const std::vector<GraspTally>& tally);

}  // namespace rpgrasp

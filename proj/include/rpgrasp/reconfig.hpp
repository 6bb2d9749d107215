#pragma once

#include "rpgrasp/gripper.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

namespace rpgrasp {

using ArmConfig = Eigen::VectorXd;
using Waypoints = std::vector<ArmConfig>;

enum class Direction { Increasing, Decreasing };

/// Taught arm motion that pushes one RP-joint against an obstacle from
/// h_begin to h_end, plus the collision-free approach leading to it.
struct ReconfigTrajectory {
  std::size_t rp = 0;  ///< 0 or 1: which RP-joint (finger 1 or 2)
  Direction direction = Direction::Increasing;
  double h_begin = 0.0;
  double h_end = 0.0;
  Waypoints reconfig;   ///< N^R >= 2
  Waypoints approach;   ///< N^A >= 1, ends at reconfig.front()

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
  std::size_t dof() const { return reconfig.empty() ? 0 : static_cast<std::size_t>(reconfig.front().size()); }
};

/// Cumulative polyline length at each waypoint (first entry 0).
std::vector<double> arc_lengths(const Waypoints& w);

/// Arm configuration at which the RP-joint reaches h_target, taken at the
/// proportional cumulative arc length along the reconfiguration waypoints.
/// Endpoints are returned bit-exactly. Throws std::invalid_argument if
/// h_target is outside [h_begin, h_end].
ArmConfig interpolate_final_waypoint(const ReconfigTrajectory& t, double h_target);

/// Reconfiguration waypoints cut at h_target: the original prefix followed by
/// the interpolated final waypoint.
Waypoints truncate_at(const ReconfigTrajectory& t, double h_target);

struct SelectedTrajectory {
  ReconfigTrajectory trajectory;  ///< reconfig waypoints already truncated at the target
  double current = 0.0;
  double target = 0.0;
  /// Full (untruncated) polyline length, used to map arc length back to an angle.
  double full_length = 0.0;
};

/// Library of four trajectories: Increasing and Decreasing for each RP-joint.
using TrajectoryLibrary = std::vector<ReconfigTrajectory>;

void validate_library(const TrajectoryLibrary& library);

/// Per RP-joint: none if |target - current| <= delta, otherwise the trajectory
/// whose direction matches, cut at the target. At most two results, ordered by
/// RP-joint. Throws std::invalid_argument if a needed trajectory is missing or
/// the target lies outside its range.
std::vector<SelectedTrajectory> select_trajectories(const TrajectoryLibrary& library,
                                                    const std::array<double, 2>& current,
                                                    const std::array<double, 2>& target, double delta);

Waypoints rollback(const Waypoints& w);

enum class SegmentKind { Approach, Reconfigure, Rollback };

struct PlanSegment {
  SegmentKind kind = SegmentKind::Approach;
  /// Selection index (into ReconfigPlan::selections) this segment belongs to.
  std::size_t selection = 0;
  Waypoints waypoints;
};

struct ReconfigPlan {
  std::vector<SelectedTrajectory> selections;
  std::vector<PlanSegment> segments;
  std::array<double, 2> predicted{};  ///< RP angles after execution
};

/// Orders approach, reconfiguration and rollback segments so that each
/// segment starts where the previous one ended and the plan returns to its
/// starting arm configuration. With sharing, a second approach identical to
/// the first is skipped entirely and one sharing a prefix only retraces the
/// diverging tail; approaches without a common first waypoint fall back to
/// the unshared layout.
ReconfigPlan assemble_plan(std::vector<SelectedTrajectory> selection, const std::array<double, 2>& current,
                           bool share_approaches = true);

/// Open-loop kinematic execution: during each reconfiguration segment the
/// corresponding RP-joint is released and ratcheted along with the arm's
/// progress; it is locked again before the rollback. Returns final RP angles.
std::array<double, 2> simulate_plan(const ReconfigPlan& plan, const std::array<double, 2>& initial,
                                    const GripperSpec& spec = GripperSpec::defaults());

struct LibraryOptions {
  std::size_t dof = 6;
  std::size_t reconfig_waypoints = 5;
  std::size_t approach_waypoints = 3;
  /// Every trajectory uses the same approach (otherwise they share only the home waypoint).
  bool identical_approach = false;
  double h_low = -1.5707963267948966;
  double h_high = 1.5707963267948966;
};

/// Synthetic library with smooth random waypoints, for tests and demos.
TrajectoryLibrary synthetic_library(const LibraryOptions& options, std::uint64_t seed);

/// One block per segment: "# segment k kind selection" followed by waypoint rows.
void write_plan_csv(std::ostream& out, const ReconfigPlan& plan);

const char* to_string(SegmentKind kind);
const char* to_string(Direction d);

}  // namespace rpgrasp

#include "rpgrasp/reconfig.hpp"

#include "rpgrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <stdexcept>
#include <string>

namespace rpgrasp {

namespace {

bool same(const ArmConfig& a, const ArmConfig& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

// Index of the segment [k, k+1] containing arc length s, and the fraction along it.
std::pair<std::size_t, double> locate(const std::vector<double>& arc, double s) {
  const auto it = std::upper_bound(arc.begin(), arc.end(), s);
  std::size_t k = it == arc.begin() ? 0 : static_cast<std::size_t>(it - arc.begin()) - 1;
  k = std::min(k, arc.size() - 2);
  const double len = arc[k + 1] - arc[k];
  const double f = len > 0.0 ? std::clamp((s - arc[k]) / len, 0.0, 1.0) : 0.0;
  return {k, f};
}

double target_arc(const ReconfigTrajectory& t, double h_target) {
  const double lo = std::min(t.h_begin, t.h_end);
  const double hi = std::max(t.h_begin, t.h_end);
  if (!(h_target >= lo && h_target <= hi))
    throw std::invalid_argument("interpolate_final_waypoint: target " + std::to_string(h_target) +
                                " outside trajectory range");
  return (h_target - t.h_begin) / (t.h_end - t.h_begin);
}

Waypoints slice(const Waypoints& w, std::size_t from) { return Waypoints(w.begin() + static_cast<long>(from), w.end()); }

}  // namespace

void ReconfigTrajectory::validate() const {
  if (rp > 1) throw std::invalid_argument("trajectory: rp index must be 0 or 1");
  if (reconfig.size() < 2) throw std::invalid_argument("trajectory: need at least two reconfiguration waypoints");
  if (approach.empty()) throw std::invalid_argument("trajectory: need at least one approach waypoint");
  if (!std::isfinite(h_begin) || !std::isfinite(h_end) || h_begin == h_end)
    throw std::invalid_argument("trajectory: h_begin and h_end must be finite and distinct");
  if ((direction == Direction::Increasing) != (h_end > h_begin))
    throw std::invalid_argument("trajectory: direction disagrees with h_begin/h_end");
  const auto n = reconfig.front().size();
  if (n == 0) throw std::invalid_argument("trajectory: empty arm configuration");
  for (const auto* list : {&reconfig, &approach})
    for (const auto& w : *list)
      if (w.size() != n || !w.allFinite()) throw std::invalid_argument("trajectory: inconsistent or non-finite waypoint");
  if (!same(approach.back(), reconfig.front()))
    throw std::invalid_argument("trajectory: approach must end at the first reconfiguration waypoint");
  if (!(arc_lengths(reconfig).back() > 0.0)) throw std::invalid_argument("trajectory: reconfiguration path has zero length");
}

std::vector<double> arc_lengths(const Waypoints& w) {
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t k = 1; k < w.size(); ++k) out[k] = out[k - 1] + (w[k] - w[k - 1]).norm();
  return out;
}

ArmConfig interpolate_final_waypoint(const ReconfigTrajectory& t, double h_target) {
  const double frac = target_arc(t, h_target);
  if (h_target == t.h_begin) return t.reconfig.front();
  if (h_target == t.h_end) return t.reconfig.back();
  const auto arc = arc_lengths(t.reconfig);
  const auto [k, f] = locate(arc, frac * arc.back());
  return t.reconfig[k] + f * (t.reconfig[k + 1] - t.reconfig[k]);
}

Waypoints truncate_at(const ReconfigTrajectory& t, double h_target) {
  const double frac = target_arc(t, h_target);
  if (h_target == t.h_end) return t.reconfig;
  if (h_target == t.h_begin) return {t.reconfig.front(), t.reconfig.front()};
  const auto arc = arc_lengths(t.reconfig);
  const auto [k, f] = locate(arc, frac * arc.back());
  Waypoints out(t.reconfig.begin(), t.reconfig.begin() + static_cast<long>(k) + 1);
  const ArmConfig end = t.reconfig[k] + f * (t.reconfig[k + 1] - t.reconfig[k]);
  if (out.size() < 2 || !same(out.back(), end)) out.push_back(end);
  return out;
}

void validate_library(const TrajectoryLibrary& library) {
  if (library.empty()) throw std::invalid_argument("trajectory library is empty");
  const auto dof = library.front().dof();
  for (const auto& t : library) {
    t.validate();
    if (t.dof() != dof) throw std::invalid_argument("trajectory library mixes arm dimensions");
  }
}

std::vector<SelectedTrajectory> select_trajectories(const TrajectoryLibrary& library,
                                                    const std::array<double, 2>& current,
                                                    const std::array<double, 2>& target, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("select_trajectories: delta must be positive");
  std::vector<SelectedTrajectory> out;
  for (std::size_t rp = 0; rp < 2; ++rp) {
    if (std::abs(target[rp] - current[rp]) <= delta) continue;
    const Direction want = target[rp] > current[rp] ? Direction::Increasing : Direction::Decreasing;
    const auto it = std::find_if(library.begin(), library.end(),
                                 [&](const ReconfigTrajectory& t) { return t.rp == rp && t.direction == want; });
    if (it == library.end())
      throw std::invalid_argument(std::string("select_trajectories: no ") + to_string(want) +
                                  " trajectory for RP-joint " + std::to_string(rp));
    it->validate();
    SelectedTrajectory s;
    s.trajectory = *it;
    s.trajectory.reconfig = truncate_at(*it, target[rp]);
    s.current = current[rp];
    s.target = target[rp];
    s.full_length = arc_lengths(it->reconfig).back();
    out.push_back(std::move(s));
  }
  return out;
}

Waypoints rollback(const Waypoints& w) { return Waypoints(w.rbegin(), w.rend()); }

ReconfigPlan assemble_plan(std::vector<SelectedTrajectory> selection, const std::array<double, 2>& current,
                           bool share_approaches) {
  ReconfigPlan plan;
  plan.predicted = current;
  if (selection.empty()) return plan;
  if (selection.size() > 2) throw std::invalid_argument("assemble_plan: at most two selections");
  if (selection.size() == 2 && selection[0].trajectory.rp == selection[1].trajectory.rp)
    throw std::invalid_argument("assemble_plan: both selections move the same RP-joint");
  for (const auto& s : selection) plan.predicted[s.trajectory.rp] = s.target;
  plan.selections = std::move(selection);

  auto add = [&](SegmentKind kind, std::size_t sel, Waypoints w) {
    plan.segments.push_back({kind, sel, std::move(w)});
  };
  const Waypoints& a1 = plan.selections[0].trajectory.approach;
  add(SegmentKind::Approach, 0, a1);
  add(SegmentKind::Reconfigure, 0, plan.selections[0].trajectory.reconfig);
  add(SegmentKind::Rollback, 0, rollback(plan.selections[0].trajectory.reconfig));
  if (plan.selections.size() == 1) {
    add(SegmentKind::Rollback, 0, rollback(a1));
    return plan;
  }

  const Waypoints& a2 = plan.selections[1].trajectory.approach;
  std::size_t common = 0;
  while (common < a1.size() && common < a2.size() && same(a1[common], a2[common])) ++common;

  Waypoints retrace, forward;
  if (share_approaches && common > 0) {
    retrace = rollback(slice(a1, common - 1));
    forward = slice(a2, common - 1);
  } else {
    retrace = rollback(a1);
    forward.reserve(a2.size() + 1);
    forward.push_back(a1.front());
    forward.insert(forward.end(), a2.begin(), a2.end());
  }
  if (retrace.size() > 1) add(SegmentKind::Rollback, 0, std::move(retrace));
  if (forward.size() > 1) add(SegmentKind::Approach, 1, forward);
  add(SegmentKind::Reconfigure, 1, plan.selections[1].trajectory.reconfig);
  add(SegmentKind::Rollback, 1, rollback(plan.selections[1].trajectory.reconfig));
  // The way back retraces the second approach (including the part shared with the first).
  const Waypoints& back = share_approaches && common > 0 ? a2 : forward;
  add(SegmentKind::Rollback, 1, rollback(back));
  return plan;
}

std::array<double, 2> simulate_plan(const ReconfigPlan& plan, const std::array<double, 2>& initial,
                                    const GripperSpec& spec) {
  std::array<RPJointState, 2> joints;
  for (std::size_t rp = 0; rp < 2; ++rp) {
    joints[rp].angle = initial[rp];
    joints[rp] = rp_transition(joints[rp], ApplyTension{}, spec.rp_limits);
  }
  for (const auto& seg : plan.segments) {
    if (seg.kind != SegmentKind::Reconfigure) continue;
    const SelectedTrajectory& sel = plan.selections.at(seg.selection);
    const ReconfigTrajectory& t = sel.trajectory;
    RPJointState& state = joints[t.rp];
    state = rp_transition(state, ReleaseTension{}, spec.rp_limits);
    const auto arc = arc_lengths(seg.waypoints);
    const double sign = t.direction == Direction::Increasing ? 1.0 : -1.0;
    for (std::size_t k = 0; k < arc.size(); ++k) {
      // The finger only moves once the arm reaches the point where the
      // obstacle engages it at its current angle; the joint never backs off.
      const double pushed = k + 1 == arc.size() ? sel.target
                                                : t.h_begin + (arc[k] / sel.full_length) * (t.h_end - t.h_begin);
      const double delta = pushed - state.angle;
      if (sign * delta > 0.0) state = rp_transition(state, ExternalTorque{delta}, spec.rp_limits);
    }
    state = rp_transition(state, ApplyTension{}, spec.rp_limits);
  }
  return {joints[0].angle, joints[1].angle};
}

TrajectoryLibrary synthetic_library(const LibraryOptions& options, std::uint64_t seed) {
  if (options.dof == 0 || options.reconfig_waypoints < 2 || options.approach_waypoints < 1)
    throw std::invalid_argument("synthetic_library: invalid sizes");
  if (!(options.h_high > options.h_low)) throw std::invalid_argument("synthetic_library: empty angle range");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  const auto n = static_cast<Eigen::Index>(options.dof);
  auto random_step = [&] {
    ArmConfig v(n);
    for (Eigen::Index d = 0; d < n; ++d) v[d] = normal(rng);
    return v;
  };
  const ArmConfig home = ArmConfig::Zero(n);
  auto make_approach = [&] {
    Waypoints a{home};
    for (std::size_t k = 1; k < options.approach_waypoints; ++k) a.push_back(a.back() + random_step());
    return a;
  };
  const Waypoints shared = make_approach();

  TrajectoryLibrary out;
  for (std::size_t rp = 0; rp < 2; ++rp) {
    for (Direction dir : {Direction::Increasing, Direction::Decreasing}) {
      ReconfigTrajectory t;
      t.rp = rp;
      t.direction = dir;
      t.h_begin = dir == Direction::Increasing ? options.h_low : options.h_high;
      t.h_end = dir == Direction::Increasing ? options.h_high : options.h_low;
      t.approach = options.identical_approach ? shared : make_approach();
      t.reconfig = {t.approach.back()};
      ArmConfig drift = random_step();
      for (std::size_t k = 1; k < options.reconfig_waypoints; ++k) {
        drift = 0.7 * drift + 0.3 * random_step();
        if (!(drift.norm() > 0.0)) drift[0] = 0.01;
        t.reconfig.push_back(t.reconfig.back() + drift);
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

void write_plan_csv(std::ostream& out, const ReconfigPlan& plan) {
  out << std::setprecision(17);
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const auto& seg = plan.segments[k];
    out << "# segment " << k << ' ' << to_string(seg.kind) << ' ' << seg.selection << '\n';
    for (const auto& w : seg.waypoints) {
      for (Eigen::Index d = 0; d < w.size(); ++d) out << (d ? "," : "") << w[d];
      out << '\n';
    }
  }
}

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Approach: return "approach";
    case SegmentKind::Reconfigure: return "reconfigure";
    case SegmentKind::Rollback: return "rollback";
  }
  return "unknown";
}

const char* to_string(Direction d) { return d == Direction::Increasing ? "increasing" : "decreasing"; }

}  // namespace rpgrasp

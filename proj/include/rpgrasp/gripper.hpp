#pragma once

#include "rpgrasp/geometry.hpp"

#include <array>
#include <optional>
#include <variant>

namespace rpgrasp {

inline constexpr std::size_t kFingerCount = 3;
inline constexpr std::size_t kLinksPerFinger = 5;
inline constexpr std::size_t kLinkCount = kFingerCount * kLinksPerFinger;
inline constexpr std::size_t kActivePerFinger = 4;
inline constexpr std::size_t kJointCount = 14;

using JointVector = Eigen::Matrix<double, 14, 1>;
using LinkPoses = std::array<Pose, kLinkCount>;

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v, double tol = 1e-12) const { return v >= lower - tol && v <= upper + tol; }
  double clamp(double v) const { return v < lower ? lower : (v > upper ? upper : v); }
};

/// Link collision shape: segment from the link origin along its local x-axis,
/// swept by a sphere of the given radius.
struct Capsule {
  double length = 0.0;
  double radius = 0.0;
};

/// Three-finger gripper with two reconfigurable passive (RP) finger bases.
///
/// Conventions (wrist frame = palm centre, z = palm normal / approach axis):
///  * finger m is mounted at angle finger_angles[m] on a circle of palm_radius;
///    at zero configuration its links lie flat in the palm plane pointing radially
///    outwards;
///  * finger 0 is the fixed thumb, fingers 1 and 2 rotate about the mount's z-axis
///    through their RP-joint;
///  * each finger has four active flexion joints between its five links, rotating
///    about active_axis in the parent link frame; positive angles curl the finger
///    towards +z.
///
/// Joint vector layout (14 entries):
///   [0..3]  thumb flexion 1-4
///   [4]     finger 1 RP-joint, [5..8]  finger 1 flexion 1-4
///   [9]     finger 2 RP-joint, [10..13] finger 2 flexion 1-4
struct GripperSpec {
  double palm_radius = 0.038;
  std::array<double, kFingerCount> finger_angles{};
  std::array<double, kLinksPerFinger> link_lengths{};
  std::array<double, kLinksPerFinger> link_radii{};
  Eigen::Vector3d rp_axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d active_axis = -Eigen::Vector3d::UnitY();
  JointLimits rp_limits;
  std::array<JointLimits, kActivePerFinger> active_limits{};
  /// Tendon coupling ratios of the four flexion joints (optional projection).
  std::array<double, kActivePerFinger> coupling{};

  static GripperSpec defaults();
  /// Throws std::invalid_argument on non-positive sizes or empty limit ranges.
  void validate() const;

  static bool has_rp(std::size_t finger) { return finger != 0; }
  static std::optional<std::size_t> rp_joint(std::size_t finger);
  static std::size_t active_joint(std::size_t finger, std::size_t k);
  /// Both RP-joint indices (fingers 1 and 2).
  static constexpr std::array<std::size_t, 2> rp_joints() { return {4, 9}; }
  static std::size_t link_index(std::size_t finger, std::size_t k) { return finger * kLinksPerFinger + k; }

  JointLimits limits(std::size_t joint) const;
  Capsule capsule(std::size_t link) const {
    return {link_lengths[link % kLinksPerFinger], link_radii[link % kLinksPerFinger]};
  }
  bool within_limits(const JointVector& joints, double tol = 1e-12) const;
  JointVector clamp(const JointVector& joints) const;
};

struct GripperConfig {
  Pose wrist;
  JointVector joints = JointVector::Zero();
};

/// Link poses relative to the wrist frame. Does not check limits.
LinkPoses link_chain(const GripperSpec& spec, const JointVector& joints);

/// World-frame poses of all 15 links (finger-major, proximal first).
/// Throws std::invalid_argument if a joint is outside its limits.
LinkPoses forward_kinematics(const GripperSpec& spec, const GripperConfig& cfg);

/// Signed distance from a world point to a link capsule; negative inside.
double capsule_signed_distance(const Capsule& capsule, const Pose& link_pose, const Eigen::Vector3d& point);

/// Least-squares projection of each finger's flexion angles onto its coupling
/// direction, clamped to limits. RP angles are left untouched.
JointVector project_coupling(const GripperSpec& spec, const JointVector& joints);

/// Contact receptive field of one link: truncated Gaussian of the distance from
/// the link surface, exp(-d² / (2 scale²)) for d <= cutoff and 0 beyond.
/// Features inside the link count as d = 0.
struct ReceptiveField {
  std::size_t link = 0;
  double cutoff = 0.03;
  double scale = 0.01;

  double weight_at_distance(double d) const;
};

double receptive_field_eval(const ReceptiveField& field, const Capsule& capsule, const Pose& link_pose,
                            const Pose& feature_pose);

std::array<ReceptiveField, kLinkCount> default_receptive_fields(double cutoff = 0.03, double scale = 0.01);

// RP-joint lock state machine. The tendon tension flag and the lock mode are
// kept as separate fields to mirror the mechanism; every transition keeps them
// in agreement.

enum class RPMode { Free, Locked };
enum class Tension { Slack, Tensioned };

struct RPJointState {
  RPMode mode = RPMode::Free;
  double angle = 0.0;
  Tension tension = Tension::Slack;

  bool consistent() const { return (mode == RPMode::Locked) == (tension == Tension::Tensioned); }
};

struct ApplyTension {};
struct ReleaseTension {};
struct ExternalTorque {
  double delta = 0.0;
};
using RPEvent = std::variant<ApplyTension, ReleaseTension, ExternalTorque>;

RPJointState rp_transition(const RPJointState& state, const RPEvent& event, const JointLimits& limits);

}  // namespace rpgrasp

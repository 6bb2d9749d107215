#include "rpgrasp/gripper.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rpgrasp {

GripperSpec GripperSpec::defaults() {
  GripperSpec s;
  s.palm_radius = 0.038;
  s.finger_angles = {0.0, 2.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi / 3.0};
  s.link_lengths = {0.026, 0.045, 0.025, 0.025, 0.020};
  s.link_radii = {0.009, 0.009, 0.008, 0.008, 0.007};
  s.rp_limits = {-1.75, 1.75};
  s.active_limits = {JointLimits{-0.35, 1.92}, JointLimits{-0.2, 1.92}, JointLimits{-0.2, 1.92},
                     JointLimits{-0.2, 1.92}};
  s.coupling = {1.0, 1.0, 1.0, 1.0};
  return s;
}

void GripperSpec::validate() const {
  if (!(palm_radius > 0.0)) throw std::invalid_argument("GripperSpec: palm_radius must be positive");
  for (std::size_t k = 0; k < kLinksPerFinger; ++k) {
    if (!(link_lengths[k] > 0.0)) throw std::invalid_argument("GripperSpec: link lengths must be positive");
    if (!(link_radii[k] > 0.0)) throw std::invalid_argument("GripperSpec: link radii must be positive");
  }
  if (!(rp_limits.upper > rp_limits.lower)) throw std::invalid_argument("GripperSpec: empty RP limits");
  for (const auto& l : active_limits)
    if (!(l.upper > l.lower)) throw std::invalid_argument("GripperSpec: empty active joint limits");
  if (!(rp_axis.norm() > 0.0) || !(active_axis.norm() > 0.0))
    throw std::invalid_argument("GripperSpec: joint axes must be non-zero");
}

std::optional<std::size_t> GripperSpec::rp_joint(std::size_t finger) {
  if (finger == 1) return 4;
  if (finger == 2) return 9;
  return std::nullopt;
}

std::size_t GripperSpec::active_joint(std::size_t finger, std::size_t k) {
  switch (finger) {
    case 0: return k;
    case 1: return 5 + k;
    default: return 10 + k;
  }
}

JointLimits GripperSpec::limits(std::size_t joint) const {
  if (joint >= kJointCount) throw std::out_of_range("GripperSpec::limits: joint index");
  if (joint == 4 || joint == 9) return rp_limits;
  const std::size_t k = joint < 4 ? joint : (joint < 9 ? joint - 5 : joint - 10);
  return active_limits[k];
}

bool GripperSpec::within_limits(const JointVector& joints, double tol) const {
  for (std::size_t j = 0; j < kJointCount; ++j)
    if (!std::isfinite(joints[j]) || !limits(j).contains(joints[j], tol)) return false;
  return true;
}

JointVector GripperSpec::clamp(const JointVector& joints) const {
  JointVector out = joints;
  for (std::size_t j = 0; j < kJointCount; ++j) out[j] = limits(j).clamp(out[j]);
  return out;
}

LinkPoses link_chain(const GripperSpec& spec, const JointVector& joints) {
  LinkPoses out;
  const Eigen::Vector3d rp_axis = spec.rp_axis.normalized();
  const Eigen::Vector3d flex_axis = spec.active_axis.normalized();
  for (std::size_t m = 0; m < kFingerCount; ++m) {
    Pose frame = compose(Pose::rotation(Eigen::Vector3d::UnitZ(), spec.finger_angles[m]),
                         Pose::translation(spec.palm_radius, 0.0, 0.0));
    if (const auto rp = GripperSpec::rp_joint(m)) frame = compose(frame, Pose::rotation(rp_axis, joints[*rp]));
    out[GripperSpec::link_index(m, 0)] = frame;
    for (std::size_t k = 1; k < kLinksPerFinger; ++k) {
      const double angle = joints[GripperSpec::active_joint(m, k - 1)];
      frame = compose(frame, compose(Pose::translation(spec.link_lengths[k - 1], 0.0, 0.0),
                                     Pose::rotation(flex_axis, angle)));
      out[GripperSpec::link_index(m, k)] = frame;
    }
  }
  return out;
}

LinkPoses forward_kinematics(const GripperSpec& spec, const GripperConfig& cfg) {
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!std::isfinite(cfg.joints[j]) || !spec.limits(j).contains(cfg.joints[j]))
      throw std::invalid_argument("forward_kinematics: joint " + std::to_string(j) + " outside limits");
  }
  LinkPoses out = link_chain(spec, cfg.joints);
  for (auto& p : out) p = compose(cfg.wrist, p);
  return out;
}

double capsule_signed_distance(const Capsule& capsule, const Pose& link_pose, const Eigen::Vector3d& point) {
  const Eigen::Vector3d local = link_pose.orientation().conjugate() * (point - link_pose.position());
  const double t = local.x() < 0.0 ? 0.0 : (local.x() > capsule.length ? capsule.length : local.x());
  const Eigen::Vector3d closest(t, 0.0, 0.0);
  return (local - closest).norm() - capsule.radius;
}

JointVector project_coupling(const GripperSpec& spec, const JointVector& joints) {
  JointVector out = joints;
  Eigen::Vector4d c(spec.coupling[0], spec.coupling[1], spec.coupling[2], spec.coupling[3]);
  const double cc = c.squaredNorm();
  if (!(cc > 0.0)) return spec.clamp(out);
  for (std::size_t m = 0; m < kFingerCount; ++m) {
    Eigen::Vector4d a;
    for (std::size_t k = 0; k < kActivePerFinger; ++k) a[k] = joints[GripperSpec::active_joint(m, k)];
    const double t = c.dot(a) / cc;
    for (std::size_t k = 0; k < kActivePerFinger; ++k) out[GripperSpec::active_joint(m, k)] = t * c[k];
  }
  return spec.clamp(out);
}

double ReceptiveField::weight_at_distance(double d) const {
  if (d < 0.0) d = 0.0;
  if (d > cutoff) return 0.0;
  return std::exp(-0.5 * d * d / (scale * scale));
}

double receptive_field_eval(const ReceptiveField& field, const Capsule& capsule, const Pose& link_pose,
                            const Pose& feature_pose) {
  return field.weight_at_distance(capsule_signed_distance(capsule, link_pose, feature_pose.position()));
}

std::array<ReceptiveField, kLinkCount> default_receptive_fields(double cutoff, double scale) {
  std::array<ReceptiveField, kLinkCount> out;
  for (std::size_t i = 0; i < kLinkCount; ++i) out[i] = ReceptiveField{i, cutoff, scale};
  return out;
}

RPJointState rp_transition(const RPJointState& state, const RPEvent& event, const JointLimits& limits) {
  RPJointState next = state;
  if (std::holds_alternative<ApplyTension>(event)) {
    next.mode = RPMode::Locked;
    next.tension = Tension::Tensioned;
  } else if (std::holds_alternative<ReleaseTension>(event)) {
    next.mode = RPMode::Free;
    next.tension = Tension::Slack;
  } else if (state.mode == RPMode::Free) {
    next.angle = limits.clamp(state.angle + std::get<ExternalTorque>(event).delta);
  }
  return next;
}

}  // namespace rpgrasp

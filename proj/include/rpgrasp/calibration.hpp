#pragma once

#include "rpgrasp/gripper.hpp"

#include <Eigen/Core>

#include <istream>
#include <vector>

namespace rpgrasp {

/// First-order exponential filter y_k = alpha x_k + (1 - alpha) y_{k-1}, y_0 = x_0.
/// Throws std::invalid_argument on an empty series or alpha outside (0, 1].
std::vector<double> low_pass(const std::vector<double>& readings, double alpha);

/// Revolute joint: fixed offset from the previous frame, then rotation about axis.
struct RevoluteJoint {
  Pose offset;
  Eigen::Vector3d axis = -Eigen::Vector3d::UnitY();
};
using KinematicChain = std::vector<RevoluteJoint>;

/// Π_i offset_i ∘ Rot(axis_i, h_i).
Pose chain_pose(const KinematicChain& chain, const Eigen::VectorXd& h);

/// Flexion chain of one finger, from the proximal link frame to the distal one.
KinematicChain finger_chain(const GripperSpec& spec);

/// Affine sensor and tendon models: h_j = gain_j s_j + offset_j, and the tendon
/// displacement (total finger flexion) = tendon_gain r + tendon_offset.
struct LinearSensorModel {
  Eigen::VectorXd gain;
  Eigen::VectorXd offset;
  double tendon_gain = 1.0;
  double tendon_offset = 0.0;

  static LinearSensorModel identity(std::size_t joints);
  void validate() const;
};

Eigen::VectorXd apply_model(const LinearSensorModel& model, const Eigen::VectorXd& sensors);
double apply_tendon(const LinearSensorModel& model, double motor);

/// One filtered reading with both tracker poses in the camera frame: the base
/// tracker on the proximal link and the tracker mounted on the distal link.
struct CalibrationSample {
  Eigen::VectorXd sensors;
  double motor = 0.0;
  Pose base;
  Pose tracker;
};

struct CalibrationOptions {
  std::size_t max_iters = 200;
  double tol = 1e-14;
  /// Minimum standard deviation of every sensor channel and the motor channel.
  double min_excitation = 1e-6;
};

struct CalibrationResult {
  LinearSensorModel model;
  Pose joint_to_tracker;          ///< distal link frame to tracker
  double residual = 0.0;          ///< Σ_k ‖base_k · chain(h_k) · X − tracker_k‖_F²
  std::vector<double> history;    ///< residual after each iteration
  std::size_t iterations = 0;
};

/// Starts from the closed-form tracker transform for `init`, then alternates a
/// damped Gauss-Newton step on gains, offsets and the transform with a
/// closed-form refit of the transform (kept only when it lowers the residual).
/// The last joint's offset is indistinguishable from a rotation of the tracker
/// transform about that joint's axis, so it is held at its initial value.
/// Throws DataError with fewer than 6 samples or insufficient excitation.
CalibrationResult fit_calibration(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                                  const LinearSensorModel& init, const CalibrationOptions& options = {});

/// Squared Frobenius residual for given parameters.
double calibration_residual(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                            const LinearSensorModel& model, const Pose& joint_to_tracker);

/// CSV with header: sensor channels s0..s{n-1}, motor, base px..qz, tracker px..qz.
/// An optional leading "t" (timestamp) column is ignored.
std::vector<CalibrationSample> read_calibration_csv(std::istream& in, std::size_t joints);

/// Low-pass filters the sensor and motor channels in time order.
std::vector<CalibrationSample> filter_samples(const std::vector<CalibrationSample>& samples, double alpha);

}  // namespace rpgrasp

#pragma once

#include "rpgrasp/geometry.hpp"

#include <cmath>
#include <random>

namespace rpgrasp::test {

inline Eigen::Quaterniond random_quaternion(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline Pose random_pose(Rng& rng, double extent = 1.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return Pose(Eigen::Vector3d(u(rng), u(rng), u(rng)), random_quaternion(rng));
}

/// Homogeneous matrix written out from the quaternion components, independent
/// of Eigen's conversion.
inline Eigen::Matrix4d matrix_oracle(const Eigen::Vector3d& p, const Eigen::Quaterniond& q_in) {
  const double n = std::sqrt(q_in.w() * q_in.w() + q_in.x() * q_in.x() + q_in.y() * q_in.y() + q_in.z() * q_in.z());
  const double w = q_in.w() / n, x = q_in.x() / n, y = q_in.y() / n, z = q_in.z() / n;
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = 1 - 2 * (y * y + z * z);
  m(0, 1) = 2 * (x * y - z * w);
  m(0, 2) = 2 * (x * z + y * w);
  m(1, 0) = 2 * (x * y + z * w);
  m(1, 1) = 1 - 2 * (x * x + z * z);
  m(1, 2) = 2 * (y * z - x * w);
  m(2, 0) = 2 * (x * z - y * w);
  m(2, 1) = 2 * (y * z + x * w);
  m(2, 2) = 1 - 2 * (x * x + y * y);
  m.block<3, 1>(0, 3) = p;
  return m;
}

inline Eigen::Matrix4d matrix_oracle(const Pose& pose) { return matrix_oracle(pose.position(), pose.orientation()); }

/// Rotation about a unit axis by Rodrigues' formula.
inline Eigen::Matrix4d rotation_oracle(const Eigen::Vector3d& axis_in, double angle) {
  const Eigen::Vector3d a = axis_in.normalized();
  Eigen::Matrix3d k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
  return m;
}

inline Eigen::Matrix4d translation_oracle(double x, double y, double z) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = x;
  m(1, 3) = y;
  m(2, 3) = z;
  return m;
}

inline bool bit_equal(const Pose& a, const Pose& b) {
  return a.position() == b.position() && a.orientation().coeffs() == b.orientation().coeffs();
}

}  // namespace rpgrasp::test

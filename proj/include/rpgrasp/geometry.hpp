#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rpgrasp {

using Rng = std::mt19937_64;

/// Rigid transform stored as position + unit quaternion.
///
/// The quaternion is renormalized on construction and kept in the canonical
/// hemisphere (w >= 0, ties broken on the first non-zero imaginary part), so
/// two equal rotations always serialize to identical numbers.
class Pose {
 public:
  Pose() : p_(Eigen::Vector3d::Zero()), q_(Eigen::Quaterniond::Identity()) {}
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q);

  static Pose identity() { return {}; }
  /// Stores q as given (no renormalization) so serialized poses load
  /// bit-exactly. Throws std::invalid_argument unless q is unit-norm within
  /// 1e-9 and already canonical.
  static Pose from_stored(const Eigen::Vector3d& p, const Eigen::Quaterniond& q);
  static Pose translation(double x, double y, double z);
  static Pose translation(const Eigen::Vector3d& t);
  static Pose rotation(const Eigen::Vector3d& axis, double angle);
  static Pose from_matrix(const Eigen::Matrix4d& m);
  /// Rotation given by a rotation vector (axis * angle).
  static Pose from_rotation_vector(const Eigen::Vector3d& p, const Eigen::Vector3d& rotvec);

  const Eigen::Vector3d& position() const { return p_; }
  const Eigen::Quaterniond& orientation() const { return q_; }

  Eigen::Matrix3d rotation_matrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Eigen::Vector3d transform_point(const Eigen::Vector3d& x) const { return p_ + q_ * x; }
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const { return q_ * v; }

  bool is_finite() const;

 private:
  Eigen::Vector3d p_;
  Eigen::Quaterniond q_;
};

/// a ∘ b, i.e. the homogeneous product a.matrix() * b.matrix().
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& a);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

/// Canonical representative of ±q with w >= 0.
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

/// Rotation angle (radians, in [0, pi]) between two orientations, sign-agnostic.
double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Kernel bandwidth for (position, orientation, descriptor) triples.
struct Bandwidth {
  double sigma_p = 0.01;
  double sigma_q = 0.2;
  Eigen::Vector2d sigma_r = Eigen::Vector2d(5.0, 5.0);

  /// Throws std::invalid_argument unless every component is strictly positive.
  void validate() const;
  /// Orientation concentration kappa = 1 / sigma_q^2.
  double kappa() const { return 1.0 / (sigma_q * sigma_q); }
};

// Kernel normalization convention used across every density in the library:
//   * Gaussian factors (position, descriptor) are normalized probability densities.
//   * The orientation factor is the antipodal von Mises-Fisher pair on S^3 scaled
//     by exp(-kappa), i.e. 0.5 * (exp(kappa (d - 1)) + exp(-kappa (d + 1))) with
//     d = <q, mu>. Its maximum is 0.5 (1 + exp(-2 kappa)) at q = ±mu.
// Densities are only compared and sampled, so the missing S^3 normalizer (a
// function of kappa alone) is a global constant factor.

/// n-variate isotropic Gaussian density N_n(x | mu, sigma).
double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& mu, double sigma);

/// Axis-aligned Gaussian density over curvature descriptors (one scale per axis).
double descriptor_kernel(const Eigen::Vector2d& r, const Eigen::Vector2d& mu,
                         const Eigen::Vector2d& sigma);

/// Antipodal von Mises-Fisher pair Θ(q | mu, sigma_q), kappa = 1 / sigma_q^2.
/// Both quaternions must be unit-norm (tolerance 1e-6).
double orientation_kernel(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu, double sigma_q);

/// Same as orientation_kernel, with an explicit concentration and no validation.
double orientation_kernel_kappa(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                                double kappa);

/// Position x orientation part of the factored kernel (query densities).
double pose_kernel(const Pose& x, const Pose& mu, const Bandwidth& bw);

/// Full factored kernel K = N3 · Θ · N2.
double factored_kernel(const Pose& x, const Eigen::Vector2d& r, const Pose& mu,
                       const Eigen::Vector2d& mu_r, const Bandwidth& bw);

/// Draws a unit quaternion from the antipodal vMF pair centred on the identity.
/// The returned quaternion is in the canonical hemisphere.
Eigen::Quaterniond sample_orientation_offset(Rng& rng, double kappa);

/// Draws a pose perturbation around the identity: Gaussian position with
/// per-axis std sigma_p, orientation from the vMF pair. Applying it on the
/// right of a kernel mean (mean ∘ offset) keeps sampling frame-equivariant.
Pose sample_pose_offset(Rng& rng, double sigma_p, double sigma_q);

/// Draws an index with probability proportional to its weight, given the
/// running (inclusive) sums of the weights. Requires a positive total.
std::size_t sample_index(Rng& rng, const std::vector<double>& cumulative);

/// Deterministic sub-seed derived from a master seed and a stream name.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace rpgrasp

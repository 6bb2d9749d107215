#pragma once

#include "rpgrasp/gripper.hpp"
#include "rpgrasp/spatial_index.hpp"
#include "rpgrasp/surface_features.hpp"

#include <span>
#include <string>
#include <vector>

namespace rpgrasp {

/// A single demonstrated grasp: the training object as a feature density and
/// the gripper configuration that held it.
struct Demonstration {
  int grasp_id = 0;
  std::string label;
  FeatureDensity object;
  GripperConfig config;
};

struct ContactKernel {
  Pose relative;  ///< link pose in the feature frame, u = v⁻¹ ∘ s
  Eigen::Vector2d curvature = Eigen::Vector2d::Zero();
  double weight = 0.0;
};

/// Density over link poses relative to nearby surface features, conditioned on
/// the feature descriptor. An empty kernel list marks a link without contacts.
struct ContactModel {
  std::size_t link = 0;
  int grasp_id = 0;
  std::vector<ContactKernel> kernels;
  Bandwidth bandwidth;

  bool empty() const { return kernels.empty(); }
  /// Σ_j w_j K(u, r | u_j, r_j, σ).
  double evaluate(const Pose& u, const Eigen::Vector2d& r) const;
  /// Descriptor marginal Σ_j w_j N2(r | r_j, σ_r).
  double descriptor_marginal(const Eigen::Vector2d& r) const;
};

struct CollisionParams {
  double gamma = 10.0;
  double beta = 1e4;
  void validate() const;
};

/// u = v⁻¹ ∘ s.
Pose relative_pose(const Pose& link_pose, const Pose& feature_pose);

/// Contact model of one link. Kernel weights are w_j F_i(v_j) normalized over
/// the features inside the receptive field.
ContactModel learn_contact_model(const Demonstration& demo, const GripperSpec& spec, const ReceptiveField& field);

std::vector<ContactModel> learn_contact_models(const Demonstration& demo, const GripperSpec& spec,
                                               std::span<const ReceptiveField> fields);

/// Point cloud prepared for repeated capsule penetration queries.
class CloudCollider {
 public:
  CloudCollider() = default;
  explicit CloudCollider(std::span<const Eigen::Vector3d> points, double cell = 0.01);
  const PointGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

 private:
  PointGrid grid_;
};

struct CollisionResult {
  /// W = Π_i exp(-γ W_i), in (0, 1].
  double value = 1.0;
  /// log W = -γ Σ_i W_i (finite even when W underflows).
  double log_value = 0.0;
  /// W_i = Σ_j (exp(β d_ij²) - 1) over penetrating points.
  std::array<double, kLinkCount> per_link{};

  double total() const;
};

/// Soft collision model of the gripper links against a cloud.
CollisionResult collision_value(const CloudCollider& cloud, const GripperSpec& spec, const GripperConfig& cfg,
                                const CollisionParams& params);
CollisionResult collision_value(std::span<const Eigen::Vector3d> points, const GripperSpec& spec,
                                const GripperConfig& cfg, const CollisionParams& params);

/// Feature positions prepared for repeated receptive-field queries.
class FeatureIndex {
 public:
  FeatureIndex() = default;
  FeatureIndex(const std::vector<SurfaceFeature>& features, std::vector<double> weights, double cell = 0.01);
  const PointGrid& grid() const { return grid_; }
  double weight(std::size_t j) const { return weights_[j]; }

 private:
  PointGrid grid_;
  std::vector<double> weights_;
};

/// M(h) = Σ_i Σ_j w_j F_i(v_j | h).
double contact_mass(const FeatureIndex& features, const GripperSpec& spec, const GripperConfig& cfg,
                    std::span<const ReceptiveField> fields);
double contact_mass(const FeatureDensity& object, const GripperSpec& spec, const GripperConfig& cfg,
                    std::span<const ReceptiveField> fields);

struct KinaestheticOptions {
  double zeta = 1.0;
  double eps_position = 0.02;     ///< box half-width on the wrist position (m)
  double eps_orientation = 0.15;  ///< geodesic radius around the wrist orientation (rad)
  JointVector eps_joints = JointVector::Constant(0.15);
  std::size_t budget = 5000;
  std::uint64_t seed = 0;
};

struct KinaestheticResult {
  GripperConfig config;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double collision_initial = 0.0;  ///< Σ_i W_i
  double collision_final = 0.0;
  std::size_t evaluations = 0;
};

/// Local search for J(h) = M(h)/M(h_g) - ζ Σ_i W_i(h) / Σ_i W_i(h_g) inside the
/// ε-neighbourhood of the demonstrated configuration (each scale falls back to
/// 1 when its value at h_g is zero). The training features double as the
/// collision cloud. Coordinate pattern search with halving steps; never
/// returns a configuration scoring below the demonstration.
KinaestheticResult kinaesthetic_optimize(const Demonstration& demo, const GripperSpec& spec,
                                         std::span<const ReceptiveField> fields, const CollisionParams& params,
                                         const KinaestheticOptions& options = {});

}  // namespace rpgrasp

#pragma once

#include "rpgrasp/geometry.hpp"
#include "rpgrasp/point_cloud.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace rpgrasp {

/// Oriented surface frame plus principal-curvature descriptor.
///
/// The frame's z-axis is the outward surface normal, its x-axis the direction
/// of the larger principal curvature (towards the neighbourhood centroid at
/// umbilic points). Curvatures are in 1/m, positive where the
/// surface bends away from the normal (convex), ordered r[0] >= r[1].
struct SurfaceFeature {
  Pose frame;
  Eigen::Vector2d curvature = Eigen::Vector2d::Zero();
};

struct FeatureOptions {
  double radius = 0.01;
  std::size_t min_neighbors = 5;
  /// Normal sign reference when the cloud carries no normals.
  Eigen::Vector3d viewpoint = Eigen::Vector3d::Zero();
};

struct FeatureExtraction {
  std::vector<SurfaceFeature> features;
  /// Index of the cloud point each feature was computed at.
  std::vector<std::size_t> source;
  /// Points whose neighbourhood was too small or degenerate for the fit.
  std::size_t dropped = 0;
};

/// Estimates one surface feature per point from its radius neighbourhood:
/// PCA plane fit for the normal, then a least-squares quadric
/// z = ax² + bxy + cy² + dx + ey in that frame for the principal curvatures.
/// Normal sign follows the cloud's normals when present, otherwise faces the
/// viewpoint. Needs at least 10 points and radius > 0.
FeatureExtraction extract_features(const PointCloud& cloud, const FeatureOptions& options = {});

/// Weighted kernel density over surface features.
class FeatureDensity {
 public:
  /// Uniform weights when `weights` is empty; otherwise renormalized.
  /// Throws std::invalid_argument on empty input, negative or all-zero weights.
  FeatureDensity(std::vector<SurfaceFeature> features, std::vector<double> weights, Bandwidth bandwidth);

  std::size_t size() const { return features_.size(); }
  const SurfaceFeature& feature(std::size_t j) const { return features_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  const std::vector<SurfaceFeature>& features() const { return features_; }
  const std::vector<double>& weights() const { return weights_; }
  const Bandwidth& bandwidth() const { return bandwidth_; }

  /// Σ_j w_j K(x | x_j, σ).
  double evaluate(const SurfaceFeature& x) const;

  /// Kernel index drawn ∝ weight, then the kernel is perturbed in its own frame.
  SurfaceFeature sample(Rng& rng) const;

 private:
  std::vector<SurfaceFeature> features_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  Bandwidth bandwidth_;
};

FeatureDensity build_density(std::vector<SurfaceFeature> features, const Bandwidth& bandwidth,
                             std::vector<double> weights = {});

SurfaceFeature sample_density(const FeatureDensity& density, std::uint64_t seed);

/// Columns: px,py,pz,qw,qx,qy,qz,r0,r1.
void write_features_csv(std::ostream& out, const std::vector<SurfaceFeature>& features);

}  // namespace rpgrasp

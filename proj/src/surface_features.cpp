#include "rpgrasp/surface_features.hpp"

#include "rpgrasp/spatial_index.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace rpgrasp {

namespace {

constexpr double kUmbilicTolerance = 1e-6;

// In-plane direction from the query point to the neighbourhood centroid, or the
// tangent closest to world x when the neighbourhood is perfectly balanced.
Eigen::Vector3d umbilic_tangent(const Eigen::Vector3d& n, const Eigen::Vector3d& offset, double radius) {
  Eigen::Vector3d t = offset - offset.dot(n) * n;
  if (t.norm() > 1e-9 * radius) return t.normalized();
  t = Eigen::Vector3d::UnitX() - n.x() * n;
  if (t.norm() < 1e-6) t = Eigen::Vector3d::UnitY() - n.y() * n;
  return t.normalized();
}

std::optional<SurfaceFeature> fit_feature(const PointCloud& cloud, std::size_t index,
                                          const std::vector<std::size_t>& nbrs,
                                          const FeatureOptions& opt) {
  const Eigen::Vector3d& p = cloud.points[index];

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (auto k : nbrs) centroid += cloud.points[k];
  centroid /= static_cast<double>(nbrs.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto k : nbrs) {
    const Eigen::Vector3d d = cloud.points[k] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> pca(cov);
  if (pca.info() != Eigen::Success) return std::nullopt;
  Eigen::Vector3d n = pca.eigenvectors().col(0);
  // Planar spread must be two-dimensional for a surface fit.
  if (!(pca.eigenvalues()[1] > 1e-12 * pca.eigenvalues()[2])) return std::nullopt;

  const Eigen::Vector3d ref = cloud.has_normals() ? cloud.normals[index] : (opt.viewpoint - p);
  if (n.dot(ref) < 0.0) n = -n;

  const Eigen::Vector3d e1 = pca.eigenvectors().col(2);
  const Eigen::Vector3d e2 = n.cross(e1);

  // z = a x² + b xy + c y² + d x + e y, anchored at the query point.
  Eigen::MatrixXd A(nbrs.size(), 5);
  Eigen::VectorXd z(nbrs.size());
  for (std::size_t r = 0; r < nbrs.size(); ++r) {
    const Eigen::Vector3d d = cloud.points[nbrs[r]] - p;
    const double x = d.dot(e1), y = d.dot(e2);
    A.row(static_cast<Eigen::Index>(r)) << x * x, x * y, y * y, x, y;
    z[static_cast<Eigen::Index>(r)] = d.dot(n);
  }
  // Column scaling keeps the quadratic and linear columns comparable.
  const double s = opt.radius;
  Eigen::VectorXd scale(5);
  scale << 1.0 / (s * s), 1.0 / (s * s), 1.0 / (s * s), 1.0 / s, 1.0 / s;
  const Eigen::MatrixXd As = A * scale.asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
  qr.setThreshold(1e-8);
  if (qr.rank() < 5) return std::nullopt;
  const Eigen::VectorXd coef = scale.asDiagonal() * qr.solve(z);
  const double a = coef[0], b = coef[1], c = coef[2], fx = coef[3], fy = coef[4];

  Eigen::Matrix2d first;
  first << 1.0 + fx * fx, fx * fy, fx * fy, 1.0 + fy * fy;
  const double w = std::sqrt(1.0 + fx * fx + fy * fy);
  Eigen::Matrix2d second;
  second << 2.0 * a / w, b / w, b / w, 2.0 * c / w;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> shape(second, first);
  if (shape.info() != Eigen::Success) return std::nullopt;

  // Eigenvalues ascend; with z along the outward normal a convex patch has
  // negative second derivatives, so the largest curvature is -lambda_min.
  SurfaceFeature f;
  f.curvature = Eigen::Vector2d(-shape.eigenvalues()[0], -shape.eigenvalues()[1]);
  if (!f.curvature.allFinite()) return std::nullopt;

  Eigen::Vector3d t;
  if (std::abs(f.curvature[0] - f.curvature[1]) < kUmbilicTolerance) {
    t = umbilic_tangent(n, centroid - p, opt.radius);
  } else {
    const Eigen::Vector2d v = shape.eigenvectors().col(0);
    t = (v[0] * e1 + v[1] * e2).normalized();
    // Fix the eigenvector sign from the third moment of the neighbourhood along t.
    double m3 = 0.0, m3abs = 0.0;
    for (auto k : nbrs) {
      const double u = (cloud.points[k] - p).dot(t);
      m3 += u * u * u;
      m3abs += std::abs(u * u * u);
    }
    if (std::abs(m3) > 1e-9 * m3abs) {
      if (m3 < 0.0) t = -t;
    } else if (t.dot(Eigen::Vector3d::UnitX()) < 0.0) {
      t = -t;
    }
  }
  Eigen::Matrix3d R;
  R.col(0) = t;
  R.col(1) = n.cross(t);
  R.col(2) = n;
  f.frame = Pose(p, Eigen::Quaterniond(R));
  return f;
}

}  // namespace

FeatureExtraction extract_features(const PointCloud& cloud, const FeatureOptions& options) {
  if (cloud.size() < 10) throw std::invalid_argument("extract_features: need at least 10 points");
  if (!(options.radius > 0.0)) throw std::invalid_argument("extract_features: radius must be positive");
  const std::size_t min_nbrs = std::max<std::size_t>(options.min_neighbors, 5);

  const PointGrid grid(cloud.points, options.radius);
  FeatureExtraction out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto nbrs = grid.radius_search(cloud.points[i], options.radius);
    // The query point itself carries no information for the anchored fit.
    std::erase(nbrs, i);
    if (nbrs.size() < min_nbrs) {
      ++out.dropped;
      continue;
    }
    if (auto f = fit_feature(cloud, i, nbrs, options)) {
      out.features.push_back(*f);
      out.source.push_back(i);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

FeatureDensity::FeatureDensity(std::vector<SurfaceFeature> features, std::vector<double> weights,
                               Bandwidth bandwidth)
    : features_(std::move(features)), weights_(std::move(weights)), bandwidth_(bandwidth) {
  bandwidth_.validate();
  if (features_.empty()) throw std::invalid_argument("FeatureDensity: no features");
  if (weights_.empty()) weights_.assign(features_.size(), 1.0);
  if (weights_.size() != features_.size())
    throw std::invalid_argument("FeatureDensity: weight count differs from feature count");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("FeatureDensity: weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("FeatureDensity: all weights are zero");
  for (double& w : weights_) w /= total;
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

double FeatureDensity::evaluate(const SurfaceFeature& x) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < features_.size(); ++j)
    sum += weights_[j] * factored_kernel(x.frame, x.curvature, features_[j].frame, features_[j].curvature, bandwidth_);
  return sum;
}

SurfaceFeature FeatureDensity::sample(Rng& rng) const {
  const auto& mean = features_[sample_index(rng, cumulative_)];
  SurfaceFeature out;
  out.frame = compose(mean.frame, sample_pose_offset(rng, bandwidth_.sigma_p, bandwidth_.sigma_q));
  std::normal_distribution<double> normal(0.0, 1.0);
  out.curvature = mean.curvature;
  out.curvature[0] += bandwidth_.sigma_r[0] * normal(rng);
  out.curvature[1] += bandwidth_.sigma_r[1] * normal(rng);
  return out;
}

FeatureDensity build_density(std::vector<SurfaceFeature> features, const Bandwidth& bandwidth,
                             std::vector<double> weights) {
  return FeatureDensity(std::move(features), std::move(weights), bandwidth);
}

SurfaceFeature sample_density(const FeatureDensity& density, std::uint64_t seed) {
  Rng rng(seed);
  return density.sample(rng);
}

void write_features_csv(std::ostream& out, const std::vector<SurfaceFeature>& features) {
  out << "px,py,pz,qw,qx,qy,qz,r0,r1\n" << std::setprecision(17);
  for (const auto& f : features) {
    const auto& p = f.frame.position();
    const auto& q = f.frame.orientation();
    out << p.x() << ',' << p.y() << ',' << p.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ','
        << q.z() << ',' << f.curvature[0] << ',' << f.curvature[1] << '\n';
  }
}

}  // namespace rpgrasp

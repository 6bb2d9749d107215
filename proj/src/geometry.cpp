#include "rpgrasp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rpgrasp {

namespace {

// Above this concentration the vMF pair is sampled through its small-angle
// limit: with t = 1 - <q, mu>, the density of t tends to Gamma(3/2, kappa).
constexpr double kLargeKappa = 1e5;

}  // namespace

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  const Eigen::Vector4d c = q.coeffs();  // x y z w
  bool flip = false;
  if (c[3] < 0.0) {
    flip = true;
  } else if (c[3] == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (c[i] != 0.0) {
        flip = c[i] < 0.0;
        break;
      }
    }
  }
  if (!flip) return q;
  return Eigen::Quaterniond(-q.w(), -q.x(), -q.y(), -q.z());
}

Pose::Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) : p_(p) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("Pose: degenerate quaternion");
  q_ = canonical(Eigen::Quaterniond(q.coeffs() / n));
}

Pose Pose::from_stored(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) {
  if (!(std::abs(q.norm() - 1.0) <= 1e-9)) throw std::invalid_argument("Pose: stored quaternion is not unit-norm");
  if (canonical(q).coeffs() != q.coeffs()) throw std::invalid_argument("Pose: stored quaternion is not canonical");
  Pose out;
  out.p_ = p;
  out.q_ = q;
  return out;
}

Pose Pose::translation(double x, double y, double z) {
  return Pose(Eigen::Vector3d(x, y, z), Eigen::Quaterniond::Identity());
}

Pose Pose::translation(const Eigen::Vector3d& t) { return Pose(t, Eigen::Quaterniond::Identity()); }

Pose Pose::rotation(const Eigen::Vector3d& axis, double angle) {
  return Pose(Eigen::Vector3d::Zero(), Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  return Pose(m.topRightCorner<3, 1>(), Eigen::Quaterniond(r));
}

Pose Pose::from_rotation_vector(const Eigen::Vector3d& p, const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle == 0.0) return Pose(p, Eigen::Quaterniond::Identity());
  return Pose(p, Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle)));
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = p_;
  return m;
}

bool Pose::is_finite() const { return p_.allFinite() && q_.coeffs().allFinite(); }

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.position() + a.orientation() * b.position(), a.orientation() * b.orientation());
}

Pose inverse(const Pose& a) {
  const Eigen::Quaterniond qi = a.orientation().conjugate();
  return Pose(-(qi * a.position()), qi);
}

double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d);
}

void Bandwidth::validate() const {
  if (!(sigma_p > 0.0) || !(sigma_q > 0.0) || !(sigma_r[0] > 0.0) || !(sigma_r[1] > 0.0))
    throw std::invalid_argument("Bandwidth: all components must be strictly positive");
}

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  if (x.size() != mu.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  const double n = static_cast<double>(x.size());
  const double s2 = sigma * sigma;
  const double norm = std::pow(2.0 * std::numbers::pi * s2, -0.5 * n);
  return norm * std::exp(-0.5 * (x - mu).squaredNorm() / s2);
}

double descriptor_kernel(const Eigen::Vector2d& r, const Eigen::Vector2d& mu,
                         const Eigen::Vector2d& sigma) {
  double v = 1.0;
  for (int k = 0; k < 2; ++k) {
    const double z = (r[k] - mu[k]) / sigma[k];
    v *= std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma[k]);
  }
  return v;
}

double orientation_kernel_kappa(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                                double kappa) {
  const double d = q.dot(mu);
  // Swapping q -> -q swaps the two terms, so the antipodal pair is exactly symmetric.
  return 0.5 * (std::exp(kappa * (d - 1.0)) + std::exp(-kappa * (d + 1.0)));
}

double orientation_kernel(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu, double sigma_q) {
  if (!(sigma_q > 0.0)) throw std::invalid_argument("orientation_kernel: sigma_q must be positive");
  if (std::abs(q.norm() - 1.0) > 1e-6 || std::abs(mu.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("orientation_kernel: quaternions must be unit-norm");
  return orientation_kernel_kappa(q, mu, 1.0 / (sigma_q * sigma_q));
}

double pose_kernel(const Pose& x, const Pose& mu, const Bandwidth& bw) {
  return gaussian_kernel(x.position(), mu.position(), bw.sigma_p) *
         orientation_kernel_kappa(x.orientation(), mu.orientation(), bw.kappa());
}

double factored_kernel(const Pose& x, const Eigen::Vector2d& r, const Pose& mu,
                       const Eigen::Vector2d& mu_r, const Bandwidth& bw) {
  bw.validate();
  return gaussian_kernel(x.position(), mu.position(), bw.sigma_p) *
         orientation_kernel(x.orientation(), mu.orientation(), bw.sigma_q) *
         descriptor_kernel(r, mu_r, bw.sigma_r);
}

Eigen::Quaterniond sample_orientation_offset(Rng& rng, double kappa) {
  // Wood's rejection sampler for the vMF on S^3 (dimension 4, m - 1 = 3),
  // producing w = <q, identity>; the tangent direction is uniform on S^2.
  constexpr double m1 = 3.0;
  double w;
  if (kappa > kLargeKappa) {
    std::gamma_distribution<double> gamma(1.5, 1.0 / kappa);
    w = std::max(-1.0, 1.0 - gamma(rng));
  } else {
    const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);
    std::gamma_distribution<double> gamma(1.5, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;) {
      const double ga = gamma(rng);
      const double gb = gamma(rng);
      const double z = ga / (ga + gb);
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double u = uni(rng);
      if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector3d dir;
  do {
    dir = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
  } while (dir.squaredNorm() < 1e-24);
  dir.normalize();
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  return canonical(Eigen::Quaterniond(w, s * dir.x(), s * dir.y(), s * dir.z()));
}

Pose sample_pose_offset(Rng& rng, double sigma_p, double sigma_q) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Vector3d dp(sigma_p * normal(rng), sigma_p * normal(rng), sigma_p * normal(rng));
  return Pose(dp, sample_orientation_offset(rng, 1.0 / (sigma_q * sigma_q)));
}

std::size_t sample_index(Rng& rng, const std::vector<double>& cumulative) {
  if (cumulative.empty() || !(cumulative.back() > 0.0))
    throw std::invalid_argument("sample_index: weights must have a positive total");
  std::uniform_real_distribution<double> uni(0.0, cumulative.back());
  const double u = uni(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
  if (k >= cumulative.size()) k = cumulative.size() - 1;
  // Skip zero-weight entries that share the same cumulative value.
  while (k > 0 && cumulative[k] == cumulative[k - 1]) --k;
  return k;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  // FNV-1a over the stream name, mixed with splitmix64.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h ^ (index * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace rpgrasp

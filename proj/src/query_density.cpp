#include "rpgrasp/query_density.hpp"

#include "rpgrasp/error.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rpgrasp {

QueryDensity::QueryDensity(std::size_t link, int grasp_id, std::vector<QueryKernel> kernels, Bandwidth bandwidth,
                           double mass)
    : link_(link), grasp_id_(grasp_id), kernels_(std::move(kernels)), bandwidth_(bandwidth), mass_(mass) {
  if (kernels_.empty()) return;
  double total = 0.0;
  for (const auto& k : kernels_) {
    if (!(k.weight >= 0.0) || !k.pose.is_finite()) throw std::invalid_argument("QueryDensity: invalid kernel");
    total += k.weight;
  }
  if (!(total > 0.0)) throw std::invalid_argument("QueryDensity: all kernel weights are zero");
  cumulative_.reserve(kernels_.size());
  double run = 0.0;
  for (auto& k : kernels_) {
    k.weight /= total;
    run += k.weight;
    cumulative_.push_back(run);
    const auto& p = k.pose.position();
    const auto& q = k.pose.orientation();
    packed_.push_back({p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(), k.weight});
  }
}

double QueryDensity::evaluate(const Pose& s) const {
  if (packed_.empty()) return 0.0;
  // Same value as Σ w N3 Θ, folded into one exponential per kernel:
  // Θ = 0.5 exp(κ(|d| - 1)) (1 + exp(-2κ|d|)), and the last factor is exactly
  // 1 in double precision once 2κ|d| exceeds 40.
  const double kappa = bandwidth_.kappa();
  const double s2 = bandwidth_.sigma_p * bandwidth_.sigma_p;
  const double inv2s2 = 0.5 / s2;
  const double norm = std::pow(2.0 * std::numbers::pi * s2, -1.5);
  const auto& p = s.position();
  const auto& q = s.orientation();
  const double px = p.x(), py = p.y(), pz = p.z(), qw = q.w(), qx = q.x(), qy = q.y(), qz = q.z();
  double sum = 0.0;
  for (const auto& k : packed_) {
    const double dx = px - k[0], dy = py - k[1], dz = pz - k[2];
    const double d = std::abs(qw * k[3] + qx * k[4] + qy * k[5] + qz * k[6]);
    const double e = -(dx * dx + dy * dy + dz * dz) * inv2s2 + kappa * (d - 1.0);
    if (e < -746.0) continue;
    double v = std::exp(e);
    if (2.0 * kappa * d < 40.0) v *= 1.0 + std::exp(-2.0 * kappa * d);
    sum += k[7] * v;
  }
  return scale_ * 0.5 * norm * sum;
}

QueryDensity QueryDensity::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("QueryDensity::scaled: factor must be positive");
  QueryDensity out = *this;
  out.scale_ *= c;
  return out;
}

Pose QueryDensity::sample(Rng& rng) const {
  if (kernels_.empty()) throw std::invalid_argument("sample_query: empty density");
  const auto& k = kernels_[sample_index(rng, cumulative_)];
  return compose(k.pose, sample_pose_offset(rng, bandwidth_.sigma_p, bandwidth_.sigma_q));
}

QueryDensity build_query_density(const ContactModel& model, const FeatureDensity& test, std::size_t kernel_count,
                                 std::uint64_t seed) {
  if (model.empty()) return QueryDensity(model.link, model.grasp_id, {}, model.bandwidth, 0.0);
  if (kernel_count == 0) throw std::invalid_argument("build_query_density: kernel count must be positive");
  model.bandwidth.validate();

  Rng rng(seed);
  std::vector<double> prior(model.kernels.size());
  {
    double run = 0.0;
    for (std::size_t j = 0; j < model.kernels.size(); ++j) prior[j] = (run += model.kernels[j].weight);
  }
  std::vector<QueryKernel> kernels;
  kernels.reserve(kernel_count);
  std::vector<double> conditional(model.kernels.size());
  double raw_total = 0.0;
  for (std::size_t n = 0; n < kernel_count; ++n) {
    const SurfaceFeature v = test.sample(rng);
    double run = 0.0;
    for (std::size_t j = 0; j < model.kernels.size(); ++j) {
      const auto& k = model.kernels[j];
      run += k.weight * descriptor_kernel(v.curvature, k.curvature, model.bandwidth.sigma_r);
      conditional[j] = run;
    }
    // A descriptor that misses every kernel gets zero weight; its pose is drawn
    // from the unconditioned mixture only to keep the sample stream aligned.
    const std::size_t j = run > 0.0 ? sample_index(rng, conditional) : sample_index(rng, prior);
    const Pose u = compose(model.kernels[j].relative,
                           sample_pose_offset(rng, model.bandwidth.sigma_p, model.bandwidth.sigma_q));
    kernels.push_back({compose(v.frame, u), run});
    raw_total += run;
  }
  if (!(raw_total > 0.0))
    throw DataError("build_query_density: descriptor mismatch, link " + std::to_string(model.link) +
                    " has no support on the test cloud");
  return QueryDensity(model.link, model.grasp_id, std::move(kernels), model.bandwidth,
                      raw_total / static_cast<double>(kernel_count));
}

double eval_query(const QueryDensity& qd, const Pose& s) { return qd.evaluate(s); }

Pose sample_query(const QueryDensity& qd, std::uint64_t seed) {
  Rng rng(seed);
  return qd.sample(rng);
}

void write_query_csv(std::ostream& out, const QueryDensity& qd) {
  out << "px,py,pz,qw,qx,qy,qz,weight\n" << std::setprecision(17);
  for (const auto& k : qd.kernels()) {
    const auto& p = k.pose.position();
    const auto& q = k.pose.orientation();
    out << p.x() << ',' << p.y() << ',' << p.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ',' << q.z()
        << ',' << k.weight << '\n';
  }
}

}  // namespace rpgrasp

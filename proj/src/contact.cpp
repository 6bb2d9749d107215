#include "rpgrasp/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rpgrasp {

namespace {

struct Box {
  Eigen::Vector3d lo, hi;
};

Box capsule_box(const Capsule& c, const Pose& pose, double margin) {
  const Eigen::Vector3d a = pose.position();
  const Eigen::Vector3d b = pose.transform_point(Eigen::Vector3d(c.length, 0.0, 0.0));
  const Eigen::Vector3d pad = Eigen::Vector3d::Constant(c.radius + margin);
  return {a.cwiseMin(b) - pad, a.cwiseMax(b) + pad};
}

std::vector<Eigen::Vector3d> positions(const std::vector<SurfaceFeature>& features) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.frame.position());
  return out;
}

}  // namespace

double ContactModel::evaluate(const Pose& u, const Eigen::Vector2d& r) const {
  double sum = 0.0;
  for (const auto& k : kernels) sum += k.weight * factored_kernel(u, r, k.relative, k.curvature, bandwidth);
  return sum;
}

double ContactModel::descriptor_marginal(const Eigen::Vector2d& r) const {
  double sum = 0.0;
  for (const auto& k : kernels) sum += k.weight * descriptor_kernel(r, k.curvature, bandwidth.sigma_r);
  return sum;
}

void CollisionParams::validate() const {
  if (!(gamma > 0.0) || !(beta > 0.0)) throw std::invalid_argument("CollisionParams: gamma and beta must be positive");
}

Pose relative_pose(const Pose& link_pose, const Pose& feature_pose) {
  return compose(inverse(feature_pose), link_pose);
}

ContactModel learn_contact_model(const Demonstration& demo, const GripperSpec& spec, const ReceptiveField& field) {
  if (field.link >= kLinkCount) throw std::invalid_argument("learn_contact_model: link index out of range");
  const LinkPoses links = forward_kinematics(spec, demo.config);
  const Pose& s = links[field.link];
  const Capsule capsule = spec.capsule(field.link);

  ContactModel model;
  model.link = field.link;
  model.grasp_id = demo.grasp_id;
  model.bandwidth = demo.object.bandwidth();
  double total = 0.0;
  for (std::size_t j = 0; j < demo.object.size(); ++j) {
    const auto& f = demo.object.feature(j);
    const double w = demo.object.weight(j) * receptive_field_eval(field, capsule, s, f.frame);
    if (!(w > 0.0)) continue;
    model.kernels.push_back({relative_pose(s, f.frame), f.curvature, w});
    total += w;
  }
  for (auto& k : model.kernels) k.weight /= total;
  return model;
}

std::vector<ContactModel> learn_contact_models(const Demonstration& demo, const GripperSpec& spec,
                                               std::span<const ReceptiveField> fields) {
  std::vector<ContactModel> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(learn_contact_model(demo, spec, f));
  return out;
}

CloudCollider::CloudCollider(std::span<const Eigen::Vector3d> points, double cell) : grid_(points, cell) {}

double CollisionResult::total() const { return std::accumulate(per_link.begin(), per_link.end(), 0.0); }

CollisionResult collision_value(const CloudCollider& cloud, const GripperSpec& spec, const GripperConfig& cfg,
                                const CollisionParams& params) {
  params.validate();
  const LinkPoses links = forward_kinematics(spec, cfg);
  CollisionResult out;
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    const Capsule c = spec.capsule(i);
    const Box box = capsule_box(c, links[i], 0.0);
    double w = 0.0;
    cloud.grid().for_each_in_box(box.lo, box.hi, [&](std::size_t k) {
      const double sd = capsule_signed_distance(c, links[i], cloud.grid().point(k));
      if (sd < 0.0) w += std::expm1(params.beta * sd * sd);
    });
    out.per_link[i] = w;
  }
  out.log_value = -params.gamma * out.total();
  out.value = std::exp(out.log_value);
  return out;
}

CollisionResult collision_value(std::span<const Eigen::Vector3d> points, const GripperSpec& spec,
                                const GripperConfig& cfg, const CollisionParams& params) {
  return collision_value(CloudCollider(points), spec, cfg, params);
}

FeatureIndex::FeatureIndex(const std::vector<SurfaceFeature>& features, std::vector<double> weights, double cell)
    : weights_(std::move(weights)) {
  if (weights_.size() != features.size()) throw std::invalid_argument("FeatureIndex: weight count mismatch");
  const auto pos = positions(features);
  grid_ = PointGrid(pos, cell);
}

double contact_mass(const FeatureIndex& features, const GripperSpec& spec, const GripperConfig& cfg,
                    std::span<const ReceptiveField> fields) {
  const LinkPoses links = forward_kinematics(spec, cfg);
  double mass = 0.0;
  for (const auto& field : fields) {
    const Capsule c = spec.capsule(field.link);
    const Pose& s = links[field.link];
    const Box box = capsule_box(c, s, field.cutoff);
    features.grid().for_each_in_box(box.lo, box.hi, [&](std::size_t j) {
      const double d = capsule_signed_distance(c, s, features.grid().point(j));
      mass += features.weight(j) * field.weight_at_distance(d);
    });
  }
  return mass;
}

double contact_mass(const FeatureDensity& object, const GripperSpec& spec, const GripperConfig& cfg,
                    std::span<const ReceptiveField> fields) {
  return contact_mass(FeatureIndex(object.features(), object.weights()), spec, cfg, fields);
}

KinaestheticResult kinaesthetic_optimize(const Demonstration& demo, const GripperSpec& spec,
                                         std::span<const ReceptiveField> fields, const CollisionParams& params,
                                         const KinaestheticOptions& options) {
  params.validate();
  if (!(options.zeta > 0.0)) throw std::invalid_argument("kinaesthetic_optimize: zeta must be positive");

  const FeatureIndex index(demo.object.features(), demo.object.weights());
  const auto cloud_points = positions(demo.object.features());
  const CloudCollider collider(cloud_points);

  const GripperConfig& h0 = demo.config;
  const double mass0 = contact_mass(index, spec, h0, fields);
  const double coll0 = collision_value(collider, spec, h0, params).total();
  const double mass_scale = mass0 > 0.0 ? mass0 : 1.0;
  const double coll_scale = coll0 > 0.0 ? coll0 : 1.0;

  KinaestheticResult result;
  result.config = h0;
  result.mass_initial = result.mass_final = mass0;
  result.collision_initial = result.collision_final = coll0;
  result.objective_initial = result.objective_final = mass0 / mass_scale - options.zeta * coll0 / coll_scale;
  result.evaluations = 1;

  // Search vector: [world translation (3), world rotation vector (3), joints (14)].
  constexpr int kDims = 6 + static_cast<int>(kJointCount);
  std::array<double, kDims> eps{};
  for (int d = 0; d < 3; ++d) eps[d] = std::max(0.0, options.eps_position);
  for (int d = 3; d < 6; ++d) eps[d] = std::max(0.0, options.eps_orientation);
  for (std::size_t j = 0; j < kJointCount; ++j) eps[6 + j] = std::max(0.0, options.eps_joints[j]);

  std::array<double, kDims> lo{}, hi{};
  for (int d = 0; d < 6; ++d) {
    lo[d] = -eps[d];
    hi[d] = eps[d];
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const auto lim = spec.limits(j);
    lo[6 + j] = std::max(-eps[6 + j], lim.lower - h0.joints[j]);
    hi[6 + j] = std::min(eps[6 + j], lim.upper - h0.joints[j]);
  }

  std::vector<int> active;
  for (int d = 0; d < kDims; ++d)
    if (hi[d] > lo[d]) active.push_back(d);
  if (active.empty() || options.budget <= 1) return result;

  auto to_config = [&](const std::array<double, kDims>& x) {
    GripperConfig cfg;
    Eigen::Vector3d rot(x[3], x[4], x[5]);
    const double n = rot.norm();
    if (n > options.eps_orientation && n > 0.0) rot *= options.eps_orientation / n;
    const Pose delta = Pose::from_rotation_vector(Eigen::Vector3d::Zero(), rot);
    cfg.wrist = Pose(h0.wrist.position() + Eigen::Vector3d(x[0], x[1], x[2]),
                     delta.orientation() * h0.wrist.orientation());
    for (std::size_t j = 0; j < kJointCount; ++j) cfg.joints[j] = spec.limits(j).clamp(h0.joints[j] + x[6 + j]);
    return cfg;
  };
  auto objective = [&](const GripperConfig& cfg, double& mass, double& coll) {
    mass = contact_mass(index, spec, cfg, fields);
    coll = collision_value(collider, spec, cfg, params).total();
    return mass / mass_scale - options.zeta * coll / coll_scale;
  };

  std::array<double, kDims> x{};
  std::array<double, kDims> step{};
  // Penetrations are millimetres deep, so the search opens with steps of an
  // eighth of the box; half-box first moves tend to trade away contact mass.
  for (int d : active) step[d] = 0.125 * std::max(std::abs(lo[d]), std::abs(hi[d]));
  double best = result.objective_initial;
  Rng rng(options.seed);
  std::vector<int> order = active;

  while (result.evaluations < options.budget) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (int d : order) {
      for (double sign : {1.0, -1.0}) {
        if (result.evaluations >= options.budget) break;
        auto trial = x;
        trial[d] = std::clamp(x[d] + sign * step[d], lo[d], hi[d]);
        if (trial[d] == x[d]) continue;
        const GripperConfig cfg = to_config(trial);
        double mass = 0.0, coll = 0.0;
        const double j = objective(cfg, mass, coll);
        ++result.evaluations;
        if (j > best) {
          best = j;
          x = trial;
          result.config = cfg;
          result.mass_final = mass;
          result.collision_final = coll;
          result.objective_final = j;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool any = false;
      for (int d : active) {
        step[d] *= 0.5;
        any = any || step[d] > 1e-7 * eps[d];
      }
      if (!any) break;
    }
  }
  return result;
}

}  // namespace rpgrasp

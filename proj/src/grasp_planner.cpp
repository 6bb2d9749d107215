#include "rpgrasp/grasp_planner.hpp"

#include "rpgrasp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rpgrasp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_1d(double x, double mu, double sigma) {
  if (sigma == 0.0) return x == mu ? 0.0 : kNegInf;
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

bool usable(const std::vector<QueryDensity>& links) {
  return std::any_of(links.begin(), links.end(), [](const QueryDensity& q) { return !q.empty() && q.mass() > 0.0; });
}

// Applies a wrist-frame perturbation: translation t, then rotation vector w
// about the pivot c, all expressed in the current wrist frame.
Pose perturb_wrist(const Pose& wrist, const Eigen::Vector3d& t, const Eigen::Vector3d& w, const Eigen::Vector3d& c) {
  const Pose rot = Pose::from_rotation_vector(Eigen::Vector3d::Zero(), w);
  return compose(wrist, Pose(t + c - rot.rotate(c), rot.orientation()));
}

// Centroid of the link origins in the wrist frame: rotating about it keeps the
// fingers roughly in place instead of swinging them around the palm.
Eigen::Vector3d grasp_centre(const GripperSpec& spec, const JointVector& joints) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& l : link_chain(spec, joints)) c += l.position();
  return c / static_cast<double>(kLinkCount);
}

}  // namespace

double ConfigurationModel::log_evaluate(const JointVector& joints) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j) sum += log_normal_1d(joints[j], mean[j], scale[j]);
  return sum;
}

double ConfigurationModel::evaluate(const JointVector& joints) const { return std::exp(log_evaluate(joints)); }

JointVector ConfigurationModel::sample(Rng& rng, const GripperSpec& spec) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  JointVector out;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const double z = normal(rng);
    out[j] = spec.limits(j).clamp(mean[j] + scale[j] * z);
  }
  return out;
}

double eval_config_model(const ConfigurationModel& cm, std::span<const double> joints) {
  if (joints.size() != kJointCount)
    throw std::invalid_argument("eval_config_model: expected 14 joint values, got " + std::to_string(joints.size()));
  JointVector v;
  for (std::size_t j = 0; j < kJointCount; ++j) v[j] = joints[j];
  return cm.evaluate(v);
}

void TrainedGraspSet::validate() const {
  if (grasps.empty()) throw DataError("trained grasp set is empty");
  for (const auto& g : grasps) {
    if (g.contacts.size() != kLinkCount)
      throw DataError("grasp " + std::to_string(g.grasp_id) + ": expected 15 contact models");
    if (std::all_of(g.contacts.begin(), g.contacts.end(), [](const ContactModel& m) { return m.empty(); }))
      throw DataError("grasp " + std::to_string(g.grasp_id) + " has no non-empty contact model");
    if ((g.config_model.scale.array() < 0.0).any() || !g.config_model.scale.allFinite())
      throw DataError("grasp " + std::to_string(g.grasp_id) + ": invalid configuration spread");
  }
  for (std::size_t a = 0; a < grasps.size(); ++a)
    for (std::size_t b = a + 1; b < grasps.size(); ++b)
      if (grasps[a].grasp_id == grasps[b].grasp_id)
        throw DataError("duplicate grasp id " + std::to_string(grasps[a].grasp_id));
}

std::optional<std::size_t> TrainedGraspSet::find(int grasp_id) const {
  for (std::size_t g = 0; g < grasps.size(); ++g)
    if (grasps[g].grasp_id == grasp_id) return g;
  return std::nullopt;
}

QuerySet build_queries(const TrainedGraspSet& ts, const FeatureDensity& test, std::size_t kernel_count,
                       std::uint64_t seed) {
  QuerySet out(ts.grasps.size());
  for (std::size_t g = 0; g < ts.grasps.size(); ++g) {
    std::vector<QueryDensity> links;
    links.reserve(kLinkCount);
    try {
      for (std::size_t i = 0; i < ts.grasps[g].contacts.size(); ++i)
        links.push_back(build_query_density(ts.grasps[g].contacts[i], test, kernel_count,
                                            derive_seed(seed, "query", g * kLinkCount + i)));
    } catch (const DataError&) {
      // A link with no support on this cloud makes the whole grasp unusable;
      // an empty link list marks that.
      links.clear();
    }
    out[g] = std::move(links);
  }
  return out;
}

GraspScorer::GraspScorer(const TrainedGraspSet& ts, const QuerySet& queries, const CloudCollider& cloud,
                         CollisionParams params)
    : ts_(ts), queries_(queries), cloud_(cloud), params_(params) {
  params_.validate();
  if (queries_.size() != ts_.grasps.size()) throw std::invalid_argument("GraspScorer: query set does not match grasps");
}

ScoreBreakdown GraspScorer::breakdown(int grasp_id, const GripperConfig& cfg) const {
  const auto g = ts_.find(grasp_id);
  if (!g) throw std::invalid_argument("GraspScorer: unknown grasp id " + std::to_string(grasp_id));
  ScoreBreakdown out;
  const auto& links = queries_[*g];
  if (links.empty()) {
    out.total = kNegInf;
    return out;
  }
  out.log_config = ts_.grasps[*g].config_model.log_evaluate(cfg.joints);
  out.log_collision = collision_value(cloud_, ts_.spec, cfg, params_).log_value;
  const LinkPoses poses = forward_kinematics(ts_.spec, cfg);
  double total = out.log_config + out.log_collision;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].empty()) continue;
    const double q = links[i].evaluate(poses[i]);
    out.log_query[i] = q > 0.0 ? std::log(q) : kNegInf;
    total += out.log_query[i];
  }
  out.total = std::isnan(total) ? kNegInf : total;
  return out;
}

double GraspScorer::operator()(int grasp_id, const GripperConfig& cfg) const { return breakdown(grasp_id, cfg).total; }

double score_grasp(const GraspScorer& scorer, const GraspHypothesis& h) { return scorer(h.grasp_id, h.config); }

GraspHypothesis seed_grasp(const TrainedGraspSet& ts, const QuerySet& queries, std::uint64_t seed) {
  if (queries.size() != ts.grasps.size()) throw std::invalid_argument("seed_grasp: query set does not match grasps");
  std::vector<std::size_t> candidates;
  for (std::size_t g = 0; g < queries.size(); ++g)
    if (usable(queries[g])) candidates.push_back(g);
  if (candidates.empty()) throw DataError("seed_grasp: no trained grasp has support on the test cloud");

  Rng rng(seed);
  const std::size_t g = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  const auto& links = queries[g];
  std::vector<double> cumulative(links.size());
  double run = 0.0;
  for (std::size_t i = 0; i < links.size(); ++i) cumulative[i] = (run += links[i].empty() ? 0.0 : links[i].mass());
  const std::size_t i = sample_index(rng, cumulative);

  const Pose s = links[i].sample(rng);
  const TrainedGrasp& grasp = ts.grasps[g];
  GraspHypothesis h;
  h.grasp_id = grasp.grasp_id;
  h.seed_link = i;
  h.config.joints = grasp.config_model.sample(rng, ts.spec);
  const LinkPoses chain = link_chain(ts.spec, h.config.joints);
  h.config.wrist = compose(s, inverse(chain[i]));
  return h;
}

GraspHypothesis optimize_grasp(const GraspHypothesis& initial, const GraspScorer& scorer, const GripperSpec& spec,
                               const OptimizerOptions& options, std::uint64_t seed) {
  GraspHypothesis best = initial;
  best.log_score = score_grasp(scorer, initial);
  if (options.budget == 0) return best;

  std::array<double, kSearchDims> step{};
  for (std::size_t d = 0; d < 3; ++d) step[d] = options.step_position;
  for (std::size_t d = 3; d < 6; ++d) step[d] = options.step_orientation;
  for (std::size_t d = 6; d < kSearchDims; ++d) step[d] = options.step_joint;

  // Blocks perturbed together: wrist translation, wrist rotation, one per finger.
  std::vector<std::vector<std::size_t>> blocks;
  auto add_block = [&](std::vector<std::size_t> dims) {
    std::erase_if(dims, [&](std::size_t d) { return !options.active[d] || !(step[d] > 0.0); });
    if (!dims.empty()) blocks.push_back(std::move(dims));
  };
  add_block({0, 1, 2});
  add_block({3, 4, 5});
  for (std::size_t f = 0; f < kFingerCount; ++f) {
    std::vector<std::size_t> dims;
    if (auto rp = GripperSpec::rp_joint(f)) dims.push_back(6 + *rp);
    for (std::size_t k = 0; k < kActivePerFinger; ++k) dims.push_back(6 + GripperSpec::active_joint(f, k));
    add_block(std::move(dims));
  }
  if (blocks.empty()) return best;

  auto apply = [&](const GripperConfig& base, const std::array<double, kSearchDims>& delta) {
    GripperConfig cfg;
    cfg.wrist = perturb_wrist(base.wrist, Eigen::Vector3d(delta[0], delta[1], delta[2]),
                              Eigen::Vector3d(delta[3], delta[4], delta[5]),
                              options.pivot_at_grasp ? grasp_centre(spec, base.joints) : Eigen::Vector3d::Zero());
    for (std::size_t j = 0; j < kJointCount; ++j) cfg.joints[j] = spec.limits(j).clamp(base.joints[j] + delta[6 + j]);
    if (options.project_coupling) cfg.joints = project_coupling(spec, cfg.joints);
    return cfg;
  };

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double polish = std::clamp(options.polish_fraction, 0.0, 1.0);
  const auto anneal_budget = static_cast<std::size_t>(std::llround((1.0 - polish) * static_cast<double>(options.budget)));
  const double t0 = options.temperature_initial;
  const double t1 = std::min(options.temperature_final, t0);
  const double final_fraction = std::clamp(options.final_step_fraction, 1e-9, 1.0);

  GripperConfig current = best.config;
  double current_score = best.log_score;
  std::size_t used = 0;
  for (; used < anneal_budget; ++used) {
    const double frac = anneal_budget > 1 ? static_cast<double>(used) / static_cast<double>(anneal_budget - 1) : 1.0;
    const double shrink = std::pow(final_fraction, frac);
    const double temperature = t0 > 0.0 ? t0 * std::pow(t1 / t0, frac) : 0.0;
    const auto& block = blocks[std::uniform_int_distribution<std::size_t>(0, blocks.size() - 1)(rng)];
    std::array<double, kSearchDims> delta{};
    for (std::size_t d : block) delta[d] = shrink * step[d] * normal(rng);
    const GripperConfig trial = apply(current, delta);
    const double score = scorer(best.grasp_id, trial);
    const double u = unit(rng);
    bool accept = score >= current_score;
    if (!accept && std::isfinite(score) && temperature > 0.0) accept = u < std::exp((score - current_score) / temperature);
    if (!accept) continue;
    current = trial;
    current_score = score;
    if (score > best.log_score) {
      best.config = trial;
      best.log_score = score;
    }
  }

  // Greedy coordinate polish around the best point with halving steps.
  std::vector<std::size_t> dims;
  for (const auto& b : blocks) dims.insert(dims.end(), b.begin(), b.end());
  std::array<double, kSearchDims> polish_step{};
  for (std::size_t d : dims) polish_step[d] = step[d] * final_fraction;
  while (used < options.budget) {
    bool improved = false;
    for (std::size_t d : dims) {
      for (double sign : {1.0, -1.0}) {
        if (used >= options.budget) break;
        std::array<double, kSearchDims> delta{};
        delta[d] = sign * polish_step[d];
        const GripperConfig trial = apply(best.config, delta);
        const double score = scorer(best.grasp_id, trial);
        ++used;
        if (score > best.log_score) {
          best.config = trial;
          best.log_score = score;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool any = false;
      for (std::size_t d : dims) {
        polish_step[d] *= 0.5;
        any = any || polish_step[d] > 1e-9 * step[d];
      }
      if (!any) break;
    }
  }
  return best;
}

void check_feasibility(GraspHypothesis& h, const GripperSpec& spec, const std::vector<HalfSpace>& obstacles) {
  auto reject = [&](std::string reason) {
    h.feasibility = Feasibility::Infeasible;
    h.reason = std::move(reason);
  };
  if (!std::isfinite(h.log_score)) return reject("zero likelihood");
  if (!h.config.wrist.is_finite()) return reject("non-finite wrist pose");
  for (std::size_t j = 0; j < kJointCount; ++j)
    if (!spec.limits(j).contains(h.config.joints[j])) return reject("joint " + std::to_string(j) + " outside limits");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const HalfSpace& o = obstacles[k];
    if (o.normal.dot(h.config.wrist.position()) < o.offset)
      return reject("wrist inside obstacle " + std::to_string(k));
  }
  h.feasibility = Feasibility::Feasible;
}

namespace {

void check_links(GraspHypothesis& h, const GripperSpec& spec, const std::vector<HalfSpace>& obstacles) {
  if (h.feasibility != Feasibility::Feasible || obstacles.empty()) return;
  const LinkPoses links = forward_kinematics(spec, h.config);
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    const Capsule c = spec.capsule(i);
    const Eigen::Vector3d a = links[i].position();
    const Eigen::Vector3d b = links[i].transform_point(Eigen::Vector3d(c.length, 0.0, 0.0));
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const HalfSpace& o = obstacles[k];
      const double n = o.normal.norm();
      const double clearance = std::min(o.normal.dot(a), o.normal.dot(b)) - o.offset - c.radius * n;
      if (clearance < 0.0) {
        h.feasibility = Feasibility::Infeasible;
        h.reason = "link " + std::to_string(i) + " inside obstacle " + std::to_string(k);
        return;
      }
    }
  }
}

}  // namespace

PlanResult plan_grasps(const GraspScorer& scorer, const PlanOptions& options, std::uint64_t seed) {
  const TrainedGraspSet& ts = scorer.grasps();
  std::vector<GraspHypothesis> all;
  all.reserve(options.candidates);
  for (std::size_t c = 0; c < options.candidates; ++c) {
    GraspHypothesis h;
    const std::size_t attempts = std::max<std::size_t>(1, options.seed_attempts);
    for (std::size_t a = 0; a < attempts; ++a) {
      h = seed_grasp(ts, scorer.queries(), derive_seed(seed, "seed", c * attempts + a));
      h.log_score = score_grasp(scorer, h);
      if (std::isfinite(h.log_score)) break;
    }
    h.candidate = c;
    if (std::isfinite(h.log_score)) h = optimize_grasp(h, scorer, ts.spec, options.optimizer, derive_seed(seed, "optimize", c));
    h.candidate = c;
    check_feasibility(h, ts.spec, options.obstacles);
    if (options.check_links) check_links(h, ts.spec, options.obstacles);
    all.push_back(std::move(h));
  }

  PlanResult out;
  for (auto& h : all) (h.feasibility == Feasibility::Feasible ? out.ranked : out.rejected).push_back(std::move(h));
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const GraspHypothesis& a, const GraspHypothesis& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    if (a.grasp_id != b.grasp_id) return a.grasp_id < b.grasp_id;
    if (a.seed_link != b.seed_link) return a.seed_link < b.seed_link;
    return a.candidate < b.candidate;
  });
  return out;
}

PlanningScene::PlanningScene(const TrainedGraspSet& ts, const PointCloud& cloud, const SceneOptions& options,
                             std::uint64_t seed)
    : extraction_(extract_features(cloud, options.features)),
      density_([&] {
        if (extraction_.features.empty()) throw DataError("test cloud produced no surface features");
        return FeatureDensity(extraction_.features, {}, options.bandwidth);
      }()),
      queries_(build_queries(ts, density_, options.query_kernels, derive_seed(seed, "queries"))),
      collider_(cloud.points),
      scorer_(ts, queries_, collider_, options.collision) {
  if (std::none_of(queries_.begin(), queries_.end(), usable))
    throw DataError("no trained grasp has support on the test cloud (descriptor mismatch)");
}

PlanResult plan_grasps(const TrainedGraspSet& ts, const PointCloud& test, const PlanOptions& options,
                       std::uint64_t seed, const SceneOptions& scene) {
  ts.validate();
  const PlanningScene prepared(ts, test, scene, seed);
  return plan_grasps(prepared.scorer(), options, seed);
}

}  // namespace rpgrasp

#pragma once

#include "rpgrasp/contact.hpp"
#include "rpgrasp/query_density.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rpgrasp {

/// Product of per-joint Gaussians around the demonstrated joint configuration.
/// A zero scale pins that joint to the mean.
struct ConfigurationModel {
  int grasp_id = 0;
  JointVector mean = JointVector::Zero();
  JointVector scale = JointVector::Constant(0.1);

  double log_evaluate(const JointVector& joints) const;
  double evaluate(const JointVector& joints) const;
  /// Draw clamped to the gripper's joint limits.
  JointVector sample(Rng& rng, const GripperSpec& spec) const;
};

/// Throws std::invalid_argument unless joints has 14 entries.
double eval_config_model(const ConfigurationModel& cm, std::span<const double> joints);

enum class Feasibility { Untested, Feasible, Infeasible };

struct GraspHypothesis {
  GripperConfig config;
  double log_score = -std::numeric_limits<double>::infinity();
  int grasp_id = 0;              ///< trained grasp g
  std::size_t seed_link = 0;     ///< link i whose query density seeded the hypothesis
  std::size_t candidate = 0;     ///< seed order within a planning run
  Feasibility feasibility = Feasibility::Untested;
  std::string reason;            ///< why it was rejected, when infeasible
};

struct TrainedGrasp {
  int grasp_id = 0;
  std::string label;
  std::vector<ContactModel> contacts;  ///< one per link, possibly empty
  ConfigurationModel config_model;
  GripperConfig demonstrated;
  /// Contact mass and Σ W_i at the demonstration, before and after contact optimization.
  double mass_before = 0.0;
  double mass_after = 0.0;
  double collision_before = 0.0;
  double collision_after = 0.0;
  bool optimized = false;
};

struct TrainedGraspSet {
  GripperSpec spec = GripperSpec::defaults();
  std::vector<TrainedGrasp> grasps;

  /// Throws DataError unless there is at least one grasp and each has a
  /// non-empty contact model.
  void validate() const;
  std::optional<std::size_t> find(int grasp_id) const;
};

/// Query densities indexed [grasp position in the set][link].
using QuerySet = std::vector<std::vector<QueryDensity>>;

QuerySet build_queries(const TrainedGraspSet& ts, const FeatureDensity& test, std::size_t kernel_count,
                       std::uint64_t seed);

struct ScoreBreakdown {
  double log_config = 0.0;
  double log_collision = 0.0;
  std::array<double, kLinkCount> log_query{};  ///< 0 for skipped (empty) densities
  double total = 0.0;
};

/// log C^g(h_c) + log W(h) + Σ_i log Q_i^g(k_i(h)); empty densities are skipped
/// and any zero factor yields -inf.
class GraspScorer {
 public:
  GraspScorer(const TrainedGraspSet& ts, const QuerySet& queries, const CloudCollider& cloud,
              CollisionParams params);

  double operator()(int grasp_id, const GripperConfig& cfg) const;
  ScoreBreakdown breakdown(int grasp_id, const GripperConfig& cfg) const;
  const TrainedGraspSet& grasps() const { return ts_; }
  const QuerySet& queries() const { return queries_; }

 private:
  const TrainedGraspSet& ts_;
  const QuerySet& queries_;
  const CloudCollider& cloud_;
  CollisionParams params_;
};

double score_grasp(const GraspScorer& scorer, const GraspHypothesis& h);

/// g uniform over grasps with usable densities, link ∝ query mass, link pose
/// from that density, joints from C^g, wrist solved through the kinematic chain.
/// Throws DataError when no grasp has a usable query density.
GraspHypothesis seed_grasp(const TrainedGraspSet& ts, const QuerySet& queries, std::uint64_t seed);

/// Search dimensions, in order: wrist translation (3, wrist frame), wrist
/// rotation vector (3, wrist frame, about the pivot), joints (14).
inline constexpr std::size_t kSearchDims = 6 + kJointCount;

struct OptimizerOptions {
  std::size_t budget = 2000;
  double step_position = 0.01;
  double step_orientation = 0.1;
  double step_joint = 0.1;
  /// Step sizes decay geometrically to this fraction of their initial value.
  double final_step_fraction = 0.02;
  double temperature_initial = 1.0;
  double temperature_final = 0.01;
  /// Fraction of the budget spent on a greedy coordinate polish of the best point.
  double polish_fraction = 0.2;
  bool project_coupling = false;
  /// Rotate about the centroid of the links instead of the wrist origin.
  bool pivot_at_grasp = true;
  std::array<bool, kSearchDims> active = [] {
    std::array<bool, kSearchDims> a{};
    a.fill(true);
    return a;
  }();
};

/// Simulated-annealing local search followed by a coordinate polish. Returns the
/// best configuration visited (never scoring below the input).
GraspHypothesis optimize_grasp(const GraspHypothesis& initial, const GraspScorer& scorer,
                               const GripperSpec& spec, const OptimizerOptions& options, std::uint64_t seed);

/// Obstacle half-space: points with normal·x < offset are inside the obstacle.
struct HalfSpace {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
};

struct PlanOptions {
  std::size_t candidates = 100;
  /// Re-seeds per candidate until the initial score is finite.
  std::size_t seed_attempts = 20;
  OptimizerOptions optimizer;
  std::vector<HalfSpace> obstacles;
  /// Also test every link capsule against the obstacles, not just the wrist.
  bool check_links = true;
};

struct PlanResult {
  std::vector<GraspHypothesis> ranked;    ///< feasible, best first
  std::vector<GraspHypothesis> rejected;  ///< infeasible, candidate order
};

/// Marks the hypothesis Feasible or Infeasible (joint limits, wrist and link
/// capsules against the obstacle half-spaces, non-finite score).
void check_feasibility(GraspHypothesis& h, const GripperSpec& spec, const std::vector<HalfSpace>& obstacles);

PlanResult plan_grasps(const GraspScorer& scorer, const PlanOptions& options, std::uint64_t seed);

struct SceneOptions {
  FeatureOptions features;
  Bandwidth bandwidth;
  std::size_t query_kernels = 500;
  CollisionParams collision;
};

/// Everything derived from a test cloud that the planner needs: features,
/// their density, query densities and the collision grid.
class PlanningScene {
 public:
  /// Throws DataError if the cloud yields no features or no grasp has support on it.
  PlanningScene(const TrainedGraspSet& ts, const PointCloud& cloud, const SceneOptions& options, std::uint64_t seed);
  PlanningScene(const PlanningScene&) = delete;
  PlanningScene& operator=(const PlanningScene&) = delete;

  const FeatureExtraction& features() const { return extraction_; }
  const FeatureDensity& density() const { return density_; }
  const QuerySet& queries() const { return queries_; }
  const GraspScorer& scorer() const { return scorer_; }

 private:
  FeatureExtraction extraction_;
  FeatureDensity density_;
  QuerySet queries_;
  CloudCollider collider_;
  GraspScorer scorer_;
};

PlanResult plan_grasps(const TrainedGraspSet& ts, const PointCloud& test, const PlanOptions& options,
                       std::uint64_t seed, const SceneOptions& scene = {});

}  // namespace rpgrasp

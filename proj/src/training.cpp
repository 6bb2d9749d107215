#include "rpgrasp/training.hpp"

#include "rpgrasp/error.hpp"

namespace rpgrasp {

TrainedGrasp train_grasp(int grasp_id, const std::string& label, const PointCloud& cloud,
                         const GripperConfig& config, const GripperSpec& spec, const TrainOptions& options,
                         std::uint64_t seed) {
  if (!spec.within_limits(config.joints))
    throw DataError("demonstration " + std::to_string(grasp_id) + ": joints outside the gripper's limits");
  FeatureExtraction ex = extract_features(cloud, options.features);
  if (ex.features.empty()) throw DataError("demonstration " + std::to_string(grasp_id) + ": no surface features");

  Demonstration demo{grasp_id, label, FeatureDensity(std::move(ex.features), {}, options.bandwidth), config};
  const auto fields = default_receptive_fields(options.field_cutoff, options.field_scale);

  TrainedGrasp g;
  g.grasp_id = grasp_id;
  g.label = label;
  g.demonstrated = config;

  GripperConfig learned = config;
  if (options.optimize_contacts) {
    KinaestheticOptions ko = options.kinaesthetic;
    ko.seed = derive_seed(seed, "train", static_cast<std::uint64_t>(grasp_id));
    const KinaestheticResult r = kinaesthetic_optimize(demo, spec, fields, options.collision, ko);
    learned = r.config;
    g.optimized = true;
    g.mass_before = r.mass_initial;
    g.mass_after = r.mass_final;
    g.collision_before = r.collision_initial;
    g.collision_after = r.collision_final;
  } else {
    std::vector<Eigen::Vector3d> points;
    points.reserve(demo.object.size());
    for (const auto& f : demo.object.features()) points.push_back(f.frame.position());
    g.mass_before = g.mass_after = contact_mass(demo.object, spec, config, fields);
    g.collision_before = g.collision_after = collision_value(points, spec, config, options.collision).total();
  }

  demo.config = learned;
  g.contacts = learn_contact_models(demo, spec, fields);
  for (auto& m : g.contacts) m.grasp_id = grasp_id;
  g.config_model.grasp_id = grasp_id;
  g.config_model.mean = learned.joints;
  g.config_model.scale = JointVector::Constant(options.config_scale);
  return g;
}

}  // namespace rpgrasp

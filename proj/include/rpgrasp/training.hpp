#pragma once

#include "rpgrasp/grasp_planner.hpp"

namespace rpgrasp {

struct TrainOptions {
  FeatureOptions features;
  Bandwidth bandwidth;
  double field_cutoff = 0.03;
  double field_scale = 0.01;
  /// Standard deviation of every joint in the configuration model.
  double config_scale = 0.1;
  CollisionParams collision;
  bool optimize_contacts = false;
  /// Its seed field is ignored; train_grasp derives one.
  KinaestheticOptions kinaesthetic;
};

/// Learns the contact and configuration models of one demonstration.
///
/// With optimize_contacts the demonstrated configuration is first refined by
/// kinaesthetic_optimize and the models are learned at the refined
/// configuration; `demonstrated` always keeps the input. The before/after
/// statistics are measured against the training features either way.
/// Throws DataError if the cloud yields no features or the configuration is
/// outside the gripper's joint limits.
TrainedGrasp train_grasp(int grasp_id, const std::string& label, const PointCloud& cloud,
                         const GripperConfig& config, const GripperSpec& spec, const TrainOptions& options,
                         std::uint64_t seed);

}  // namespace rpgrasp

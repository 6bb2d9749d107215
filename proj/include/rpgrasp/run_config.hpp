#pragma once

#include "rpgrasp/archive.hpp"
#include "rpgrasp/training.hpp"

#include <optional>

namespace rpgrasp {

/// Environment variable naming the default configuration file.
inline constexpr const char* kConfigEnv = "RPGRASP_CONFIG";

/// Every tunable used by the command-line workflows.
struct RunConfig {
  GripperSpec gripper = GripperSpec::defaults();
  TrainOptions train;
  SceneOptions scene;
  PlanOptions plan;
  double reconfig_delta = 0.02;
};

Json to_json(const RunConfig& config);
/// Overlays `patch` on the defaults. Keys must exist in the default layout, so
/// typos are reported instead of silently ignored. Throws DataError.
RunConfig run_config_from_json(const Json& patch);
/// Loads `path` if given, else the file named by RPGRASP_CONFIG, else defaults.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path = std::nullopt);

}  // namespace rpgrasp

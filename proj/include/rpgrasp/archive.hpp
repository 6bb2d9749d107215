#pragma once

#include "rpgrasp/calibration.hpp"
#include "rpgrasp/grasp_planner.hpp"
#include "rpgrasp/reconfig.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace rpgrasp {

using Json = nlohmann::json;

inline constexpr int kArchiveVersion = 1;

struct SensorCalibration {
  LinearSensorModel model;
  Pose joint_to_tracker;
  double residual = 0.0;
};

/// Everything `train` produces and `infer` / `plan-reconfig` consume.
struct ModelArchive {
  int version = kArchiveVersion;
  TrainedGraspSet grasps;
  std::optional<SensorCalibration> sensor;
  TrajectoryLibrary trajectories;
  /// Free-form record of the settings used to build the archive.
  Json metadata = Json::object();
};

// JSON codecs. Decoders throw DataError naming the offending field.
Json to_json(const Pose& p);
Pose pose_from_json(const Json& j);
Json to_json(const GripperSpec& spec);
GripperSpec gripper_from_json(const Json& j);
Json to_json(const Bandwidth& bw);
Bandwidth bandwidth_from_json(const Json& j);
Json to_json(const ContactModel& m);
ContactModel contact_model_from_json(const Json& j);
Json to_json(const TrajectoryLibrary& lib);
TrajectoryLibrary trajectories_from_json(const Json& j);
Json to_json(const LinearSensorModel& m);
LinearSensorModel sensor_model_from_json(const Json& j);
Json to_json(const ModelArchive& a);
ModelArchive archive_from_json(const Json& j);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
/// Parses a JSON file; errors are DataError prefixed with the path.
Json read_json(const std::filesystem::path& path);

void save_archive(const ModelArchive& archive, const std::filesystem::path& path);
/// Throws DataError on a missing file, malformed content or a version mismatch.
ModelArchive load_archive(const std::filesystem::path& path);

/// Demonstration file: {"grasp_id", "label", "cloud" (path relative to the
/// file), "wrist": [px,py,pz,qw,qx,qy,qz], "joints": [14 values]}.
struct DemoFile {
  int grasp_id = 0;
  std::string label;
  std::filesystem::path cloud;
  GripperConfig config;
};
DemoFile load_demo_file(const std::filesystem::path& path);
Json to_json(const DemoFile& demo, const std::filesystem::path& relative_to);

}  // namespace rpgrasp

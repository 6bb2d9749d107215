#pragma once

#include "rpgrasp/gripper.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rpgrasp {

struct Segment {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

struct WeightedPoint {
  Eigen::Vector3d position;
  double weight = 0.0;
};

/// Layers drawn on each projection, back to front: cloud, gripper links, kernel centres.
struct PlotLayers {
  std::vector<Eigen::Vector3d> cloud;
  std::vector<Segment> links;
  std::vector<WeightedPoint> kernels;
};

struct PlotOptions {
  double panel = 320.0;  ///< panel side length in SVG units
  double margin = 16.0;
  double point_radius = 1.2;
  std::string title;
};

/// Link axes of a configuration: each capsule's segment in world coordinates.
std::vector<Segment> gripper_segments(const GripperSpec& spec, const GripperConfig& cfg);

/// Ranks weights in descending order (ties by index); rank 0 is the heaviest.
std::vector<std::size_t> weight_ranks(const std::vector<WeightedPoint>& kernels);

/// Three orthographic panels (top x-y, front x-z, side y-z) sharing one scale.
/// Kernel centres are coloured from red (heaviest) to blue (lightest) by rank.
/// Output depends only on the inputs.
std::string render_svg(const PlotLayers& layers, const PlotOptions& options = {});

}  // namespace rpgrasp

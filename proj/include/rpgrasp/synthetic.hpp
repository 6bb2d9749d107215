#pragma once

#include "rpgrasp/contact.hpp"
#include "rpgrasp/point_cloud.hpp"

#include <string>
#include <variant>
#include <vector>

namespace rpgrasp {

// Primitive surfaces, each in its own local frame.
struct Sphere {
  double radius = 0.05;
};
/// Axis along local x, centred on the origin.
struct Cylinder {
  double radius = 0.05;
  double length = 0.2;
  bool caps = true;
};
/// Centred axis-aligned box with the given half extents.
struct Box {
  Eigen::Vector3d half = Eigen::Vector3d::Constant(0.05);
};
/// Square patch in the local xy plane, normal +z.
struct Plane {
  double half = 0.1;
};

struct Primitive {
  std::variant<Sphere, Cylinder, Box, Plane> shape;
  Pose pose;
};

/// A composite of primitives seen by an orthographic camera.
struct SceneSpec {
  std::vector<Primitive> primitives;
  Pose pose;  ///< applied to every primitive (and the camera direction)
  /// Viewing direction, from the camera towards the scene (scene frame).
  Eigen::Vector3d view = -Eigen::Vector3d::UnitZ();
  std::size_t points = 2000;
};

/// Samples `points` visible surface points (area-uniform, back faces culled)
/// with outward normals. Deterministic for a seed. Throws std::invalid_argument
/// on bad primitive parameters and DataError if nothing is visible.
PointCloud generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// Parses "sphere:R", "cylinder:R:L", "cylinder:R:L:nocaps", "box:X:Y:Z"
/// (half extents) and "plane:H". Throws DataError on malformed input.
Primitive parse_primitive(const std::string& text);

struct CloseOptions {
  double step = 0.01;       ///< joint increment (rad)
  double contact = 0.0;     ///< stop a joint once a link is this close to a point
};

/// Closes each finger proximal joint first: a flexion joint advances until any
/// link it moves touches the cloud or it hits its limit, then the next joint
/// takes over. RP angles are kept.
GripperConfig close_fingers(const GripperSpec& spec, const GripperConfig& open, const CloudCollider& cloud,
                            const CloseOptions& options = {});

/// Top-down pinch over a cylinder lying along x: palm facing down, thumb on
/// the -y side, both RP fingers turned to the +y side, wrist at
/// (x_offset, 0, radius + clearance) relative to the cylinder centre.
GripperConfig cylinder_pinch(const GripperSpec& spec, double radius, double x_offset, double clearance = 0.011);

}  // namespace rpgrasp

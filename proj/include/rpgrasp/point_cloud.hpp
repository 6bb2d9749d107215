#pragma once

#include "rpgrasp/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rpgrasp {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  /// Either empty or one normal per point.
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }
};

enum class CloudFormat { Ply, Csv };

/// Reads an ascii PLY (vertex x/y/z[/nx/ny/nz]) or CSV (x,y,z[,nx,ny,nz]) cloud.
/// The format defaults to the file extension. Throws DataError on malformed
/// rows (the message names the row) and on empty clouds.
PointCloud load_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format = std::nullopt);
PointCloud parse_ply(std::istream& in);
PointCloud parse_csv(std::istream& in);

void write_ply(std::ostream& out, const PointCloud& cloud);
void write_csv(std::ostream& out, const PointCloud& cloud);

PointCloud transformed(const PointCloud& cloud, const Pose& t);

}  // namespace rpgrasp

#include "rpgrasp/spatial_index.hpp"

#include <stdexcept>

namespace rpgrasp {

PointGrid::PointGrid(std::span<const Eigen::Vector3d> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("PointGrid: cell size must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto k = key_of(points_[i]);
    cells_[pack(k[0], k[1], k[2])].push_back(static_cast<std::uint32_t>(i));
  }
}

std::vector<std::size_t> PointGrid::radius_search(const Eigen::Vector3d& c, double r) const {
  std::vector<std::size_t> out;
  const Eigen::Vector3d d = Eigen::Vector3d::Constant(r);
  const double r2 = r * r;
  for_each_in_box(c - d, c + d, [&](std::size_t i) {
    if ((points_[i] - c).squaredNorm() <= r2) out.push_back(i);
  });
  return out;
}

}  // namespace rpgrasp

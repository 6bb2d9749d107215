#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace rpgrasp {

/// Uniform hash grid over a fixed point set. Visits are deterministic: cells in
/// x-major order, points in insertion order within a cell.
class PointGrid {
 public:
  PointGrid() = default;
  PointGrid(std::span<const Eigen::Vector3d> points, double cell_size);

  std::size_t size() const { return points_.size(); }
  const Eigen::Vector3d& point(std::size_t i) const { return points_[i]; }
  double cell_size() const { return cell_; }

  /// Calls fn(index) for every point inside the closed axis-aligned box.
  template <typename Fn>
  void for_each_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, Fn&& fn) const {
    if (points_.empty()) return;
    const auto a = key_of(lo);
    const auto b = key_of(hi);
    // Wide boxes: a linear scan is cheaper than probing empty cells.
    const double cells = double(b[0] - a[0] + 1) * double(b[1] - a[1] + 1) * double(b[2] - a[2] + 1);
    if (cells > static_cast<double>(points_.size())) {
      for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) fn(i);
      }
      return;
    }
    for (std::int64_t x = a[0]; x <= b[0]; ++x)
      for (std::int64_t y = a[1]; y <= b[1]; ++y)
        for (std::int64_t z = a[2]; z <= b[2]; ++z) {
          const auto it = cells_.find(pack(x, y, z));
          if (it == cells_.end()) continue;
          for (std::uint32_t i : it->second) {
            const auto& p = points_[i];
            if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) fn(std::size_t(i));
          }
        }
  }

  /// Indices of points within distance r of c (inclusive), in visit order.
  std::vector<std::size_t> radius_search(const Eigen::Vector3d& c, double r) const;

 private:
  using Key = std::array<std::int64_t, 3>;
  Key key_of(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z) {
    constexpr std::uint64_t mask = (1ULL << 21) - 1;
    return ((std::uint64_t(x) & mask) << 42) | ((std::uint64_t(y) & mask) << 21) | (std::uint64_t(z) & mask);
  }

  std::vector<Eigen::Vector3d> points_;
  double cell_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace rpgrasp

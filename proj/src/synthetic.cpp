#include "rpgrasp/synthetic.hpp"

#include "rpgrasp/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rpgrasp {

namespace {

constexpr double kPi = std::numbers::pi;

struct SurfacePoint {
  Eigen::Vector3d p;
  Eigen::Vector3d n;
};

double area(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          if (!(s.radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
          return 4.0 * kPi * s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          if (!(s.radius > 0.0) || !(s.length > 0.0)) throw std::invalid_argument("cylinder sizes must be positive");
          return 2.0 * kPi * s.radius * s.length + (s.caps ? 2.0 * kPi * s.radius * s.radius : 0.0);
        } else if constexpr (std::is_same_v<T, Box>) {
          if (!(s.half.array() > 0.0).all()) throw std::invalid_argument("box extents must be positive");
          const auto& h = s.half;
          return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z());
        } else {
          if (!(s.half > 0.0)) throw std::invalid_argument("plane size must be positive");
          return 4.0 * s.half * s.half;
        }
      },
      prim.shape);
}

SurfacePoint sample_local(const Primitive& prim, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::visit(
      [&](const auto& s) -> SurfacePoint {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          Eigen::Vector3d n(normal(rng), normal(rng), normal(rng));
          n.normalize();
          return {s.radius * n, n};
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const double body = 2.0 * kPi * s.radius * s.length;
          const double cap = s.caps ? kPi * s.radius * s.radius : 0.0;
          const double u = unit(rng) * (body + 2.0 * cap);
          if (u < body) {
            const double theta = 2.0 * kPi * unit(rng);
            const double x = (unit(rng) - 0.5) * s.length;
            const Eigen::Vector3d n(0.0, std::cos(theta), std::sin(theta));
            return {Eigen::Vector3d(x, 0.0, 0.0) + s.radius * n, n};
          }
          const double side = u < body + cap ? 1.0 : -1.0;
          const double r = s.radius * std::sqrt(unit(rng));
          const double phi = 2.0 * kPi * unit(rng);
          return {Eigen::Vector3d(side * 0.5 * s.length, r * std::cos(phi), r * std::sin(phi)),
                  Eigen::Vector3d(side, 0.0, 0.0)};
        } else if constexpr (std::is_same_v<T, Box>) {
          const auto& h = s.half;
          const std::array<double, 3> face{h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
          const double total = 2.0 * (face[0] + face[1] + face[2]);
          double u = unit(rng) * total;
          int axis = 0;
          double side = 1.0;
          for (int a = 0; a < 3; ++a) {
            if (u < 2.0 * face[a]) {
              axis = a;
              side = u < face[a] ? 1.0 : -1.0;
              break;
            }
            u -= 2.0 * face[a];
            axis = 2;
          }
          Eigen::Vector3d p;
          for (int a = 0; a < 3; ++a) p[a] = (2.0 * unit(rng) - 1.0) * h[a];
          p[axis] = side * h[axis];
          Eigen::Vector3d n = Eigen::Vector3d::Zero();
          n[axis] = side;
          return {p, n};
        } else {
          const double x = (2.0 * unit(rng) - 1.0) * s.half;
          const double y = (2.0 * unit(rng) - 1.0) * s.half;
          return {Eigen::Vector3d(x, y, 0.0), Eigen::Vector3d::UnitZ()};
        }
      },
      prim.shape);
}

double parse_number(const std::string& text, const std::string& whole) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError("bad primitive spec '" + whole + "': '" + text + "' is not a number");
  }
}

}  // namespace

PointCloud generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.primitives.empty()) throw std::invalid_argument("generate_scene: no primitives");
  if (spec.points == 0) throw std::invalid_argument("generate_scene: point count must be positive");
  if (!(spec.view.norm() > 0.0)) throw std::invalid_argument("generate_scene: view direction must be non-zero");

  std::vector<double> cumulative;
  double run = 0.0;
  for (const auto& prim : spec.primitives) cumulative.push_back(run += area(prim));

  const Eigen::Vector3d view = spec.pose.rotate(spec.view.normalized());
  Rng rng(derive_seed(seed, "scene"));
  PointCloud cloud;
  const std::size_t max_tries = 1000 * spec.points;
  for (std::size_t tries = 0; cloud.points.size() < spec.points && tries < max_tries; ++tries) {
    const Primitive& prim = spec.primitives[sample_index(rng, cumulative)];
    const SurfacePoint local = sample_local(prim, rng);
    const Pose frame = compose(spec.pose, prim.pose);
    const Eigen::Vector3d n = frame.rotate(local.n);
    if (!(n.dot(view) < 0.0)) continue;
    cloud.points.push_back(frame.transform_point(local.p));
    cloud.normals.push_back(n);
  }
  if (cloud.points.size() < spec.points)
    throw DataError("generate_scene: only " + std::to_string(cloud.points.size()) + " of " +
                    std::to_string(spec.points) + " points are visible");
  return cloud;
}

Primitive parse_primitive(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty()) throw DataError("bad primitive spec '" + text + "'");
  const std::string& kind = parts[0];
  auto num = [&](std::size_t i) { return parse_number(parts[i], text); };
  Primitive prim;
  if (kind == "sphere" && parts.size() == 2) {
    prim.shape = Sphere{num(1)};
  } else if (kind == "cylinder" && (parts.size() == 3 || (parts.size() == 4 && parts[3] == "nocaps"))) {
    prim.shape = Cylinder{num(1), num(2), parts.size() == 3};
  } else if (kind == "box" && parts.size() == 4) {
    prim.shape = Box{Eigen::Vector3d(num(1), num(2), num(3))};
  } else if (kind == "plane" && parts.size() == 2) {
    prim.shape = Plane{num(1)};
  } else {
    throw DataError("bad primitive spec '" + text + "'");
  }
  try {
    area(prim);
  } catch (const std::invalid_argument& e) {
    throw DataError("bad primitive spec '" + text + "': " + e.what());
  }
  return prim;
}

GripperConfig close_fingers(const GripperSpec& spec, const GripperConfig& open, const CloudCollider& cloud,
                            const CloseOptions& options) {
  if (!(options.step > 0.0)) throw std::invalid_argument("close_fingers: step must be positive");
  GripperConfig cfg = open;
  cfg.joints = spec.clamp(cfg.joints);

  auto touches = [&](const GripperConfig& c, std::size_t finger, std::size_t first_link) {
    const LinkPoses links = forward_kinematics(spec, c);
    for (std::size_t k = first_link; k < kLinksPerFinger; ++k) {
      const std::size_t i = GripperSpec::link_index(finger, k);
      const Capsule cap = spec.capsule(i);
      const Eigen::Vector3d a = links[i].position();
      const Eigen::Vector3d b = links[i].transform_point(Eigen::Vector3d(cap.length, 0.0, 0.0));
      const Eigen::Vector3d pad = Eigen::Vector3d::Constant(cap.radius + options.contact);
      bool hit = false;
      cloud.grid().for_each_in_box(a.cwiseMin(b) - pad, a.cwiseMax(b) + pad, [&](std::size_t j) {
        hit = hit || capsule_signed_distance(cap, links[i], cloud.grid().point(j)) <= options.contact;
      });
      if (hit) return true;
    }
    return false;
  };

  for (std::size_t f = 0; f < kFingerCount; ++f) {
    for (std::size_t k = 0; k < kActivePerFinger; ++k) {
      const std::size_t j = GripperSpec::active_joint(f, k);
      const JointLimits lim = spec.limits(j);
      while (cfg.joints[j] < lim.upper) {
        GripperConfig trial = cfg;
        trial.joints[j] = lim.clamp(cfg.joints[j] + options.step);
        // Joint k sits between link k and link k+1.
        if (touches(trial, f, k + 1)) break;
        cfg = trial;
      }
    }
  }
  return cfg;
}

GripperConfig cylinder_pinch(const GripperSpec& spec, double radius, double x_offset, double clearance) {
  Eigen::Matrix3d r;
  r.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);
  r.col(1) = Eigen::Vector3d(-1.0, 0.0, 0.0);
  r.col(2) = Eigen::Vector3d(0.0, 0.0, -1.0);
  GripperConfig cfg;
  cfg.wrist = Pose(Eigen::Vector3d(x_offset, 0.0, radius + clearance), Eigen::Quaterniond(r));
  cfg.joints.setZero();
  // Finger 1 sits at 120° and finger 2 at 240°; turning them by ±60° points
  // both along the wrist's -x axis, opposite the thumb.
  cfg.joints[GripperSpec::rp_joints()[0]] = kPi / 3.0;
  cfg.joints[GripperSpec::rp_joints()[1]] = -kPi / 3.0;
  cfg.joints = spec.clamp(cfg.joints);
  return cfg;
}

}  // namespace rpgrasp

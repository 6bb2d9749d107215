#include "rpgrasp/archive.hpp"

#include "rpgrasp/error.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace rpgrasp {

namespace fs = std::filesystem;

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T number_list(const Json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n)
    throw DataError(std::string(what) + ": expected " + std::to_string(n) + " numbers");
  T out;
  for (std::size_t k = 0; k < n; ++k) {
    if (!j[k].is_number()) throw DataError(std::string(what) + ": non-numeric entry");
    out[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw DataError(std::string(what) + ": non-numeric entry");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Json limits_to_json(const JointLimits& l) { return Json::array({l.lower, l.upper}); }

JointLimits limits_from_json(const Json& j) {
  const auto v = number_list<Eigen::Vector2d>(j, 2, "joint limits");
  return {v[0], v[1]};
}

Json config_to_json(const GripperConfig& c) {
  return {{"wrist", to_json(c.wrist)}, {"joints", vector_to_json(c.joints)}};
}

GripperConfig config_from_json(const Json& j) {
  GripperConfig c;
  c.wrist = pose_from_json(field(j, "wrist"));
  c.joints = number_list<JointVector>(field(j, "joints"), kJointCount, "joints");
  return c;
}

Json grasp_to_json(const TrainedGrasp& g) {
  Json contacts = Json::array();
  for (const auto& m : g.contacts) contacts.push_back(to_json(m));
  return {{"grasp_id", g.grasp_id},
          {"label", g.label},
          {"demonstrated", config_to_json(g.demonstrated)},
          {"config_model",
           {{"mean", vector_to_json(g.config_model.mean)}, {"scale", vector_to_json(g.config_model.scale)}}},
          {"optimized", g.optimized},
          {"mass_before", g.mass_before},
          {"mass_after", g.mass_after},
          {"collision_before", g.collision_before},
          {"collision_after", g.collision_after},
          {"contacts", contacts}};
}

TrainedGrasp grasp_from_json(const Json& j) {
  TrainedGrasp g;
  g.grasp_id = field(j, "grasp_id").get<int>();
  g.label = field(j, "label").get<std::string>();
  g.demonstrated = config_from_json(field(j, "demonstrated"));
  const Json& cm = field(j, "config_model");
  g.config_model.grasp_id = g.grasp_id;
  g.config_model.mean = number_list<JointVector>(field(cm, "mean"), kJointCount, "config_model.mean");
  g.config_model.scale = number_list<JointVector>(field(cm, "scale"), kJointCount, "config_model.scale");
  g.optimized = field(j, "optimized").get<bool>();
  g.mass_before = field(j, "mass_before").get<double>();
  g.mass_after = field(j, "mass_after").get<double>();
  g.collision_before = field(j, "collision_before").get<double>();
  g.collision_after = field(j, "collision_after").get<double>();
  for (const auto& c : field(j, "contacts")) {
    g.contacts.push_back(contact_model_from_json(c));
    g.contacts.back().grasp_id = g.grasp_id;
  }
  return g;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Pose& p) {
  const auto& t = p.position();
  const auto& q = p.orientation();
  return Json::array({t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()});
}

Pose pose_from_json(const Json& j) {
  const auto v = number_list<Eigen::Matrix<double, 7, 1>>(j, 7, "pose");
  const Eigen::Quaterniond q(v[3], v[4], v[5], v[6]);
  // Stored poses are already canonical; anything else (hand-written files) is normalized.
  if (std::abs(q.norm() - 1.0) <= 1e-9 && canonical(q).coeffs() == q.coeffs())
    return Pose::from_stored(v.head<3>(), q);
  try {
    return Pose(v.head<3>(), q);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("pose: ") + e.what());
  }
}

Json to_json(const GripperSpec& s) {
  Json active = Json::array();
  for (const auto& l : s.active_limits) active.push_back(limits_to_json(l));
  return {{"palm_radius", s.palm_radius},
          {"finger_angles", s.finger_angles},
          {"link_lengths", s.link_lengths},
          {"link_radii", s.link_radii},
          {"rp_axis", vector_to_json(s.rp_axis)},
          {"active_axis", vector_to_json(s.active_axis)},
          {"rp_limits", limits_to_json(s.rp_limits)},
          {"active_limits", active},
          {"coupling", s.coupling}};
}

GripperSpec gripper_from_json(const Json& j) {
  return guarded("gripper spec", [&] {
    // Missing keys keep their default values so partial configs work.
    GripperSpec s = GripperSpec::defaults();
    if (!j.is_object()) throw DataError("gripper spec: expected an object");
    auto array3 = [&](const char* key, std::array<double, 3>& out) {
      if (j.contains(key)) {
        const auto v = number_list<Eigen::Vector3d>(j.at(key), 3, key);
        out = {v[0], v[1], v[2]};
      }
    };
    auto array5 = [&](const char* key, std::array<double, 5>& out) {
      if (j.contains(key)) {
        const auto v = number_list<Eigen::Matrix<double, 5, 1>>(j.at(key), 5, key);
        for (int k = 0; k < 5; ++k) out[static_cast<std::size_t>(k)] = v[k];
      }
    };
    if (j.contains("palm_radius")) s.palm_radius = j.at("palm_radius").get<double>();
    array3("finger_angles", s.finger_angles);
    array5("link_lengths", s.link_lengths);
    array5("link_radii", s.link_radii);
    if (j.contains("rp_axis")) s.rp_axis = number_list<Eigen::Vector3d>(j.at("rp_axis"), 3, "rp_axis");
    if (j.contains("active_axis")) s.active_axis = number_list<Eigen::Vector3d>(j.at("active_axis"), 3, "active_axis");
    if (j.contains("rp_limits")) s.rp_limits = limits_from_json(j.at("rp_limits"));
    if (j.contains("active_limits")) {
      const Json& a = j.at("active_limits");
      if (!a.is_array() || a.size() != kActivePerFinger) throw DataError("active_limits: expected 4 pairs");
      for (std::size_t k = 0; k < kActivePerFinger; ++k) s.active_limits[k] = limits_from_json(a[k]);
    }
    if (j.contains("coupling")) {
      const auto v = number_list<Eigen::Vector4d>(j.at("coupling"), 4, "coupling");
      for (int k = 0; k < 4; ++k) s.coupling[static_cast<std::size_t>(k)] = v[k];
    }
    s.validate();
    return s;
  });
}

Json to_json(const Bandwidth& bw) {
  return {{"sigma_p", bw.sigma_p}, {"sigma_q", bw.sigma_q}, {"sigma_r", Json::array({bw.sigma_r[0], bw.sigma_r[1]})}};
}

Bandwidth bandwidth_from_json(const Json& j) {
  return guarded("bandwidth", [&] {
    Bandwidth bw;
    bw.sigma_p = field(j, "sigma_p").get<double>();
    bw.sigma_q = field(j, "sigma_q").get<double>();
    bw.sigma_r = number_list<Eigen::Vector2d>(field(j, "sigma_r"), 2, "sigma_r");
    bw.validate();
    return bw;
  });
}

Json to_json(const ContactModel& m) {
  Json kernels = Json::array();
  for (const auto& k : m.kernels) {
    const auto& p = k.relative.position();
    const auto& q = k.relative.orientation();
    kernels.push_back(
        Json::array({p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(), k.curvature[0], k.curvature[1], k.weight}));
  }
  return {{"link", m.link}, {"bandwidth", to_json(m.bandwidth)}, {"kernels", kernels}};
}

ContactModel contact_model_from_json(const Json& j) {
  return guarded("contact model", [&] {
    ContactModel m;
    m.link = field(j, "link").get<std::size_t>();
    if (m.link >= kLinkCount) throw DataError("contact model: link index out of range");
    m.bandwidth = bandwidth_from_json(field(j, "bandwidth"));
    for (const auto& row : field(j, "kernels")) {
      const auto v = number_list<Eigen::Matrix<double, 10, 1>>(row, 10, "contact kernel");
      ContactKernel k;
      k.relative = pose_from_json(Json::array({v[0], v[1], v[2], v[3], v[4], v[5], v[6]}));
      k.curvature = Eigen::Vector2d(v[7], v[8]);
      k.weight = v[9];
      if (!(k.weight >= 0.0)) throw DataError("contact kernel: negative weight");
      m.kernels.push_back(k);
    }
    return m;
  });
}

Json to_json(const TrajectoryLibrary& lib) {
  Json out = Json::array();
  for (const auto& t : lib) {
    Json reconfig = Json::array(), approach = Json::array();
    for (const auto& w : t.reconfig) reconfig.push_back(vector_to_json(w));
    for (const auto& w : t.approach) approach.push_back(vector_to_json(w));
    out.push_back({{"rp", t.rp},
                   {"direction", to_string(t.direction)},
                   {"h_begin", t.h_begin},
                   {"h_end", t.h_end},
                   {"reconfig", reconfig},
                   {"approach", approach}});
  }
  return out;
}

TrajectoryLibrary trajectories_from_json(const Json& j) {
  return guarded("trajectory library", [&] {
    if (!j.is_array()) throw DataError("trajectory library: expected an array");
    TrajectoryLibrary lib;
    for (const auto& e : j) {
      ReconfigTrajectory t;
      t.rp = field(e, "rp").get<std::size_t>();
      const auto dir = field(e, "direction").get<std::string>();
      if (dir == "increasing") t.direction = Direction::Increasing;
      else if (dir == "decreasing") t.direction = Direction::Decreasing;
      else throw DataError("trajectory library: unknown direction '" + dir + "'");
      t.h_begin = field(e, "h_begin").get<double>();
      t.h_end = field(e, "h_end").get<double>();
      for (const auto& w : field(e, "reconfig")) t.reconfig.push_back(vector_from_json(w, "reconfig waypoint"));
      for (const auto& w : field(e, "approach")) t.approach.push_back(vector_from_json(w, "approach waypoint"));
      t.validate();
      lib.push_back(std::move(t));
    }
    return lib;
  });
}

Json to_json(const LinearSensorModel& m) {
  return {{"gain", vector_to_json(m.gain)},
          {"offset", vector_to_json(m.offset)},
          {"tendon_gain", m.tendon_gain},
          {"tendon_offset", m.tendon_offset}};
}

LinearSensorModel sensor_model_from_json(const Json& j) {
  return guarded("sensor model", [&] {
    LinearSensorModel m;
    m.gain = vector_from_json(field(j, "gain"), "gain");
    m.offset = vector_from_json(field(j, "offset"), "offset");
    m.tendon_gain = field(j, "tendon_gain").get<double>();
    m.tendon_offset = field(j, "tendon_offset").get<double>();
    m.validate();
    return m;
  });
}

Json to_json(const ModelArchive& a) {
  Json grasps = Json::array();
  for (const auto& g : a.grasps.grasps) grasps.push_back(grasp_to_json(g));
  Json out = {{"format", "rpgrasp-model"},
              {"version", a.version},
              {"gripper", to_json(a.grasps.spec)},
              {"grasps", grasps},
              {"trajectories", to_json(a.trajectories)},
              {"metadata", a.metadata}};
  if (a.sensor) {
    out["sensor"] = {{"model", to_json(a.sensor->model)},
                     {"joint_to_tracker", to_json(a.sensor->joint_to_tracker)},
                     {"residual", a.sensor->residual}};
  }
  return out;
}

ModelArchive archive_from_json(const Json& j) {
  return guarded("model archive", [&] {
    if (!j.is_object() || j.value("format", "") != "rpgrasp-model") throw DataError("not a model archive");
    ModelArchive a;
    a.version = field(j, "version").get<int>();
    if (a.version != kArchiveVersion)
      throw DataError("unsupported archive version " + std::to_string(a.version) + " (expected " +
                      std::to_string(kArchiveVersion) + ")");
    a.grasps.spec = gripper_from_json(field(j, "gripper"));
    for (const auto& g : field(j, "grasps")) a.grasps.grasps.push_back(grasp_from_json(g));
    a.trajectories = trajectories_from_json(field(j, "trajectories"));
    a.metadata = field(j, "metadata");
    if (j.contains("sensor")) {
      const Json& s = j.at("sensor");
      a.sensor = SensorCalibration{sensor_model_from_json(field(s, "model")), pose_from_json(field(s, "joint_to_tracker")),
                                   field(s, "residual").get<double>()};
    }
    return a;
  });
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move " + tmp.string() + " into place");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_archive(const ModelArchive& archive, const fs::path& path) {
  write_atomic(path, to_json(archive).dump(1) + "\n");
}

ModelArchive load_archive(const fs::path& path) {
  const Json j = read_json(path);
  try {
    return archive_from_json(j);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

DemoFile load_demo_file(const fs::path& path) {
  const Json j = read_json(path);
  try {
    return guarded("demonstration", [&] {
      DemoFile d;
      d.grasp_id = field(j, "grasp_id").get<int>();
      d.label = j.value("label", std::string());
      const fs::path cloud = field(j, "cloud").get<std::string>();
      d.cloud = cloud.is_absolute() ? cloud : path.parent_path() / cloud;
      d.config = config_from_json(j);
      return d;
    });
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Json to_json(const DemoFile& demo, const fs::path& relative_to) {
  Json j = config_to_json(demo.config);
  j["grasp_id"] = demo.grasp_id;
  j["label"] = demo.label;
  j["cloud"] = demo.cloud.lexically_relative(relative_to).generic_string();
  return j;
}

}  // namespace rpgrasp

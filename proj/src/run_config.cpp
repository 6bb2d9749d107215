#include "rpgrasp/run_config.hpp"

#include "rpgrasp/error.hpp"

#include <cstdlib>

namespace rpgrasp {

namespace {

void check_keys(const Json& patch, const Json& reference, const std::string& where) {
  if (!patch.is_object()) return;
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!reference.contains(key)) throw DataError("config: unknown key '" + path + "'");
    if (value.is_object()) check_keys(value, reference.at(key), path);
  }
}

Json joint_vector_json(const JointVector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

JointVector joint_vector_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != kJointCount) throw DataError(std::string("config: ") + what + " needs 14 values");
  JointVector v;
  for (std::size_t k = 0; k < kJointCount; ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

}  // namespace

Json to_json(const RunConfig& c) {
  const auto& t = c.train;
  const auto& k = t.kinaesthetic;
  const auto& o = c.plan.optimizer;
  Json obstacles = Json::array();
  for (const auto& h : c.plan.obstacles)
    obstacles.push_back({{"normal", {h.normal.x(), h.normal.y(), h.normal.z()}}, {"offset", h.offset}});
  return {
      {"gripper", to_json(c.gripper)},
      {"train",
       {{"feature_radius", t.features.radius},
        {"min_neighbors", t.features.min_neighbors},
        {"bandwidth", to_json(t.bandwidth)},
        {"field_cutoff", t.field_cutoff},
        {"field_scale", t.field_scale},
        {"config_scale", t.config_scale},
        {"gamma", t.collision.gamma},
        {"beta", t.collision.beta},
        {"optimize_contacts", t.optimize_contacts},
        {"kinaesthetic",
         {{"zeta", k.zeta},
          {"eps_position", k.eps_position},
          {"eps_orientation", k.eps_orientation},
          {"eps_joints", joint_vector_json(k.eps_joints)},
          {"budget", k.budget}}}}},
      {"scene",
       {{"feature_radius", c.scene.features.radius},
        {"min_neighbors", c.scene.features.min_neighbors},
        {"bandwidth", to_json(c.scene.bandwidth)},
        {"query_kernels", c.scene.query_kernels},
        {"gamma", c.scene.collision.gamma},
        {"beta", c.scene.collision.beta}}},
      {"plan",
       {{"candidates", c.plan.candidates},
        {"seed_attempts", c.plan.seed_attempts},
        {"check_links", c.plan.check_links},
        {"obstacles", obstacles},
        {"budget", o.budget},
        {"step_position", o.step_position},
        {"step_orientation", o.step_orientation},
        {"step_joint", o.step_joint},
        {"final_step_fraction", o.final_step_fraction},
        {"temperature_initial", o.temperature_initial},
        {"temperature_final", o.temperature_final},
        {"polish_fraction", o.polish_fraction},
        {"project_coupling", o.project_coupling},
        {"pivot_at_grasp", o.pivot_at_grasp}}},
      {"reconfig_delta", c.reconfig_delta},
  };
}

RunConfig run_config_from_json(const Json& patch) {
  const Json defaults = to_json(RunConfig{});
  if (!patch.is_object()) throw DataError("config: expected a JSON object");
  check_keys(patch, defaults, "");
  Json j = defaults;
  j.merge_patch(patch);
  try {
    RunConfig c;
    c.gripper = gripper_from_json(j.at("gripper"));

    const Json& t = j.at("train");
    c.train.features.radius = t.at("feature_radius").get<double>();
    c.train.features.min_neighbors = t.at("min_neighbors").get<std::size_t>();
    c.train.bandwidth = bandwidth_from_json(t.at("bandwidth"));
    c.train.field_cutoff = t.at("field_cutoff").get<double>();
    c.train.field_scale = t.at("field_scale").get<double>();
    c.train.config_scale = t.at("config_scale").get<double>();
    c.train.collision.gamma = t.at("gamma").get<double>();
    c.train.collision.beta = t.at("beta").get<double>();
    c.train.optimize_contacts = t.at("optimize_contacts").get<bool>();
    const Json& k = t.at("kinaesthetic");
    c.train.kinaesthetic.zeta = k.at("zeta").get<double>();
    c.train.kinaesthetic.eps_position = k.at("eps_position").get<double>();
    c.train.kinaesthetic.eps_orientation = k.at("eps_orientation").get<double>();
    c.train.kinaesthetic.eps_joints = joint_vector_from_json(k.at("eps_joints"), "eps_joints");
    c.train.kinaesthetic.budget = k.at("budget").get<std::size_t>();

    const Json& s = j.at("scene");
    c.scene.features.radius = s.at("feature_radius").get<double>();
    c.scene.features.min_neighbors = s.at("min_neighbors").get<std::size_t>();
    c.scene.bandwidth = bandwidth_from_json(s.at("bandwidth"));
    c.scene.query_kernels = s.at("query_kernels").get<std::size_t>();
    c.scene.collision.gamma = s.at("gamma").get<double>();
    c.scene.collision.beta = s.at("beta").get<double>();

    const Json& p = j.at("plan");
    c.plan.candidates = p.at("candidates").get<std::size_t>();
    c.plan.seed_attempts = p.at("seed_attempts").get<std::size_t>();
    c.plan.check_links = p.at("check_links").get<bool>();
    for (const auto& h : p.at("obstacles")) {
      HalfSpace hs;
      const Json& n = h.at("normal");
      hs.normal = Eigen::Vector3d(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>());
      if (!(hs.normal.norm() > 0.0)) throw DataError("config: obstacle normal must be non-zero");
      hs.normal.normalize();
      hs.offset = h.at("offset").get<double>();
      c.plan.obstacles.push_back(hs);
    }
    auto& o = c.plan.optimizer;
    o.budget = p.at("budget").get<std::size_t>();
    o.step_position = p.at("step_position").get<double>();
    o.step_orientation = p.at("step_orientation").get<double>();
    o.step_joint = p.at("step_joint").get<double>();
    o.final_step_fraction = p.at("final_step_fraction").get<double>();
    o.temperature_initial = p.at("temperature_initial").get<double>();
    o.temperature_final = p.at("temperature_final").get<double>();
    o.polish_fraction = p.at("polish_fraction").get<double>();
    o.project_coupling = p.at("project_coupling").get<bool>();
    o.pivot_at_grasp = p.at("pivot_at_grasp").get<bool>();

    c.reconfig_delta = j.at("reconfig_delta").get<double>();
    c.train.collision.validate();
    c.scene.collision.validate();
    if (!(c.reconfig_delta > 0.0)) throw DataError("config: reconfig_delta must be positive");
    if (!(c.train.features.radius > 0.0) || !(c.scene.features.radius > 0.0))
      throw DataError("config: feature_radius must be positive");
    return c;
  } catch (const Json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path) {
  std::optional<std::filesystem::path> source = path;
  if (!source) {
    const char* env = std::getenv(kConfigEnv);
    if (env && *env) source = std::filesystem::path(env);
  }
  if (!source) return RunConfig{};
  try {
    return run_config_from_json(read_json(*source));
  } catch (const DataError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source->string(), 0) == 0) throw;
    throw DataError(source->string() + ": " + msg);
  }
}

}  // namespace rpgrasp

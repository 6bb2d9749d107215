#include "cli.hpp"

#include "rpgrasp/archive.hpp"
#include "rpgrasp/calibration.hpp"
#include "rpgrasp/error.hpp"
#include "rpgrasp/plot.hpp"
#include "rpgrasp/report.hpp"
#include "rpgrasp/run_config.hpp"
#include "rpgrasp/synthetic.hpp"
#include "rpgrasp/training.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace rpgrasp::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, std::size_t min_count, std::size_t max_count,
                               const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // strtod rather than stod: subnormal weights in dumped files must parse.
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) throw UsageError(what + ": '" + item + "' is not a number");
    values.push_back(v);
  }
  if (values.size() < min_count || values.size() > max_count) {
    const std::string range =
        min_count == max_count ? std::to_string(min_count) : std::to_string(min_count) + "-" + std::to_string(max_count);
    throw UsageError(what + ": expected " + range + " comma-separated numbers");
  }
  return values;
}

std::array<double, 2> parse_pair(const std::string& text, const std::string& what, bool degrees) {
  const auto v = parse_list(text, 2, 2, what);
  const double f = degrees ? std::numbers::pi / 180.0 : 1.0;
  return {v[0] * f, v[1] * f};
}

/// "x,y,z" or "x,y,z,roll,pitch,yaw" (radians, applied as Rz(yaw) Ry(pitch) Rx(roll)).
Pose parse_pose(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, 3, 6, what);
  if (v.size() != 3 && v.size() != 6) throw UsageError(what + ": expected 3 or 6 numbers");
  Pose p = Pose::translation(v[0], v[1], v[2]);
  if (v.size() == 6) {
    const Pose r = compose(Pose::rotation(Eigen::Vector3d::UnitZ(), v[5]),
                           compose(Pose::rotation(Eigen::Vector3d::UnitY(), v[4]),
                                   Pose::rotation(Eigen::Vector3d::UnitX(), v[3])));
    p = compose(p, r);
  }
  return p;
}

HalfSpace parse_obstacle(const std::string& text) {
  const auto v = parse_list(text, 4, 4, "--obstacle");
  HalfSpace h;
  h.normal = Eigen::Vector3d(v[0], v[1], v[2]);
  if (!(h.normal.norm() > 0.0)) throw UsageError("--obstacle: normal must be non-zero");
  const double n = h.normal.norm();
  h.normal /= n;
  h.offset = v[3] / n;
  return h;
}

std::string render_ply(const PointCloud& cloud) {
  std::ostringstream s;
  write_ply(s, cloud);
  return s.str();
}

std::string print_double(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> demos;
  std::string output;
  std::string gripper;
  std::string bandwidths;
  std::string trajectories;
  std::string sensor;
  bool synthetic_trajectories = false;
  bool optimize_contacts = false;
};

int cmd_train(const TrainArgs& a, RunConfig cfg, std::uint64_t seed, std::ostream& out) {
  if (!a.gripper.empty()) cfg.gripper = gripper_from_json(read_json(a.gripper));
  if (a.optimize_contacts) cfg.train.optimize_contacts = true;
  if (!a.bandwidths.empty()) {
    const auto v = parse_list(a.bandwidths, 4, 4, "--bandwidths");
    cfg.train.bandwidth = Bandwidth{v[0], v[1], Eigen::Vector2d(v[2], v[3])};
    try {
      cfg.train.bandwidth.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--bandwidths: ") + e.what());
    }
  }
  if (!a.trajectories.empty() && a.synthetic_trajectories)
    throw UsageError("--trajectories and --synthetic-trajectories are exclusive");

  ModelArchive archive;
  archive.grasps.spec = cfg.gripper;
  Json demo_paths = Json::array();
  for (const auto& path : a.demos) {
    const DemoFile demo = load_demo_file(path);
    if (archive.grasps.find(demo.grasp_id))
      throw DataError(path + ": duplicate grasp id " + std::to_string(demo.grasp_id));
    const PointCloud cloud = load_cloud(demo.cloud);
    try {
      archive.grasps.grasps.push_back(
          train_grasp(demo.grasp_id, demo.label, cloud, demo.config, cfg.gripper, cfg.train, derive_seed(seed, "train")));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
    demo_paths.push_back(path);
  }
  archive.grasps.validate();

  if (!a.trajectories.empty()) {
    archive.trajectories = trajectories_from_json(read_json(a.trajectories));
  } else if (a.synthetic_trajectories) {
    LibraryOptions lo;
    lo.identical_approach = true;
    const auto lim = cfg.gripper.rp_limits;
    lo.h_low = lim.lower;
    lo.h_high = lim.upper;
    archive.trajectories = synthetic_library(lo, derive_seed(seed, "trajectories"));
  }
  if (!archive.trajectories.empty()) {
    try {
      validate_library(archive.trajectories);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("trajectory library: ") + e.what());
    }
  }
  if (!a.sensor.empty()) {
    const Json j = read_json(a.sensor);
    try {
      archive.sensor = SensorCalibration{sensor_model_from_json(j.at("model")), pose_from_json(j.at("joint_to_tracker")),
                                         j.at("residual").get<double>()};
    } catch (const Json::exception& e) {
      throw DataError(a.sensor + ": " + e.what());
    }
  }
  archive.metadata = {{"command", "train"}, {"seed", seed}, {"demos", demo_paths}, {"config", to_json(cfg)}};
  save_archive(archive, a.output);

  for (const auto& g : archive.grasps.grasps) {
    std::size_t kernels = 0, links = 0;
    for (const auto& c : g.contacts) {
      kernels += c.kernels.size();
      links += c.empty() ? 0 : 1;
    }
    out << "grasp " << g.grasp_id << " '" << g.label << "': " << links << " links in contact, " << kernels
        << " kernels";
    if (g.optimized)
      out << "; contact mass " << print_double(g.mass_before) << " -> " << print_double(g.mass_after)
          << ", collision " << print_double(g.collision_before) << " -> " << print_double(g.collision_after);
    out << '\n';
  }
  out << "wrote " << a.output << '\n';
  return kSuccess;
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
  std::string model;
  std::string cloud;
  std::string output;
  std::string csv;
  std::string dump_queries;
  std::vector<std::string> obstacles;
  std::optional<std::size_t> candidates;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> query_kernels;
};

int cmd_infer(const InferArgs& a, RunConfig cfg, std::uint64_t seed, std::ostream& out) {
  if (a.candidates) cfg.plan.candidates = *a.candidates;
  if (a.budget) cfg.plan.optimizer.budget = *a.budget;
  if (a.query_kernels) cfg.scene.query_kernels = *a.query_kernels;
  for (const auto& o : a.obstacles) cfg.plan.obstacles.push_back(parse_obstacle(o));
  if (cfg.plan.candidates == 0 || cfg.plan.optimizer.budget == 0 || cfg.scene.query_kernels == 0)
    throw UsageError("candidates, budget and query kernels must be positive");

  const ModelArchive archive = load_archive(a.model);
  archive.grasps.validate();
  const PointCloud cloud = load_cloud(a.cloud);

  const PlanningScene scene(archive.grasps, cloud, cfg.scene, derive_seed(seed, "infer", 0));
  const PlanResult result = plan_grasps(scene.scorer(), cfg.plan, derive_seed(seed, "infer", 1));

  cfg.gripper = archive.grasps.spec;
  const Json run = {{"command", "infer"}, {"seed", seed}, {"model", a.model}, {"cloud", a.cloud}, {"config", to_json(cfg)}};
  write_atomic(a.output, infer_report(archive.grasps, result, run).dump(1) + "\n");
  const std::string csv_path = a.csv.empty() ? fs::path(a.output).replace_extension(".csv").string() : a.csv;
  std::ostringstream csv;
  write_infer_csv(csv, result);
  write_atomic(csv_path, csv.str());

  if (!a.dump_queries.empty()) {
    fs::create_directories(a.dump_queries);
    for (std::size_t g = 0; g < scene.queries().size(); ++g) {
      for (const auto& qd : scene.queries()[g]) {
        if (qd.empty()) continue;
        std::ostringstream s;
        write_query_csv(s, qd);
        const std::string name =
            "query_g" + std::to_string(qd.grasp_id()) + "_link" + std::to_string(qd.link()) + ".csv";
        write_atomic(fs::path(a.dump_queries) / name, s.str());
      }
    }
  }

  out << format_tally(tally_by_grasp(archive.grasps, result));
  if (result.ranked.empty()) {
    std::map<std::string, std::size_t> reasons;
    for (const auto& h : result.rejected) ++reasons[h.reason];
    out << "no feasible grasp among " << result.rejected.size() << " candidates\n";
    for (const auto& [reason, n] : reasons) out << "  " << n << " rejected: " << reason << '\n';
    out << "wrote " << a.output << " and " << csv_path << '\n';
    return kNoFeasible;
  }
  const auto& best = result.ranked.front();
  out << "selected grasp " << best.grasp_id << " (candidate " << best.candidate << ", log score "
      << print_double(best.log_score) << ")\n";
  out << "wrote " << a.output << " and " << csv_path << '\n';
  return kSuccess;
}

// --- plan-reconfig ----------------------------------------------------------

struct ReconfigArgs {
  std::string model;
  std::string current;
  std::string target;
  std::string report;
  std::size_t rank = 1;
  std::string out_dir;
  std::optional<double> delta;
  bool degrees = false;
  bool no_share = false;
};

std::array<double, 2> target_from_report(const std::string& path, std::size_t rank) {
  const Json report = read_json(path);
  try {
    const Json& ranked = report.at("ranked");
    if (rank == 0 || rank > ranked.size())
      throw DataError(path + ": no grasp at rank " + std::to_string(rank) + " (" + std::to_string(ranked.size()) +
                      " ranked)");
    const Json& joints = ranked.at(rank - 1).at("joints");
    const auto rp = GripperSpec::rp_joints();
    return {joints.at(rp[0]).get<double>(), joints.at(rp[1]).get<double>()};
  } catch (const Json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

int cmd_plan_reconfig(const ReconfigArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (a.target.empty() == a.report.empty()) throw UsageError("give exactly one of --target and --report");
  const double delta = a.delta.value_or(cfg.reconfig_delta);
  if (!(delta > 0.0)) throw UsageError("--delta must be positive");

  const ModelArchive archive = load_archive(a.model);
  if (archive.trajectories.empty()) throw DataError(a.model + ": archive has no trajectory library");
  const std::array<double, 2> current = parse_pair(a.current, "--current", a.degrees);
  const std::array<double, 2> target =
      a.report.empty() ? parse_pair(a.target, "--target", a.degrees) : target_from_report(a.report, a.rank);

  ReconfigPlan plan;
  std::array<double, 2> predicted{};
  try {
    plan = assemble_plan(select_trajectories(archive.trajectories, current, target, delta), current, !a.no_share);
    predicted = simulate_plan(plan, current, archive.grasps.spec);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  fs::create_directories(a.out_dir);
  std::ostringstream all;
  write_plan_csv(all, plan);
  write_atomic(fs::path(a.out_dir) / "plan.csv", all.str());

  Json segments = Json::array();
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const auto& seg = plan.segments[k];
    std::ostringstream s;
    s << std::setprecision(17);
    const Eigen::Index dof = seg.waypoints.empty() ? 0 : seg.waypoints.front().size();
    for (Eigen::Index d = 0; d < dof; ++d) s << (d ? "," : "") << 'q' << d;
    s << '\n';
    for (const auto& w : seg.waypoints) {
      for (Eigen::Index d = 0; d < w.size(); ++d) s << (d ? "," : "") << w[d];
      s << '\n';
    }
    const std::string name = "segment_" + std::to_string(k) + ".csv";
    write_atomic(fs::path(a.out_dir) / name, s.str());
    segments.push_back({{"index", k},
                        {"kind", to_string(seg.kind)},
                        {"selection", seg.selection},
                        {"waypoints", seg.waypoints.size()},
                        {"file", name}});
  }
  Json selections = Json::array();
  for (const auto& s : plan.selections)
    selections.push_back({{"rp_joint", s.trajectory.rp},
                          {"direction", to_string(s.trajectory.direction)},
                          {"current", s.current},
                          {"target", s.target}});
  const Json summary = {{"command", "plan-reconfig"},
                        {"model", a.model},
                        {"current", current},
                        {"target", target},
                        {"delta", delta},
                        {"share_approaches", !a.no_share},
                        {"selections", selections},
                        {"segments", segments},
                        {"predicted", predicted}};
  write_atomic(fs::path(a.out_dir) / "summary.json", summary.dump(1) + "\n");

  if (plan.segments.empty()) {
    out << "RP-joints already within " << print_double(delta) << " rad of the target; empty plan\n";
  } else {
    out << plan.segments.size() << " segments:";
    for (const auto& seg : plan.segments) out << ' ' << to_string(seg.kind) << '[' << seg.selection << ']';
    out << "\npredicted RP angles " << print_double(predicted[0]) << ", " << print_double(predicted[1]) << '\n';
  }
  out << "wrote " << (fs::path(a.out_dir) / "summary.json").string() << '\n';
  return kSuccess;
}

// --- synth-scene ------------------------------------------------------------

struct SynthArgs {
  std::vector<std::string> primitives;
  std::string pose;
  std::string view = "0,0,-1";
  std::size_t points = 2000;
  std::string output;
  std::string demo_out;
  double pinch_offset = 0.0;
  int grasp_id = 1;
  std::string label;
};

int cmd_synth_scene(const SynthArgs& a, const RunConfig& cfg, std::uint64_t seed, std::ostream& out) {
  if (a.points == 0) throw UsageError("--points must be positive");
  SceneSpec spec;
  for (const auto& text : a.primitives) {
    const auto at = text.find('@');
    Primitive prim = parse_primitive(text.substr(0, at));
    if (at != std::string::npos) prim.pose = parse_pose(text.substr(at + 1), "primitive pose");
    spec.primitives.push_back(prim);
  }
  if (!a.pose.empty()) spec.pose = parse_pose(a.pose, "--pose");
  const auto view = parse_list(a.view, 3, 3, "--view");
  spec.view = Eigen::Vector3d(view[0], view[1], view[2]);
  if (!(spec.view.norm() > 0.0)) throw UsageError("--view must be non-zero");
  spec.points = a.points;

  const PointCloud cloud = generate_scene(spec, seed);
  write_atomic(a.output, render_ply(cloud));
  out << "wrote " << cloud.points.size() << " points to " << a.output << '\n';

  if (!a.demo_out.empty()) {
    const Primitive* cylinder = nullptr;
    for (const auto& p : spec.primitives)
      if (!cylinder && std::holds_alternative<Cylinder>(p.shape)) cylinder = &p;
    if (!cylinder) throw UsageError("--demo-out needs a cylinder primitive to grasp");
    const double radius = std::get<Cylinder>(cylinder->shape).radius;
    GripperConfig open = cylinder_pinch(cfg.gripper, radius, a.pinch_offset);
    open.wrist = compose(compose(spec.pose, cylinder->pose), open.wrist);
    const CloudCollider collider(cloud.points);
    DemoFile demo;
    demo.grasp_id = a.grasp_id;
    demo.label = a.label.empty() ? "synthetic-" + std::to_string(a.grasp_id) : a.label;
    demo.cloud = fs::absolute(a.output);
    demo.config = close_fingers(cfg.gripper, open, collider);
    const fs::path demo_dir = fs::absolute(a.demo_out).parent_path();
    write_atomic(a.demo_out, to_json(demo, demo_dir).dump(1) + "\n");
    out << "wrote demonstration " << a.demo_out << '\n';
  }
  return kSuccess;
}

// --- plot -------------------------------------------------------------------

struct PlotArgs {
  std::string cloud;
  std::string report;
  std::string model;
  std::vector<std::string> queries;
  std::size_t top = 1;
  std::string output;
  std::string title;
};

std::vector<WeightedPoint> read_query_centres(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  std::vector<WeightedPoint> pts;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    try {
      v = parse_list(line, 8, 8, path);
    } catch (const UsageError& e) {
      throw DataError(e.what());
    }
    pts.push_back({Eigen::Vector3d(v[0], v[1], v[2]), v[7]});
  }
  return pts;
}

int cmd_plot(const PlotArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  PlotLayers layers;
  layers.cloud = load_cloud(a.cloud).points;

  // Overlays are optional: a broken overlay is reported and skipped.
  if (!a.report.empty()) {
    try {
      GripperSpec spec = cfg.gripper;
      if (!a.model.empty()) spec = load_archive(a.model).grasps.spec;
      const Json report = read_json(a.report);
      const Json& ranked = report.at("ranked");
      for (std::size_t k = 0; k < std::min(a.top, ranked.size()); ++k) {
        GripperConfig c;
        c.wrist = pose_from_json(ranked[k].at("wrist"));
        const Json& j = ranked[k].at("joints");
        if (!j.is_array() || j.size() != kJointCount) throw DataError("joints: expected 14 values");
        for (std::size_t d = 0; d < kJointCount; ++d) c.joints[static_cast<Eigen::Index>(d)] = j[d].get<double>();
        const auto segs = gripper_segments(spec, c);
        layers.links.insert(layers.links.end(), segs.begin(), segs.end());
      }
    } catch (const std::exception& e) {
      err << "warning: skipping grasp overlay: " << e.what() << '\n';
    }
  }
  for (const auto& q : a.queries) {
    try {
      const auto pts = read_query_centres(q);
      layers.kernels.insert(layers.kernels.end(), pts.begin(), pts.end());
    } catch (const std::exception& e) {
      err << "warning: skipping kernel overlay: " << e.what() << '\n';
    }
  }
  PlotOptions po;
  po.title = a.title;
  write_atomic(a.output, render_svg(layers, po));
  out << "wrote " << a.output << '\n';
  return kSuccess;
}

// --- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::string samples;
  std::string output;
  std::size_t joints = kActivePerFinger;
  double alpha = 1.0;
  std::size_t max_iters = 200;
};

int cmd_calibrate(const CalibrateArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (!(a.alpha > 0.0 && a.alpha <= 1.0)) throw UsageError("--alpha must be in (0, 1]");
  KinematicChain chain = finger_chain(cfg.gripper);
  if (a.joints != chain.size())
    throw UsageError("--joints must match the finger chain (" + std::to_string(chain.size()) + " joints)");
  std::ifstream in(a.samples);
  if (!in) throw DataError(a.samples + ": cannot open");
  std::vector<CalibrationSample> samples = read_calibration_csv(in, a.joints);
  if (a.alpha < 1.0) samples = filter_samples(samples, a.alpha);

  CalibrationOptions co;
  co.max_iters = a.max_iters;
  const CalibrationResult r = fit_calibration(samples, chain, LinearSensorModel::identity(a.joints), co);
  const Json j = {{"format", "rpgrasp-calibration"},
                  {"samples", a.samples},
                  {"alpha", a.alpha},
                  {"model", to_json(r.model)},
                  {"joint_to_tracker", to_json(r.joint_to_tracker)},
                  {"residual", r.residual},
                  {"iterations", r.iterations},
                  {"history", r.history}};
  write_atomic(a.output, j.dump(1) + "\n");
  out << "fitted " << a.joints << " joints from " << samples.size() << " samples in " << r.iterations
      << " iterations, residual " << print_double(r.residual) << '\n';
  out << "wrote " << a.output << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grasp learning and planning for a reconfigurable three-finger gripper"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON configuration (defaults to $RPGRASP_CONFIG)");
  app.add_option("--seed", seed, "Seed for every random choice");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Learn grasp models from demonstrations");
  t->add_option("demos", train.demos, "Demonstration files")->required();
  t->add_option("-o,--output", train.output, "Model archive to write")->required();
  t->add_option("--gripper", train.gripper, "Gripper description (JSON)");
  t->add_option("--bandwidths", train.bandwidths, "sigma_p,sigma_q,sigma_r1,sigma_r2");
  t->add_flag("--optimize-contacts", train.optimize_contacts, "Refine each demonstration before learning");
  t->add_option("--trajectories", train.trajectories, "Reconfiguration trajectory library (JSON)");
  t->add_flag("--synthetic-trajectories", train.synthetic_trajectories, "Store a generated trajectory library");
  t->add_option("--sensor", train.sensor, "Sensor calibration written by 'calibrate'");

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "Plan grasps on a test cloud");
  i->add_option("model", infer.model, "Model archive")->required();
  i->add_option("cloud", infer.cloud, "Test cloud (PLY or CSV)")->required();
  i->add_option("-o,--output", infer.output, "Report to write (JSON)")->required();
  i->add_option("--csv", infer.csv, "Candidate table (defaults to the report path with .csv)");
  i->add_option("--candidates", infer.candidates, "Number of optimized candidates");
  i->add_option("--budget", infer.budget, "Score evaluations per candidate");
  i->add_option("--query-kernels", infer.query_kernels, "Kernels per query density");
  i->add_option("--obstacle", infer.obstacles, "Half-space nx,ny,nz,offset; points with n.x < offset are blocked");
  i->add_option("--dump-queries", infer.dump_queries, "Directory for query density CSVs");

  ReconfigArgs reconfig;
  auto* r = app.add_subcommand("plan-reconfig", "Plan the arm motions that reconfigure the RP-joints");
  r->add_option("model", reconfig.model, "Model archive with a trajectory library")->required();
  r->add_option("--current", reconfig.current, "Current RP angles a,b")->required();
  r->add_option("--target", reconfig.target, "Target RP angles a,b");
  r->add_option("--report", reconfig.report, "Take the target from a grasp in an inference report");
  r->add_option("--rank", reconfig.rank, "Rank of that grasp (1 = best)");
  r->add_option("--out-dir", reconfig.out_dir, "Directory for the plan files")->required();
  r->add_option("--delta", reconfig.delta, "Angles closer than this are left alone (rad)");
  r->add_flag("--degrees", reconfig.degrees, "Angles on the command line are in degrees");
  r->add_flag("--no-share", reconfig.no_share, "Do not reuse a common approach prefix");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-scene", "Generate a single-view synthetic point cloud");
  s->add_option("--primitive", synth.primitives,
                "sphere:R | cylinder:R:L[:nocaps] | box:X:Y:Z | plane:H, optionally @x,y,z[,roll,pitch,yaw]")
      ->required();
  s->add_option("--pose", synth.pose, "Scene pose x,y,z[,roll,pitch,yaw]");
  s->add_option("--view", synth.view, "Camera viewing direction");
  s->add_option("--points", synth.points, "Number of visible points");
  s->add_option("-o,--output", synth.output, "PLY file to write")->required();
  s->add_option("--demo-out", synth.demo_out, "Also write a pinch demonstration on the first cylinder");
  s->add_option("--pinch-offset", synth.pinch_offset, "Pinch position along the cylinder axis (m)");
  s->add_option("--grasp-id", synth.grasp_id, "Grasp id of the demonstration");
  s->add_option("--label", synth.label, "Label of the demonstration");

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "Draw orthographic SVG projections");
  p->add_option("--cloud", plot.cloud, "Point cloud")->required();
  p->add_option("--report", plot.report, "Inference report whose top grasps are drawn");
  p->add_option("--model", plot.model, "Model archive providing the gripper geometry");
  p->add_option("--top", plot.top, "Number of ranked grasps to draw");
  p->add_option("--queries", plot.queries, "Query density CSVs whose kernel centres are drawn");
  p->add_option("--title", plot.title, "Figure title");
  p->add_option("-o,--output", plot.output, "SVG file to write")->required();

  CalibrateArgs calib;
  auto* c = app.add_subcommand("calibrate", "Fit the joint sensor model from tracker recordings");
  c->add_option("samples", calib.samples, "Calibration CSV")->required();
  c->add_option("-o,--output", calib.output, "Calibration JSON to write")->required();
  c->add_option("--joints", calib.joints, "Joints in the calibrated finger");
  c->add_option("--alpha", calib.alpha, "Low-pass factor in (0, 1]; 1 disables filtering");
  c->add_option("--max-iters", calib.max_iters, "Iteration limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    const RunConfig cfg =
        load_run_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (t->parsed()) return cmd_train(train, cfg, seed, out);
    if (i->parsed()) return cmd_infer(infer, cfg, seed, out);
    if (r->parsed()) return cmd_plan_reconfig(reconfig, cfg, out);
    if (s->parsed()) return cmd_synth_scene(synth, cfg, seed, out);
    if (p->parsed()) return cmd_plot(plot, cfg, out, err);
    if (c->parsed()) return cmd_calibrate(calib, cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace rpgrasp::cli

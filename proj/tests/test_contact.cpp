#include "rpgrasp/contact.hpp"
#include "rpgrasp/synthetic.hpp"

#include "support.hpp"

namespace rpgrasp {
namespace {

struct CylinderDemo {
  GripperSpec spec = GripperSpec::defaults();
  PointCloud cloud;
  FeatureExtraction features;
  GripperConfig config;
};

CylinderDemo make_demo(double contact = 0.0, std::uint64_t seed = 1) {
  CylinderDemo d;
  SceneSpec scene;
  scene.primitives.push_back({Cylinder{0.04, 0.16, true}, Pose()});
  scene.view = Eigen::Vector3d(-0.5, 0.0, -1.0);
  scene.points = 2000;
  d.cloud = generate_scene(scene, seed);
  FeatureOptions fo;
  fo.radius = 0.01;
  d.features = extract_features(d.cloud, fo);
  const CloudCollider collider(d.cloud.points);
  CloseOptions co;
  co.contact = contact;
  d.config = close_fingers(d.spec, cylinder_pinch(d.spec, 0.04, 0.03), collider, co);
  return d;
}

Demonstration as_demo(const CylinderDemo& d, const Pose& t = Pose()) {
  std::vector<SurfaceFeature> fs = d.features.features;
  for (auto& f : fs) f.frame = compose(t, f.frame);
  GripperConfig cfg = d.config;
  cfg.wrist = compose(t, cfg.wrist);
  return Demonstration{7, "cyl", FeatureDensity(fs, {}, Bandwidth{}), cfg};
}

TEST(Contact, RelativePoseIsFeatureInverseTimesLink) {
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Pose s = test::random_pose(rng), v = test::random_pose(rng);
    const Eigen::Matrix4d expected = test::matrix_oracle(v).inverse() * test::matrix_oracle(s);
    EXPECT_LE((test::matrix_oracle(relative_pose(s, v)) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Contact, LearnedKernelsFollowReceptiveField) {
  const CylinderDemo d = make_demo();
  const Demonstration demo = as_demo(d);
  const auto fields = default_receptive_fields();
  const LinkPoses links = forward_kinematics(d.spec, d.config);
  for (std::size_t i = 0; i < kLinkCount; ++i) {
    const ContactModel m = learn_contact_model(demo, d.spec, fields[i]);
    EXPECT_EQ(m.link, i);
    EXPECT_EQ(m.grasp_id, 7);
    // Oracle: every feature whose receptive weight is positive, in feature order.
    std::vector<double> w;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < demo.object.size(); ++j) {
      const double dist = capsule_signed_distance(d.spec.capsule(i), links[i], demo.object.feature(j).frame.position());
      const double f = dist > fields[i].cutoff ? 0.0 : std::exp(-0.5 * std::pow(std::max(dist, 0.0) / 0.01, 2));
      if (f * demo.object.weight(j) > 0.0) {
        w.push_back(f * demo.object.weight(j));
        idx.push_back(j);
      }
    }
    ASSERT_EQ(m.kernels.size(), w.size()) << "link " << i;
    double total = 0.0;
    for (double x : w) total += x;
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      EXPECT_NEAR(m.kernels[k].weight, w[k] / total, 1e-15);
      EXPECT_EQ(m.kernels[k].curvature, demo.object.feature(idx[k]).curvature);
      EXPECT_TRUE(test::poses_near(compose(demo.object.feature(idx[k]).frame, m.kernels[k].relative), links[i], 1e-12));
      sum += m.kernels[k].weight;
    }
    if (!w.empty()) EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Contact, ModelIsInvariantToRigidMotionOfDemo) {
  const CylinderDemo d = make_demo();
  const auto fields = default_receptive_fields();
  const auto base = learn_contact_models(as_demo(d), d.spec, fields);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto moved = learn_contact_models(as_demo(d, test::random_pose(rng, 2.0)), d.spec, fields);
    for (std::size_t i = 0; i < kLinkCount; ++i) {
      ASSERT_EQ(moved[i].kernels.size(), base[i].kernels.size());
      for (std::size_t k = 0; k < base[i].kernels.size(); ++k) {
        EXPECT_TRUE(test::poses_near(moved[i].kernels[k].relative, base[i].kernels[k].relative, 1e-9));
        EXPECT_NEAR(moved[i].kernels[k].weight, base[i].kernels[k].weight, 1e-9);
      }
    }
  }
}

TEST(Contact, ModelEvaluateIsWeightedMixture) {
  ContactModel m;
  m.kernels = {{Pose::translation(0.01, 0, 0), Eigen::Vector2d(10, 1), 0.3},
               {Pose::rotation(Eigen::Vector3d::UnitZ(), 0.2), Eigen::Vector2d(20, 0), 0.7}};
  const Pose u = Pose::translation(0.005, 0.002, 0.0);
  const Eigen::Vector2d r(12, 1);
  double expected = 0.0, marginal = 0.0;
  for (const auto& k : m.kernels) {
    expected += k.weight * factored_kernel(u, r, k.relative, k.curvature, m.bandwidth);
    marginal += k.weight * descriptor_kernel(r, k.curvature, m.bandwidth.sigma_r);
  }
  EXPECT_NEAR(m.evaluate(u, r), expected, 1e-12 * expected);
  EXPECT_NEAR(m.descriptor_marginal(r), marginal, 1e-15);
  EXPECT_TRUE(ContactModel{}.empty());
}

TEST(Collision, NoPenetrationGivesExactlyOne) {
  const GripperSpec spec = GripperSpec::defaults();
  const std::vector<Eigen::Vector3d> far{Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-1, 0, 0)};
  const CollisionResult r = collision_value(far, spec, GripperConfig{}, CollisionParams{});
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.log_value, 0.0);
  EXPECT_EQ(r.total(), 0.0);
}

TEST(Collision, SinglePointMatchesAnalyticPenetration) {
  const GripperSpec spec = GripperSpec::defaults();
  const CollisionParams params;
  const GripperConfig cfg;
  const Pose link = forward_kinematics(spec, cfg)[1];
  const Capsule cap = spec.capsule(1);
  for (double depth : {0.001, 0.003, 0.006}) {
    // Point above the middle of link 1, `depth` inside its surface.
    const Eigen::Vector3d p = link.transform_point(Eigen::Vector3d(0.5 * cap.length, 0.0, cap.radius - depth));
    const CollisionResult r = collision_value(std::vector<Eigen::Vector3d>{p}, spec, cfg, params);
    const double expected = std::expm1(params.beta * depth * depth);
    EXPECT_NEAR(r.per_link[1], expected, 1e-12 * expected + 1e-18);
    for (std::size_t i = 0; i < kLinkCount; ++i)
      if (i != 1) EXPECT_EQ(r.per_link[i], 0.0);
    EXPECT_NEAR(r.log_value, -params.gamma * expected, 1e-15);
    EXPECT_NEAR(r.value, std::exp(-params.gamma * expected), 1e-15);
  }
}

TEST(Collision, DeeperPenetrationStrictlyLowersValue) {
  const GripperSpec spec = GripperSpec::defaults();
  const GripperConfig cfg;
  const LinkPoses links = forward_kinematics(spec, cfg);
  Rng rng(3);
  std::uniform_int_distribution<std::size_t> link(0, kLinkCount - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t i = link(rng);
    const Capsule cap = spec.capsule(i);
    const double along = u(rng) * cap.length;
    const double angle = 2 * std::numbers::pi * u(rng);
    const double d1 = 0.0005 + 0.004 * u(rng);
    const double d2 = d1 + 0.0005 + 0.002 * u(rng);
    auto point = [&](double depth) {
      const double r = cap.radius - depth;
      return links[i].transform_point(Eigen::Vector3d(along, r * std::cos(angle), r * std::sin(angle)));
    };
    const auto a = collision_value(std::vector<Eigen::Vector3d>{point(d1)}, spec, cfg, CollisionParams{});
    const auto b = collision_value(std::vector<Eigen::Vector3d>{point(d2)}, spec, cfg, CollisionParams{});
    EXPECT_LT(b.log_value, a.log_value);
    EXPECT_LT(a.log_value, 0.0);
  }
}

TEST(Collision, ParamsAreValidated) {
  CollisionParams p;
  p.gamma = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ContactMass, MatchesBruteForceSum) {
  const CylinderDemo d = make_demo();
  const Demonstration demo = as_demo(d);
  const auto fields = default_receptive_fields();
  const LinkPoses links = forward_kinematics(d.spec, d.config);
  double expected = 0.0;
  for (std::size_t i = 0; i < kLinkCount; ++i)
    for (std::size_t j = 0; j < demo.object.size(); ++j)
      expected += demo.object.weight(j) *
                  fields[i].weight_at_distance(capsule_signed_distance(d.spec.capsule(i), links[i], demo.object.feature(j).frame.position()));
  EXPECT_NEAR(contact_mass(demo.object, d.spec, d.config, fields), expected, 1e-12);
  EXPECT_GT(expected, 0.0);
}

TEST(Kinaesthetic, RemovesPenetrationWithoutLosingContact) {
  const CylinderDemo d = make_demo(-0.004);
  const Demonstration demo = as_demo(d);
  const auto fields = default_receptive_fields();
  KinaestheticOptions ko;
  ko.budget = 1500;
  ko.seed = 5;
  const KinaestheticResult r = kinaesthetic_optimize(demo, d.spec, fields, CollisionParams{}, ko);
  EXPECT_GT(r.collision_initial, 0.0);
  EXPECT_GE(r.objective_final, r.objective_initial);
  EXPECT_LT(r.collision_final, r.collision_initial);
  EXPECT_LE(r.evaluations, ko.budget);
  EXPECT_TRUE(d.spec.within_limits(r.config.joints));
  // Stays inside the neighbourhood of the demonstration.
  EXPECT_LE((r.config.wrist.position() - d.config.wrist.position()).cwiseAbs().maxCoeff(), ko.eps_position + 1e-12);
  EXPECT_LE(angular_distance(r.config.wrist.orientation(), d.config.wrist.orientation()), ko.eps_orientation + 1e-9);

  const KinaestheticResult again = kinaesthetic_optimize(demo, d.spec, fields, CollisionParams{}, ko);
  EXPECT_TRUE(test::bit_equal(again.config.wrist, r.config.wrist));
  EXPECT_EQ(again.config.joints, r.config.joints);
}

TEST(Kinaesthetic, CollisionFreeDemoIsKeptOrImproved) {
  const CylinderDemo d = make_demo(0.002);
  const Demonstration demo = as_demo(d);
  const auto fields = default_receptive_fields();
  KinaestheticOptions ko;
  ko.budget = 300;
  const auto r = kinaesthetic_optimize(demo, d.spec, fields, CollisionParams{}, ko);
  EXPECT_GE(r.objective_final, r.objective_initial);
  EXPECT_GE(r.mass_final / r.mass_initial - r.collision_final, 1.0 - 1e-12);
}

}  // namespace
}  // namespace rpgrasp

#include "rpgrasp/error.hpp"
#include "rpgrasp/query_density.hpp"

#include "support.hpp"

#include <sstream>

namespace rpgrasp {
namespace {

ContactModel two_sided_model() {
  ContactModel m;
  m.link = 3;
  m.grasp_id = 2;
  m.kernels = {{Pose::translation(0, 0, 0.05), Eigen::Vector2d(10, 0), 0.5},
               {Pose::translation(0, 0, -0.05), Eigen::Vector2d(-10, 0), 0.5}};
  return m;
}

FeatureDensity flat_patch(const Eigen::Vector2d& curvature, std::uint64_t seed, const Pose& t = Pose(),
                          Bandwidth bw = Bandwidth{}) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  std::vector<SurfaceFeature> fs(60);
  for (auto& f : fs) {
    f.frame = compose(t, compose(Pose::translation(u(rng), u(rng), 0.0), Pose::rotation(Eigen::Vector3d::UnitZ(), 10 * u(rng))));
    f.curvature = curvature;
  }
  return FeatureDensity(fs, {}, bw);
}

TEST(QueryDensity, FastEvaluationEqualsNaiveMixture) {
  Rng rng(1);
  std::vector<QueryKernel> ks(40);
  for (auto& k : ks) k = {test::random_pose(rng, 0.03), std::uniform_real_distribution<double>(0.1, 1.0)(rng)};
  Bandwidth bw;
  const QueryDensity qd(0, 1, ks, bw, 1.0);
  double total = 0.0;
  for (const auto& k : ks) total += k.weight;
  for (int trial = 0; trial < 300; ++trial) {
    // Mix of poses near kernels (large values) and far away (underflow region).
    const Pose s = trial % 3 == 0 ? test::random_pose(rng, 0.5)
                                  : compose(ks[trial % ks.size()].pose, test::random_pose(rng, 0.01));
    double naive = 0.0;
    for (const auto& k : ks) naive += k.weight / total * pose_kernel(s, k.pose, bw);
    EXPECT_NEAR(qd.evaluate(s), naive, 1e-12 * naive + 1e-300);
    EXPECT_EQ(eval_query(qd, s), qd.evaluate(s));
  }
  double sum = 0.0;
  for (const auto& k : qd.kernels()) sum += k.weight;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(QueryDensity, ScaledMultipliesEvaluationOnly) {
  Rng rng(2);
  std::vector<QueryKernel> ks(5);
  for (auto& k : ks) k = {test::random_pose(rng, 0.02), 1.0};
  const QueryDensity qd(0, 1, ks, Bandwidth{}, 1.0);
  const QueryDensity big = qd.scaled(7.5);
  EXPECT_EQ(big.scale(), 7.5);
  for (int k = 0; k < 20; ++k) {
    const Pose s = compose(ks[k % 5].pose, test::random_pose(rng, 0.005));
    EXPECT_NEAR(big.evaluate(s), 7.5 * qd.evaluate(s), 1e-14 * big.evaluate(s));
  }
  EXPECT_TRUE(test::bit_equal(sample_query(big, 9), sample_query(qd, 9)));
  EXPECT_THROW(qd.scaled(0.0), std::invalid_argument);
  EXPECT_THROW(qd.scaled(-1.0), std::invalid_argument);
}

TEST(QueryDensity, RejectsInvalidKernels) {
  EXPECT_THROW(QueryDensity(0, 0, {{Pose(), -1.0}}, Bandwidth{}, 1.0), std::invalid_argument);
  EXPECT_THROW(QueryDensity(0, 0, {{Pose(), 0.0}, {Pose(), 0.0}}, Bandwidth{}, 1.0), std::invalid_argument);
}

TEST(QueryDensity, EmptyModelGivesEmptyDensity) {
  ContactModel m;
  m.link = 4;
  const QueryDensity qd = build_query_density(m, flat_patch(Eigen::Vector2d(10, 0), 3), 100, 1);
  EXPECT_TRUE(qd.empty());
  EXPECT_EQ(qd.link(), 4u);
  EXPECT_EQ(qd.evaluate(Pose()), 0.0);
  EXPECT_EQ(qd.mass(), 0.0);
  EXPECT_THROW(sample_query(qd, 1), std::invalid_argument);
}

TEST(QueryDensity, DescriptorMismatchIsDataError) {
  ContactModel m = two_sided_model();
  m.bandwidth.sigma_r = Eigen::Vector2d(0.01, 0.01);
  // Far enough in descriptor space that every Gaussian factor underflows.
  EXPECT_THROW(build_query_density(m, flat_patch(Eigen::Vector2d(500, 0), 4), 50, 1), DataError);
}

TEST(QueryDensity, ConditionsOnSampledDescriptor) {
  const ContactModel m = two_sided_model();
  // A tight descriptor bandwidth on the test side keeps sampled descriptors at (10, 0).
  Bandwidth sharp;
  sharp.sigma_r = Eigen::Vector2d(1e-6, 1e-6);
  const QueryDensity qd = build_query_density(m, flat_patch(Eigen::Vector2d(10, 0), 5, Pose(), sharp), 500, 7);
  EXPECT_EQ(qd.link(), 3u);
  EXPECT_EQ(qd.grasp_id(), 2);
  ASSERT_EQ(qd.size(), 500u);
  std::size_t above = 0;
  for (const auto& k : qd.kernels()) above += k.pose.position().z() > 0.0;
  // Kernel B's descriptor factor is exp(-8) of kernel A's.
  EXPECT_GE(above, 495u);
  // Every sample carries the same descriptor, so the mass is the model marginal there.
  EXPECT_NEAR(qd.mass(), m.descriptor_marginal(Eigen::Vector2d(10, 0)), 1e-9);
  // Query poses compose a test feature frame with a perturbed contact-relative pose.
  for (const auto& k : qd.kernels()) {
    EXPECT_NEAR(std::abs(k.pose.position().z()), 0.05, 0.06);
    EXPECT_LE(k.pose.position().head<2>().norm(), 0.15);
  }
}

TEST(QueryDensity, EquivariantUnderRigidMotionOfTestCloud) {
  const ContactModel m = two_sided_model();
  const QueryDensity base = build_query_density(m, flat_patch(Eigen::Vector2d(8, 1), 6), 200, 11);
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Pose t = test::random_pose(rng, 1.0);
    const QueryDensity moved = build_query_density(m, flat_patch(Eigen::Vector2d(8, 1), 6, t), 200, 11);
    ASSERT_EQ(moved.size(), base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      EXPECT_TRUE(test::poses_near(moved.kernels()[k].pose, compose(t, base.kernels()[k].pose), 1e-9));
      EXPECT_NEAR(moved.kernels()[k].weight, base.kernels()[k].weight, 1e-12);
    }
    const Pose s = base.kernels()[trial].pose;
    EXPECT_NEAR(moved.evaluate(compose(t, s)), base.evaluate(s), 1e-8 * base.evaluate(s));
  }
}

TEST(QueryDensity, SamplesConcentrateAroundKernel) {
  const Pose centre = Pose(Eigen::Vector3d(0.1, -0.2, 0.3), Eigen::Quaterniond(0.8, 0.0, 0.6, 0.0));
  const QueryDensity qd(0, 0, {{centre, 1.0}}, Bandwidth{}, 1.0);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  double spread = 0.0;
  const int n = 5000;
  Rng rng(13);
  for (int k = 0; k < n; ++k) {
    const Pose s = qd.sample(rng);
    mean += s.position();
    spread += 1.0 - std::abs(s.orientation().coeffs().dot(centre.orientation().coeffs()));
  }
  mean /= n;
  spread /= n;
  EXPECT_LE((mean - centre.position()).norm(), 4 * 0.01 * std::sqrt(3.0 / n));
  const double kappa = Bandwidth{}.kappa();
  EXPECT_NEAR(spread, 1.5 / kappa, 0.1 * 1.5 / kappa);
}

TEST(QueryDensity, CsvHasOneRowPerKernel) {
  const QueryDensity qd(0, 0, {{Pose::translation(1, 2, 3), 1.0}, {Pose(), 3.0}}, Bandwidth{}, 1.0);
  std::ostringstream out;
  write_query_csv(out, qd);
  EXPECT_EQ(out.str(), "px,py,pz,qw,qx,qy,qz,weight\n1,2,3,1,0,0,0,0.25\n0,0,0,1,0,0,0,0.75\n");
}

}  // namespace
}  // namespace rpgrasp

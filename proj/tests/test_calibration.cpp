#include "rpgrasp/calibration.hpp"
#include "rpgrasp/error.hpp"

#include "calibration_fixture.hpp"
#include "support.hpp"

#include <iomanip>
#include <sstream>

namespace rpgrasp {
namespace {

TEST(LowPass, MatchesRecurrence) {
  const std::vector<double> x{1.0, 3.0, -2.0, 0.5, 4.0};
  const double a = 0.3;
  std::vector<double> y{x[0]};
  for (std::size_t k = 1; k < x.size(); ++k) y.push_back(a * x[k] + (1 - a) * y.back());
  const auto f = low_pass(x, a);
  ASSERT_EQ(f.size(), y.size());
  for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(f[k], y[k], 1e-15);
  EXPECT_EQ(low_pass(x, 1.0), x);
  EXPECT_THROW(low_pass({}, 0.5), std::invalid_argument);
  EXPECT_THROW(low_pass(x, 0.0), std::invalid_argument);
  EXPECT_THROW(low_pass(x, 1.5), std::invalid_argument);
}

TEST(Calibration, ChainPoseMatchesGripperFlexionChain) {
  const GripperSpec spec = GripperSpec::defaults();
  const KinematicChain chain = finger_chain(spec);
  ASSERT_EQ(chain.size(), 4u);
  GripperConfig cfg;
  cfg.joints[0] = 0.3;
  cfg.joints[1] = 0.5;
  cfg.joints[2] = -0.1;
  cfg.joints[3] = 1.0;
  const LinkPoses links = forward_kinematics(spec, cfg);
  const Eigen::Vector4d h(0.3, 0.5, -0.1, 1.0);
  // Proximal link frame to distal link frame.
  EXPECT_TRUE(test::poses_near(chain_pose(chain, h), compose(inverse(links[0]), links[4]), 1e-12));
  EXPECT_THROW(chain_pose(chain, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST(Calibration, NoiselessRecoveryIsExact) {
  const KinematicChain chain = finger_chain(GripperSpec::defaults());
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto truth = test::synthetic_calibration(chain, 60, 0.0, seed);
    const auto r = fit_calibration(truth.samples, chain, LinearSensorModel::identity(4));
    EXPECT_LE((r.model.gain - truth.model.gain).cwiseAbs().maxCoeff(), 1e-6) << seed;
    EXPECT_LE((r.model.offset - truth.model.offset).cwiseAbs().maxCoeff(), 1e-6) << seed;
    EXPECT_TRUE(test::poses_near(r.joint_to_tracker, truth.joint_to_tracker, 1e-6)) << seed;
    EXPECT_NEAR(r.model.tendon_gain, truth.model.tendon_gain, 1e-6);
    EXPECT_NEAR(r.model.tendon_offset, truth.model.tendon_offset, 1e-6);
    EXPECT_LE(r.residual, 1e-12);
  }
}

TEST(Calibration, ResidualNeverIncreases) {
  const KinematicChain chain = finger_chain(GripperSpec::defaults());
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto truth = test::synthetic_calibration(chain, 80, 0.01, seed);
    const auto r = fit_calibration(truth.samples, chain, LinearSensorModel::identity(4));
    ASSERT_FALSE(r.history.empty());
    EXPECT_EQ(r.history.size(), r.iterations);
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
    EXPECT_EQ(r.residual, r.history.back());
    EXPECT_NEAR(calibration_residual(truth.samples, chain, r.model, r.joint_to_tracker), r.residual, 1e-12);
  }
}

TEST(Calibration, RejectsDegenerateInput) {
  const KinematicChain chain = finger_chain(GripperSpec::defaults());
  auto truth = test::synthetic_calibration(chain, 5, 0.0, 4);
  EXPECT_THROW(fit_calibration(truth.samples, chain, LinearSensorModel::identity(4)), DataError);
  truth = test::synthetic_calibration(chain, 20, 0.0, 4);
  for (auto& s : truth.samples) s.sensors[2] = 0.5;
  EXPECT_THROW(fit_calibration(truth.samples, chain, LinearSensorModel::identity(4)), DataError);
  EXPECT_THROW(fit_calibration(truth.samples, chain, LinearSensorModel::identity(3)), std::invalid_argument);
}

void write_csv(std::ostream& out, const std::vector<CalibrationSample>& samples, bool timestamp) {
  out << std::setprecision(17);
  if (timestamp) out << "t,";
  out << "s0,s1,s2,s3,motor,bpx,bpy,bpz,bqw,bqx,bqy,bqz,tpx,tpy,tpz,tqw,tqx,tqy,tqz\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (timestamp) out << 0.01 * k << ',';
    for (int j = 0; j < 4; ++j) out << s.sensors[j] << ',';
    out << s.motor;
    for (const Pose* p : {&s.base, &s.tracker}) {
      const auto& q = p->orientation();
      out << ',' << p->position().x() << ',' << p->position().y() << ',' << p->position().z() << ',' << q.w() << ','
          << q.x() << ',' << q.y() << ',' << q.z();
    }
    out << '\n';
  }
}

TEST(Calibration, CsvRoundTripAndErrors) {
  const KinematicChain chain = finger_chain(GripperSpec::defaults());
  const auto truth = test::synthetic_calibration(chain, 10, 0.0, 5);
  for (bool ts : {false, true}) {
    std::stringstream s;
    write_csv(s, truth.samples, ts);
    const auto back = read_calibration_csv(s, 4);
    ASSERT_EQ(back.size(), truth.samples.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
      EXPECT_EQ(back[k].sensors, truth.samples[k].sensors);
      EXPECT_EQ(back[k].motor, truth.samples[k].motor);
      EXPECT_TRUE(test::poses_near(back[k].tracker, truth.samples[k].tracker, 1e-15));
    }
  }
  std::istringstream wrong("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_calibration_csv(wrong, 4), DataError);
  std::stringstream bad;
  write_csv(bad, truth.samples, false);
  bad << "1,2,x,4,5,0,0,0,1,0,0,0,0,0,0,1,0,0,0\n";
  try {
    read_calibration_csv(bad, 4);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 12"), std::string::npos) << e.what();
  }
}

TEST(Calibration, FilterSamplesSmoothsChannelsOnly) {
  const KinematicChain chain = finger_chain(GripperSpec::defaults());
  const auto truth = test::synthetic_calibration(chain, 8, 0.0, 6);
  const auto f = filter_samples(truth.samples, 0.5);
  std::vector<double> s1, m;
  for (const auto& s : truth.samples) {
    s1.push_back(s.sensors[1]);
    m.push_back(s.motor);
  }
  const auto e1 = low_pass(s1, 0.5), em = low_pass(m, 0.5);
  for (std::size_t k = 0; k < f.size(); ++k) {
    EXPECT_EQ(f[k].sensors[1], e1[k]);
    EXPECT_EQ(f[k].motor, em[k]);
    EXPECT_TRUE(test::bit_equal(f[k].tracker, truth.samples[k].tracker));
  }
}

}  // namespace
}  // namespace rpgrasp

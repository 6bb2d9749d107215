#include "rpgrasp/calibration.hpp"

#include "rpgrasp/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rpgrasp {

namespace {

constexpr std::size_t kPoseResiduals = 12;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

Eigen::Matrix3d project_so3(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

// Pose mismatch of one sample as 12 numbers (rotation block, then translation).
void sample_residual(const CalibrationSample& s, const KinematicChain& chain, const LinearSensorModel& model,
                     const Pose& x, double* out) {
  const Eigen::Matrix4d pred = compose(compose(s.base, chain_pose(chain, apply_model(model, s.sensors))), x).matrix();
  const Eigen::Matrix4d diff = pred - s.tracker.matrix();
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) out[c * 3 + r] = diff(r, c);
  for (int r = 0; r < 3; ++r) out[9 + r] = diff(r, 3);
}

// Closed-form minimizer of the residual over the tracker transform.
Pose fit_transform(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                   const LinearSensorModel& model) {
  Eigen::Matrix3d rot = Eigen::Matrix3d::Zero();
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();
  for (const auto& s : samples) {
    const Pose y = compose(inverse(compose(s.base, chain_pose(chain, apply_model(model, s.sensors)))), s.tracker);
    rot += y.rotation_matrix();
    trans += y.position();
  }
  const double n = static_cast<double>(samples.size());
  return Pose(trans / n, Eigen::Quaterniond(project_so3(rot / n)));
}

struct Params {
  LinearSensorModel model;
  Pose x;
};

// Parameter vector: gains (n), offsets of joints 0..n-2, tracker perturbation (6).
Params unpack(const Params& base, const Eigen::VectorXd& delta) {
  const auto n = base.model.gain.size();
  Params p = base;
  p.model.gain += delta.head(n);
  p.model.offset.head(n - 1) += delta.segment(n, n - 1);
  p.x = compose(base.x, Pose::from_rotation_vector(delta.segment<3>(2 * n - 1), delta.segment<3>(2 * n + 2)));
  return p;
}

Eigen::VectorXd residual_vector(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                                const Params& p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(samples.size() * kPoseResiduals));
  for (std::size_t k = 0; k < samples.size(); ++k)
    sample_residual(samples[k], chain, p.model, p.x, r.data() + k * kPoseResiduals);
  return r;
}

}  // namespace

std::vector<double> low_pass(const std::vector<double>& readings, double alpha) {
  if (readings.empty()) throw std::invalid_argument("low_pass: empty series");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("low_pass: alpha must be in (0, 1]");
  std::vector<double> out(readings.size());
  out[0] = readings[0];
  for (std::size_t k = 1; k < readings.size(); ++k) out[k] = alpha * readings[k] + (1.0 - alpha) * out[k - 1];
  return out;
}

Pose chain_pose(const KinematicChain& chain, const Eigen::VectorXd& h) {
  if (static_cast<std::size_t>(h.size()) != chain.size())
    throw std::invalid_argument("chain_pose: expected " + std::to_string(chain.size()) + " joint values");
  Pose out;
  for (std::size_t i = 0; i < chain.size(); ++i)
    out = compose(out, compose(chain[i].offset, Pose::rotation(chain[i].axis, h[static_cast<Eigen::Index>(i)])));
  return out;
}

KinematicChain finger_chain(const GripperSpec& spec) {
  KinematicChain chain;
  for (std::size_t k = 0; k < kActivePerFinger; ++k)
    chain.push_back({Pose::translation(spec.link_lengths[k], 0.0, 0.0), spec.active_axis});
  return chain;
}

LinearSensorModel LinearSensorModel::identity(std::size_t joints) {
  LinearSensorModel m;
  m.gain = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(joints));
  m.offset = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(joints));
  return m;
}

void LinearSensorModel::validate() const {
  if (gain.size() == 0 || gain.size() != offset.size()) throw std::invalid_argument("LinearSensorModel: size mismatch");
  if (!gain.allFinite() || !offset.allFinite() || (gain.array() == 0.0).any() || !std::isfinite(tendon_gain) ||
      tendon_gain == 0.0 || !std::isfinite(tendon_offset))
    throw std::invalid_argument("LinearSensorModel: gains must be finite and nonzero");
}

Eigen::VectorXd apply_model(const LinearSensorModel& model, const Eigen::VectorXd& sensors) {
  if (sensors.size() != model.gain.size()) throw std::invalid_argument("apply_model: channel count mismatch");
  return model.gain.cwiseProduct(sensors) + model.offset;
}

double apply_tendon(const LinearSensorModel& model, double motor) {
  return model.tendon_gain * motor + model.tendon_offset;
}

double calibration_residual(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                            const LinearSensorModel& model, const Pose& joint_to_tracker) {
  return residual_vector(samples, chain, {model, joint_to_tracker}).squaredNorm();
}

CalibrationResult fit_calibration(const std::vector<CalibrationSample>& samples, const KinematicChain& chain,
                                  const LinearSensorModel& init, const CalibrationOptions& options) {
  init.validate();
  const auto n = init.gain.size();
  if (static_cast<std::size_t>(n) != chain.size()) throw std::invalid_argument("fit_calibration: chain/model size mismatch");
  if (samples.size() < 6) throw DataError("fit_calibration: need at least 6 samples, got " + std::to_string(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.sensors.size() != n || !s.sensors.allFinite() || !std::isfinite(s.motor) || !s.base.is_finite() ||
        !s.tracker.is_finite())
      throw DataError("fit_calibration: invalid sample " + std::to_string(k));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> channel;
    for (const auto& s : samples) channel.push_back(s.sensors[j]);
    if (!(stddev(channel) > options.min_excitation))
      throw DataError("fit_calibration: insufficient excitation on sensor channel " + std::to_string(j));
  }
  std::vector<double> motor;
  for (const auto& s : samples) motor.push_back(s.motor);
  if (!(stddev(motor) > options.min_excitation)) throw DataError("fit_calibration: insufficient motor excitation");

  Params p{init, Pose()};
  p.x = fit_transform(samples, chain, p.model);
  Eigen::VectorXd r = residual_vector(samples, chain, p);
  double cost = r.squaredNorm();

  CalibrationResult out;
  const Eigen::Index dims = 2 * n - 1 + 6;
  double lambda = 1e-3;
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    const double before = cost;
    // Damped Gauss-Newton step on all parameters (forward-difference Jacobian).
    Eigen::MatrixXd jac(r.size(), dims);
    for (Eigen::Index d = 0; d < dims; ++d) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(dims);
      const double h = 1e-7;
      delta[d] = h;
      jac.col(d) = (residual_vector(samples, chain, unpack(p, delta)) - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
      const Eigen::VectorXd step = a.ldlt().solve(-jtr);
      const Params trial = unpack(p, step);
      const Eigen::VectorXd tr = residual_vector(samples, chain, trial);
      if (tr.allFinite() && tr.squaredNorm() < cost) {
        p = trial;
        r = tr;
        cost = tr.squaredNorm();
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
      } else {
        lambda *= 4.0;
      }
    }
    // Closed-form transform refit; accepted only if it does not increase the cost.
    Params refit = p;
    refit.x = fit_transform(samples, chain, p.model);
    const Eigen::VectorXd rr = residual_vector(samples, chain, refit);
    if (rr.squaredNorm() <= cost) {
      p = refit;
      r = rr;
      cost = rr.squaredNorm();
    }
    out.history.push_back(cost);
    out.iterations = it + 1;
    if (before - cost < options.tol) break;
  }

  // Tendon model: motor reading against the total flexion it produces.
  double mr = 0.0, mh = 0.0;
  std::vector<double> flex(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    flex[k] = apply_model(p.model, samples[k].sensors).sum();
    mr += samples[k].motor;
    mh += flex[k];
  }
  mr /= static_cast<double>(samples.size());
  mh /= static_cast<double>(samples.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    sxy += (samples[k].motor - mr) * (flex[k] - mh);
    sxx += (samples[k].motor - mr) * (samples[k].motor - mr);
  }
  p.model.tendon_gain = sxy / sxx;
  p.model.tendon_offset = mh - p.model.tendon_gain * mr;
  if (p.model.tendon_gain == 0.0) throw DataError("fit_calibration: motor reading does not explain finger flexion");

  out.model = p.model;
  out.joint_to_tracker = p.x;
  out.residual = cost;
  return out;
}

std::vector<CalibrationSample> read_calibration_csv(std::istream& in, std::size_t joints) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("calibration log is empty");
  const auto header = split_csv(line);
  const std::size_t expected = joints + 15;
  std::size_t skip = 0;
  if (header.size() == expected + 1 && header.front() == "t") skip = 1;
  else if (header.size() != expected)
    throw DataError("calibration log: expected " + std::to_string(expected) + " columns for " +
                    std::to_string(joints) + " joints, got " + std::to_string(header.size()));

  std::vector<CalibrationSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw DataError("calibration log: malformed row " + std::to_string(row));
    std::vector<double> v;
    try {
      for (std::size_t c = skip; c < cells.size(); ++c) {
        std::size_t used = 0;
        v.push_back(std::stod(cells[c], &used));
      }
    } catch (const std::exception&) {
      throw DataError("calibration log: malformed row " + std::to_string(row));
    }
    CalibrationSample s;
    s.sensors = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(joints));
    s.motor = v[joints];
    auto pose_at = [&](std::size_t o) {
      return Pose(Eigen::Vector3d(v[o], v[o + 1], v[o + 2]), Eigen::Quaterniond(v[o + 3], v[o + 4], v[o + 5], v[o + 6]));
    };
    s.base = pose_at(joints + 1);
    s.tracker = pose_at(joints + 8);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CalibrationSample> filter_samples(const std::vector<CalibrationSample>& samples, double alpha) {
  if (samples.empty()) return {};
  std::vector<CalibrationSample> out = samples;
  const auto n = samples.front().sensors.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> channel;
    for (const auto& s : samples) channel.push_back(s.sensors[j]);
    const auto f = low_pass(channel, alpha);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].sensors[j] = f[k];
  }
  std::vector<double> motor;
  for (const auto& s : samples) motor.push_back(s.motor);
  const auto f = low_pass(motor, alpha);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].motor = f[k];
  return out;
}

}  // namespace rpgrasp

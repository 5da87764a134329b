#include "gaitkit/ekf.hpp"

#include <cmath>
#include <string>

#include "gaitkit/error.hpp"

namespace gaitkit {

namespace {

void symmetrize(Mat6& p) { p = 0.5 * (p + p.transpose()).eval(); }

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument, std::string("EkfConfig.") + name + " must be > 0");
  }
}

}  // namespace

void EkfConfig::validate() const {
  require_positive(gyro_noise_density, "gyro_noise_density");
  require_positive(accel_noise, "accel_noise");
  require_positive(bias_random_walk, "bias_random_walk");
  require_positive(gravity_magnitude, "gravity_magnitude");
  require_positive(initial_attitude_std, "initial_attitude_std");
  require_positive(initial_bias_std, "initial_bias_std");
  if (!(linear_accel_std >= 0.0) || !std::isfinite(linear_accel_std)) {
    throw Error(ErrorKind::InvalidArgument, "EkfConfig.linear_accel_std must be >= 0");
  }
  if (!(accel_gate >= 0.0) || !std::isfinite(accel_gate)) {
    throw Error(ErrorKind::InvalidArgument, "EkfConfig.accel_gate must be >= 0");
  }
}

EkfState ekf_init(const EkfConfig& config, std::span<const Vec3> first_accels) {
  config.validate();
  if (first_accels.size() < kEkfInitWindow) {
    throw Error(ErrorKind::InitFailure, "need at least " + std::to_string(kEkfInitWindow) +
                                            " samples, got " + std::to_string(first_accels.size()));
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& a : first_accels) {
    if (!a.allFinite()) throw Error(ErrorKind::NonFinite, "ekf_init: non-finite accel");
    mean += a;
  }
  mean /= static_cast<double>(first_accels.size());

  const double g = config.gravity_magnitude;
  if (std::abs(mean.norm() - g) > 0.3 * g) {
    throw Error(ErrorKind::InitFailure, "mean accel magnitude " + std::to_string(mean.norm()) +
                                            " m/s² is not within 30% of gravity; sensor not at rest");
  }

  EkfState s;
  s.q = attitude_from_gravity(mean);
  s.bias.setZero();
  s.P.setZero();
  s.P.topLeftCorner<3, 3>().diagonal().setConstant(config.initial_attitude_std *
                                                   config.initial_attitude_std);
  s.P.bottomRightCorner<3, 3>().diagonal().setConstant(config.initial_bias_std *
                                                       config.initial_bias_std);
  return s;
}

EkfState ekf_predict(const EkfState& state, const Vec3& gyro, double dt, const EkfConfig& config) {
  if (!gyro.allFinite()) throw Error(ErrorKind::NonFinite, "ekf_predict: non-finite gyro");
  if (!(dt > 0.0) || dt > 0.1) {
    throw Error(ErrorKind::InvalidArgument, "ekf_predict: dt must be in (0, 0.1] s");
  }

  EkfState next = state;
  const Vec3 omega = gyro - state.bias;

  // First-order integration: q ⊗ [1, ω·dt/2], renormalized.
  if (!omega.isZero(0.0)) {
    const Vec3 half = 0.5 * dt * omega;
    next.q = quat_normalize(quat_multiply(state.q, Quaternion(1.0, half.x(), half.y(), half.z())));
  }

  Mat6 F = Mat6::Identity();
  F.topLeftCorner<3, 3>() -= skew<double>(omega * dt);
  F.topRightCorner<3, 3>() = -dt * Eigen::Matrix3d::Identity();

  Mat6 Q = Mat6::Zero();
  Q.topLeftCorner<3, 3>().diagonal().setConstant(config.gyro_noise_density *
                                                 config.gyro_noise_density * dt);
  Q.bottomRightCorner<3, 3>().diagonal().setConstant(config.bias_random_walk *
                                                     config.bias_random_walk * dt);

  next.P = F * state.P * F.transpose() + Q;
  symmetrize(next.P);
  return next;
}

Vec3 gravity_measurement(const Quaternion& q, double gravity_magnitude) {
  return quat_to_rotmat(q).transpose() * Vec3(0.0, 0.0, gravity_magnitude);
}

Mat36 gravity_measurement_jacobian(const Quaternion& q, double gravity_magnitude) {
  // h(q ⊗ exp(δθ/2)) ≈ (I - [δθ×]) Rᵀg = h + [h×] δθ
  Mat36 H = Mat36::Zero();
  H.leftCols<3>() = skew<double>(gravity_measurement(q, gravity_magnitude));
  return H;
}

EkfUpdate ekf_update(const EkfState& state, const Vec3& accel, const EkfConfig& config) {
  if (!accel.allFinite()) throw Error(ErrorKind::NonFinite, "ekf_update: non-finite accel");

  const double g = config.gravity_magnitude;
  if (std::abs(accel.norm() - g) > config.accel_gate * g) {
    return {state, true};
  }

  const Vec3 innovation = accel - gravity_measurement(state.q, g);
  const Mat36 H = gravity_measurement_jacobian(state.q, g);
  const Eigen::Matrix3d R =
      Eigen::Matrix3d::Identity() * (config.accel_noise * config.accel_noise +
                                     config.linear_accel_std * config.linear_accel_std);

  const Eigen::Matrix3d S = H * state.P * H.transpose() + R;
  const Eigen::Matrix<double, 6, 3> K = state.P * H.transpose() * S.inverse();
  const Eigen::Matrix<double, 6, 1> dx = K * innovation;

  EkfUpdate out{state, false};
  const Mat6 I_KH = Mat6::Identity() - K * H;
  out.state.P = I_KH * state.P * I_KH.transpose() + K * R * K.transpose();
  symmetrize(out.state.P);

  const Vec3 dtheta = dx.head<3>();
  out.state.q = quat_normalize(quat_multiply(state.q, quat_from_rotation_vector(dtheta)));
  out.state.bias = state.bias + dx.tail<3>();
  return out;
}

namespace {

template <typename Sink>
void run_filter(std::span<const ImuSample> samples, const EkfConfig& config,
                double nominal_rate_hz, Sink&& sink) {
  config.validate();
  if (!(nominal_rate_hz > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ekf_run: nominal rate must be > 0");
  }
  if (samples.size() < kEkfInitWindow) {
    throw Error(ErrorKind::InitFailure, "ekf_run: stream shorter than the init window");
  }
  const double max_gap = 3.0 / nominal_rate_hz;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].timestamp_s - samples[i - 1].timestamp_s;
    if (!(dt > 0.0)) {
      throw StreamError(ErrorKind::InvalidArgument, i, "timestamps not strictly increasing");
    }
    if (dt > max_gap + 1e-9) {
      throw StreamError(ErrorKind::Gap, i,
                        "gap of " + std::to_string(dt) + " s exceeds three nominal periods");
    }
  }

  std::vector<Vec3> init_accels;
  init_accels.reserve(kEkfInitWindow);
  for (std::size_t i = 0; i < kEkfInitWindow; ++i) init_accels.push_back(samples[i].accel);
  EkfState state = ekf_init(config, init_accels);

  for (std::size_t i = kEkfInitWindow; i < samples.size(); ++i) {
    const ImuSample& prev = samples[i - 1];
    const ImuSample& cur = samples[i];
    if (!cur.gyro.allFinite() || !prev.gyro.allFinite()) {
      throw StreamError(ErrorKind::NonFinite, i, "non-finite gyro");
    }
    if (!cur.accel.allFinite()) throw StreamError(ErrorKind::NonFinite, i, "non-finite accel");
    const double dt = cur.timestamp_s - prev.timestamp_s;
    state = ekf_predict(state, 0.5 * (prev.gyro + cur.gyro), dt, config);
    EkfUpdate up = ekf_update(state, cur.accel, config);
    state = std::move(up.state);
    sink(cur.timestamp_s, state, up.gated);
  }
}

}  // namespace

std::vector<OrientationSample> ekf_run(std::span<const ImuSample> samples, const EkfConfig& config,
                                       double nominal_rate_hz) {
  std::vector<OrientationSample> out;
  out.reserve(samples.size() > kEkfInitWindow ? samples.size() - kEkfInitWindow : 0);
  run_filter(samples, config, nominal_rate_hz, [&](double t, const EkfState& s, bool gated) {
    out.push_back({t, s.q, gated});
  });
  return out;
}

std::vector<EkfState> ekf_run_states(std::span<const ImuSample> samples, const EkfConfig& config,
                                     double nominal_rate_hz) {
  std::vector<EkfState> out;
  run_filter(samples, config, nominal_rate_hz,
             [&](double, const EkfState& s, bool) { out.push_back(s); });
  return out;
}

}  // namespace gaitkit

#pragma once

// Multiplicative error-state EKF for sensor attitude.
//
// Nominal state: attitude q (sensor -> global, Hamilton) and gyro bias b.
// Error state (6): body-frame attitude error δθ, with q_true = q ⊗ exp(δθ/2),
// and bias error δb. The accelerometer is treated as a noisy gravity reference;
// samples whose magnitude is far from g are gated out. There is no heading
// reference, so yaw is only propagated.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gaitkit/imu_sample.hpp"

namespace gaitkit {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

struct EkfConfig {
  double gyro_noise_density{0.005};  // rad/s/√Hz
  double accel_noise{0.04};          // m/s²
  /// Unmodeled segment acceleration that passes the gate, added to the
  /// accelerometer noise in quadrature. 0 treats the accelerometer as a pure
  /// gravity sensor.
  double linear_accel_std{0.5};      // m/s²
  double bias_random_walk{1e-4};     // rad/s²/√Hz
  double gravity_magnitude{9.81};    // m/s²
  double accel_gate{0.15};           // multiple of g
  double initial_attitude_std{0.05};  // rad
  double initial_bias_std{0.02};      // rad/s

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct EkfState {
  Quaternion q{Quaternion::Identity()};
  Vec3 bias{Vec3::Zero()};
  Mat6 P{Mat6::Identity()};
};

struct EkfUpdate {
  EkfState state;
  bool gated{false};
};

/// Samples needed by ekf_init at the start of every stream (0.25 s at 32 Hz).
constexpr std::size_t kEkfInitWindow = 8;

/// Level the filter from a quasi-static accelerometer window: roll and pitch
/// from the mean specific force, yaw and bias zero.
EkfState ekf_init(const EkfConfig& config, std::span<const Vec3> first_accels);

/// Propagate through dt seconds of bias-corrected rotation rate.
EkfState ekf_predict(const EkfState& state, const Vec3& gyro, double dt, const EkfConfig& config);

/// Gravity-direction measurement update, skipped (gated) when
/// | |accel| - g | > accel_gate * g.
EkfUpdate ekf_update(const EkfState& state, const Vec3& accel, const EkfConfig& config);

/// Predicted accelerometer reading for a sensor at rest: R(q)ᵀ · (0, 0, g).
Vec3 gravity_measurement(const Quaternion& q, double gravity_magnitude);

/// Jacobian of gravity_measurement with respect to the error state.
Mat36 gravity_measurement_jacobian(const Quaternion& q, double gravity_magnitude);

struct OrientationSample {
  double timestamp_s{0};
  Quaternion q{Quaternion::Identity()};
  bool gated{false};
};

/// Runs the filter over one sensor stream. The first kEkfInitWindow samples
/// seed ekf_init; one orientation is emitted for every later sample. The
/// rotation rate used between two samples is the mean of their gyro readings.
/// A StreamError(Gap) names the first sample more than three nominal periods
/// after its predecessor.
std::vector<OrientationSample> ekf_run(std::span<const ImuSample> samples, const EkfConfig& config,
                                       double nominal_rate_hz = kNominalSampleRateHz);

/// Full filter trace for diagnostics and tests: the state after every step.
std::vector<EkfState> ekf_run_states(std::span<const ImuSample> samples, const EkfConfig& config,
                                     double nominal_rate_hz = kNominalSampleRateHz);

}  // namespace gaitkit

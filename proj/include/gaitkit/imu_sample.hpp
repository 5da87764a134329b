#pragma once

#include <vector>

#include "gaitkit/rotation.hpp"

namespace gaitkit {

constexpr int kMaxSensorId = 11;
constexpr double kNominalSampleRateHz = 32.0;

/// One timestamped 6-axis reading. accel in m/s², gyro in rad/s, both in the
/// sensor frame.
struct ImuSample {
  double timestamp_s{0};
  int sensor_id{0};
  Vec3 accel{Vec3::Zero()};
  Vec3 gyro{Vec3::Zero()};
};

using ImuStream = std::vector<ImuSample>;

}  // namespace gaitkit

#pragma once

#include <array>
#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaitkit/ekf.hpp"
#include "gaitkit/imu_sample.hpp"

namespace gaitkit {

enum class Side { Left, Right };
enum class Joint { Hip, Knee, Ankle };

/// Sensor placement along one leg, proximal to distal.
enum class SensorRole { Pelvis, ThighUpper, ThighLower, ShankUpper, ShankLower, Foot };

inline constexpr std::array<Side, 2> kSides{Side::Left, Side::Right};
inline constexpr std::array<Joint, 3> kJoints{Joint::Hip, Joint::Knee, Joint::Ankle};
inline constexpr std::array<SensorRole, 6> kSensorRoles{
    SensorRole::Pelvis,     SensorRole::ThighUpper, SensorRole::ThighLower,
    SensorRole::ShankUpper, SensorRole::ShankLower, SensorRole::Foot};

std::string_view to_string(Side side);
std::string_view to_string(Joint joint);
std::string_view to_string(SensorRole role);
Side parse_side(std::string_view text);
Joint parse_joint(std::string_view text);
SensorRole parse_sensor_role(std::string_view text);

struct JointKey {
  Side side{Side::Left};
  Joint joint{Joint::Knee};

  auto operator<=>(const JointKey&) const = default;
  /// "left_knee", "right_ankle", ...
  std::string name() const;
  static JointKey parse(std::string_view name);
};

/// (proximal, distal) sensor roles straddling each joint.
std::pair<SensorRole, SensorRole> joint_sensor_pair(Joint joint);

struct SensorLayout {
  /// sensor_ids[side][role]
  std::array<std::array<int, 6>, 2> sensor_ids{};

  /// Left leg on ids 0-5, right leg on 6-11, in role order.
  static SensorLayout standard();

  int sensor(Side side, SensorRole role) const {
    return sensor_ids[static_cast<int>(side)][static_cast<int>(role)];
  }
  /// Throws InvalidArgument unless all twelve ids are distinct and in 0..11.
  void validate() const;

  bool operator==(const SensorLayout&) const = default;
};

/// Per-sensor alignment a_s with q_segment = q_sensor ⊗ a_s. Sensors without
/// an entry are treated as already aligned.
struct MountingCalibration {
  std::map<int, Quaternion> alignment;

  Quaternion alignment_for(int sensor_id) const;
};

struct JointAngleSeries {
  Joint joint{Joint::Knee};
  Side side{Side::Left};
  std::vector<double> timestamps;
  std::vector<EulerAngles> angles;   // radians
  std::vector<double> primary_deg;   // flexion component (pitch), degrees

  JointKey key() const { return {side, joint}; }
};

/// Sensors whose standing-window accel variance (trace of the sample
/// covariance) exceeds this are rejected as moving.
constexpr double kQuasiStaticVarianceLimit = 0.5;  // (m/s²)²

/// Neutral-pose zeroing from at least one second of quiet standing: each
/// sensor's alignment cancels the roll/pitch its mean accelerometer reading
/// implies. Rotation about gravity is not observable this way and is left to
/// the shared-heading assumption of the relative joint angles.
MountingCalibration static_calibrate(const std::map<int, ImuStream>& standing_samples,
                                     const SensorLayout& layout);

/// Six series (left hip/knee/ankle, then right) from per-sensor orientation
/// streams on a common tick grid. Throws Misalignment when a paired stream
/// has a different length or timestamps.
std::vector<JointAngleSeries> joint_angles(
    const std::map<int, std::vector<OrientationSample>>& q_streams, const SensorLayout& layout,
    const MountingCalibration& calib);

/// One-tick joint angle: euler(relative_rotation(q_prox ⊗ a_prox, q_dist ⊗ a_dist)).
EulerAngles joint_angle(const Quaternion& q_proximal, const Quaternion& q_distal,
                        const Quaternion& align_proximal = Quaternion::Identity(),
                        const Quaternion& align_distal = Quaternion::Identity());

}  // namespace gaitkit

#include "gaitkit/kinematics.hpp"

#include <cmath>
#include <set>
#include <string>

#include "gaitkit/error.hpp"

namespace gaitkit {

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(Joint joint) {
  switch (joint) {
    case Joint::Hip: return "hip";
    case Joint::Knee: return "knee";
    case Joint::Ankle: return "ankle";
  }
  return "?";
}

std::string_view to_string(SensorRole role) {
  switch (role) {
    case SensorRole::Pelvis: return "pelvis";
    case SensorRole::ThighUpper: return "thigh_upper";
    case SensorRole::ThighLower: return "thigh_lower";
    case SensorRole::ShankUpper: return "shank_upper";
    case SensorRole::ShankLower: return "shank_lower";
    case SensorRole::Foot: return "foot";
  }
  return "?";
}

Side parse_side(std::string_view text) {
  for (Side s : kSides) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown side '" + std::string(text) + "'");
}

Joint parse_joint(std::string_view text) {
  for (Joint j : kJoints) {
    if (to_string(j) == text) return j;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown joint '" + std::string(text) + "'");
}

SensorRole parse_sensor_role(std::string_view text) {
  for (SensorRole r : kSensorRoles) {
    if (to_string(r) == text) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown sensor role '" + std::string(text) + "'");
}

std::string JointKey::name() const {
  return std::string(to_string(side)) + "_" + std::string(to_string(joint));
}

JointKey JointKey::parse(std::string_view name) {
  const auto us = name.find('_');
  if (us == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "bad joint key '" + std::string(name) + "'");
  }
  return {parse_side(name.substr(0, us)), parse_joint(name.substr(us + 1))};
}

std::pair<SensorRole, SensorRole> joint_sensor_pair(Joint joint) {
  switch (joint) {
    case Joint::Hip: return {SensorRole::Pelvis, SensorRole::ThighUpper};
    case Joint::Knee: return {SensorRole::ThighLower, SensorRole::ShankUpper};
    case Joint::Ankle: return {SensorRole::ShankLower, SensorRole::Foot};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown joint");
}

SensorLayout SensorLayout::standard() {
  SensorLayout layout;
  for (int side = 0; side < 2; ++side) {
    for (int role = 0; role < 6; ++role) layout.sensor_ids[side][role] = side * 6 + role;
  }
  return layout;
}

void SensorLayout::validate() const {
  std::set<int> seen;
  for (const auto& leg : sensor_ids) {
    for (int id : leg) {
      if (id < 0 || id > kMaxSensorId) {
        throw Error(ErrorKind::InvalidArgument, "sensor id " + std::to_string(id) + " out of range");
      }
      if (!seen.insert(id).second) {
        throw Error(ErrorKind::InvalidArgument,
                    "sensor id " + std::to_string(id) + " assigned to more than one role");
      }
    }
  }
}

Quaternion MountingCalibration::alignment_for(int sensor_id) const {
  const auto it = alignment.find(sensor_id);
  return it == alignment.end() ? Quaternion::Identity() : it->second;
}

MountingCalibration static_calibrate(const std::map<int, ImuStream>& standing_samples,
                                     const SensorLayout& layout) {
  layout.validate();
  MountingCalibration calib;
  for (Side side : kSides) {
    for (SensorRole role : kSensorRoles) {
      const int id = layout.sensor(side, role);
      const auto it = standing_samples.find(id);
      if (it == standing_samples.end() || it->second.size() < 2) {
        throw Error(ErrorKind::InvalidArgument,
                    "no standing window for sensor " + std::to_string(id));
      }
      const ImuStream& s = it->second;
      const double n = static_cast<double>(s.size());
      const double covered = (s.back().timestamp_s - s.front().timestamp_s) * n / (n - 1.0);
      if (covered < 1.0 - 1e-9) {
        throw Error(ErrorKind::InvalidArgument,
                    "standing window for sensor " + std::to_string(id) + " is shorter than 1 s");
      }

      Vec3 mean = Vec3::Zero();
      for (const ImuSample& x : s) mean += x.accel;
      mean /= n;
      double variance = 0.0;
      for (const ImuSample& x : s) variance += (x.accel - mean).squaredNorm();
      variance /= n;
      if (variance > kQuasiStaticVarianceLimit) {
        throw Error(ErrorKind::QuasiStatic, "sensor " + std::to_string(id) +
                                                " moved during calibration (accel variance " +
                                                std::to_string(variance) + " (m/s²)²)");
      }
      calib.alignment[id] = quat_conjugate(attitude_from_gravity(mean));
    }
  }
  return calib;
}

EulerAngles joint_angle(const Quaternion& q_proximal, const Quaternion& q_distal,
                        const Quaternion& align_proximal, const Quaternion& align_distal) {
  return rotmat_to_euler(relative_rotation(quat_multiply(q_proximal, align_proximal),
                                           quat_multiply(q_distal, align_distal)));
}

std::vector<JointAngleSeries> joint_angles(
    const std::map<int, std::vector<OrientationSample>>& q_streams, const SensorLayout& layout,
    const MountingCalibration& calib) {
  layout.validate();
  auto stream_for = [&](int id) -> const std::vector<OrientationSample>& {
    const auto it = q_streams.find(id);
    if (it == q_streams.end()) {
      throw Error(ErrorKind::InvalidArgument,
                  "no orientation stream for sensor " + std::to_string(id));
    }
    return it->second;
  };

  std::vector<JointAngleSeries> out;
  for (Side side : kSides) {
    for (Joint joint : kJoints) {
      const auto [prox_role, dist_role] = joint_sensor_pair(joint);
      const int prox_id = layout.sensor(side, prox_role);
      const int dist_id = layout.sensor(side, dist_role);
      const auto& prox = stream_for(prox_id);
      const auto& dist = stream_for(dist_id);
      if (prox.size() != dist.size()) {
        throw Error(ErrorKind::Misalignment, "sensors " + std::to_string(prox_id) + " and " +
                                                 std::to_string(dist_id) +
                                                 " have different stream lengths");
      }

      JointAngleSeries series;
      series.joint = joint;
      series.side = side;
      series.timestamps.reserve(prox.size());
      series.angles.reserve(prox.size());
      series.primary_deg.reserve(prox.size());
      const Quaternion a_prox = calib.alignment_for(prox_id);
      const Quaternion a_dist = calib.alignment_for(dist_id);
      for (std::size_t i = 0; i < prox.size(); ++i) {
        if (std::abs(prox[i].timestamp_s - dist[i].timestamp_s) > 1e-9) {
          throw StreamError(ErrorKind::Misalignment, i,
                            "sensors " + std::to_string(prox_id) + " and " +
                                std::to_string(dist_id) + " are not on the same tick grid");
        }
        const EulerAngles e = joint_angle(prox[i].q, dist[i].q, a_prox, a_dist);
        series.timestamps.push_back(prox[i].timestamp_s);
        series.angles.push_back(e);
        series.primary_deg.push_back(rad_to_deg(e.pitch));
      }
      out.push_back(std::move(series));
    }
  }
  return out;
}

}  // namespace gaitkit

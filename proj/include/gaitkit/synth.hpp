#pragma once

// Sagittal-plane leg model used as a ground-truth oracle.
//
// Each leg is a chain pelvis -> thigh -> shank -> foot hinged about the global
// y axis; the pelvis (hip joint) is fixed at the origin with identity
// orientation. Segment frames: x forward, y lateral, z along the segment
// (upwards when standing). A joint angle θ rotates the distal segment by
// Ry(θ) relative to its parent, so the kinematics layer reads θ back as pitch.
//
// Joint waves start at zero after a quiet-standing lead-in:
//   θ(τ) = A/2 · (cos φ − cos(ωτ + φ)) + A₂/2 · (cos φ₂ − cos(2ωτ + φ₂)),
// ω = 2π / stride period, τ = time since walking began. A is the
// peak-to-peak range of the single-harmonic term. During the first stride
// the waves are scaled by a quintic smoothstep so motion starts gently. The right leg runs half a
// stride out of phase. Walking starts from a planted foot, so each stride
// ends with a heel strike at τ = n · period, n = 1..n_strides; quiet
// standing follows the last stride.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "gaitkit/imu_sample.hpp"
#include "gaitkit/kinematics.hpp"
#include "gaitkit/session_io.hpp"

namespace gaitkit {

struct JointWave {
  double amplitude_deg{0};
  double phase_rad{0};
  double amplitude2_deg{0};
  double phase2_rad{0};

  /// Angle, rate and angular acceleration (rad, rad/s, rad/s²) at walking
  /// time tau; zero for tau < 0.
  double angle(double tau, double omega) const;
  double rate(double tau, double omega) const;
};

struct GaitProfile {
  double stride_period_s{1.25};
  int n_strides{20};
  double standing_s{2.0};  // quiet-standing lead-in before the first stride
  JointWave hip{30.0, 3.141592653589793};
  JointWave knee{60.0, 0.0};
  JointWave ankle{25.0, 3.141592653589793};
  double thigh_m{0.45};
  double shank_m{0.43};
  double foot_m{0.26};
  /// Heel-strike shock: a Gaussian vertical acceleration pulse at every foot
  /// contact (knee extended, τ = n · period), full on the foot and scaled
  /// down towards the hip.
  double impact_peak_mps2{15.0};
  double impact_width_s{0.03};  // standard deviation of the pulse
  /// false = quasi-static mode: accelerometers see gravity only.
  bool linear_acceleration{true};
  double gravity_mps2{9.81};

  void validate() const;
  double omega() const;
};

struct NoiseProfile {
  double accel_noise_std{0.05};  // m/s²
  double gyro_noise_std{0.02};   // rad/s
  Vec3 gyro_bias{Vec3::Zero()};  // rad/s, shared by every sensor
  std::map<int, Quaternion> mounting;  // segment -> sensor rotation; identity if absent
  std::uint64_t seed{42};

  static NoiseProfile noiseless();
  void validate() const;
};

/// Random mounting offsets for every sensor of the layout: roll and pitch
/// uniform in ±max_tilt_deg, rotation about the segment's long axis uniform
/// in ±max_axial_deg.
std::map<int, Quaternion> random_mounting(const SensorLayout& layout, double max_tilt_deg,
                                          double max_axial_deg, std::uint64_t seed);

enum class Segment { Pelvis, Thigh, Shank, Foot };
Segment segment_of(SensorRole role);

struct Trajectory {
  double fs{kNominalSampleRateHz};
  std::vector<double> time_s;
  /// joint_angle_rad[side][joint][k]
  std::array<std::array<std::vector<double>, 3>, 2> joint_angle_rad;
  /// segment_orientation[side][segment][k], segment -> global
  std::array<std::array<std::vector<Quaternion>, 4>, 2> segment_orientation;

  std::size_t size() const { return time_s.size(); }
};

/// Samples the model at fs: standing, n_strides strides, standing again.
/// Length is round((2 · standing_s + n_strides · period) · fs).
Trajectory gen_trajectory(const GaitProfile& profile, double fs);

/// Analytic body-frame angular velocity of a segment (rad/s).
Vec3 segment_angular_velocity(const GaitProfile& profile, Side side, Segment segment, double t);

/// Position of a sensor's mounting point in the global frame.
Vec3 sensor_position(const GaitProfile& profile, Side side, SensorRole role, double t);

struct SynthSession {
  double fs{kNominalSampleRateHz};
  std::map<int, ImuStream> streams;
  /// Left-foot contact times, one per stride.
  std::vector<double> event_times_s;
  /// Noise-free accel magnitude statistics over [first event, last event].
  double truth_accel_mean_mps2{0};
  double truth_accel_variance_mps2sq{0};
  Trajectory truth;
};

/// Ideal IMU readings for every sensor of the layout plus ground-truth
/// events. gyro = body rate + bias + noise; accel = Rᵀ(p̈ + impact + g ẑ) +
/// noise with p̈ from a central second difference of the analytic sensor
/// position.
SynthSession synth_imu(const Trajectory& trajectory, const GaitProfile& profile,
                       const NoiseProfile& noise, const SensorLayout& layout);

/// Convenience: gen_trajectory + synth_imu.
SynthSession simulate(const GaitProfile& profile, const NoiseProfile& noise,
                      const SensorLayout& layout, double fs = kNominalSampleRateHz);

/// Writes meta.kv, module_<n>.csv and the ground-truth sidecar (truth.kv,
/// truth_angles.csv) into out_dir, creating it if needed.
void write_session(const SynthSession& session, const GaitProfile& profile,
                   const SessionMeta& meta, const std::filesystem::path& out_dir);

/// Ground-truth sidecar as read back by test harnesses.
struct TruthSidecar {
  int n_strides{0};
  double stride_period_s{0};
  double standing_s{0};
  double sample_rate_hz{0};
  std::vector<double> event_times_s;
  double accel_mean_mps2{0};
  double accel_variance_mps2sq{0};
  double hip_amplitude_deg{0};
  double knee_amplitude_deg{0};
  double ankle_amplitude_deg{0};
};

TruthSidecar read_truth_sidecar(const std::filesystem::path& session_dir);

}  // namespace gaitkit

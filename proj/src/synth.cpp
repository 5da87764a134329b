#include "gaitkit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "gaitkit/error.hpp"
#include "gaitkit/textio.hpp"

namespace gaitkit {

namespace {

constexpr double kHipLateral = 0.1;         // m, half pelvis width
constexpr double kPelvisSensorHeight = 0.05;  // m above the hip joint
constexpr double kSecondDiffStep = 1e-3;    // s

const Vec3 kUp(0.0, 0.0, 1.0);

double side_delay(const GaitProfile& p, Side side) {
  return side == Side::Left ? 0.0 : 0.5 * p.stride_period_s;
}

double walking_time(const GaitProfile& p, Side side, double t) {
  return t - p.standing_s - side_delay(p, side);
}

bool walking(const GaitProfile& p, double tau) {
  return tau >= 0.0 && tau < p.n_strides * p.stride_period_s;
}

// Amplitude envelope: quintic smoothstep over the first stride, then 1.
std::pair<double, double> onset(const GaitProfile& p, double tau) {
  const double x = tau / p.stride_period_s;
  if (x >= 1.0) return {1.0, 0.0};
  const double e = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
  const double de = 30.0 * x * x * (1.0 - x) * (1.0 - x) / p.stride_period_s;
  return {e, de};
}

// Sum of the raw joint waves above a segment.
std::pair<double, double> chain_wave(const GaitProfile& p, Segment seg, double tau) {
  const double w = p.omega();
  double angle = 0.0;
  double rate = 0.0;
  if (seg >= Segment::Thigh) angle += p.hip.angle(tau, w), rate += p.hip.rate(tau, w);
  if (seg >= Segment::Shank) angle += p.knee.angle(tau, w), rate += p.knee.rate(tau, w);
  if (seg >= Segment::Foot) angle += p.ankle.angle(tau, w), rate += p.ankle.rate(tau, w);
  return {angle, rate};
}

double segment_pitch(const GaitProfile& p, Side side, Segment seg, double t) {
  const double tau = walking_time(p, side, t);
  if (!walking(p, tau)) return 0.0;
  return onset(p, tau).first * chain_wave(p, seg, tau).first;
}

double segment_pitch_rate(const GaitProfile& p, Side side, Segment seg, double t) {
  const double tau = walking_time(p, side, t);
  if (!walking(p, tau)) return 0.0;
  const auto [e, de] = onset(p, tau);
  const auto [angle, rate] = chain_wave(p, seg, tau);
  return e * rate + de * angle;
}

double joint_truth(const GaitProfile& p, Side side, const JointWave& wave, double t) {
  const double tau = walking_time(p, side, t);
  if (!walking(p, tau)) return 0.0;
  return onset(p, tau).first * wave.angle(tau, p.omega());
}

Vec3 along(double pitch, const Vec3& local) { return rot_y(pitch) * local; }

Quaternion pitch_quat(double pitch) { return quat_from_axis_angle<double>(Vec3::UnitY(), pitch); }

double impact_scale(Segment seg) {
  switch (seg) {
    case Segment::Pelvis: return 0.0;
    case Segment::Thigh: return 0.4;
    case Segment::Shank: return 0.8;
    case Segment::Foot: return 1.0;
  }
  return 0.0;
}

double impact_pulse(const GaitProfile& p, Side side, double t) {
  if (p.impact_peak_mps2 <= 0.0) return 0.0;
  const double tau = walking_time(p, side, t);
  const double period = p.stride_period_s;
  const double n = std::round(tau / period);
  if (n < 1.0 || n > p.n_strides) return 0.0;
  const double z = (tau - n * period) / p.impact_width_s;
  return p.impact_peak_mps2 * std::exp(-0.5 * z * z);
}

Vec3 specific_force_global(const GaitProfile& p, Side side, SensorRole role, double t) {
  Vec3 f = p.gravity_mps2 * kUp;
  if (p.linear_acceleration) {
    const double h = kSecondDiffStep;
    const Vec3 acc = (sensor_position(p, side, role, t + h) - 2.0 * sensor_position(p, side, role, t) +
                      sensor_position(p, side, role, t - h)) /
                     (h * h);
    f += acc + impact_scale(segment_of(role)) * impact_pulse(p, side, t) * kUp;
  }
  return f;
}

}  // namespace

double JointWave::angle(double tau, double omega) const {
  if (tau < 0.0) return 0.0;
  const double a1 = deg_to_rad(amplitude_deg) / 2.0;
  const double a2 = deg_to_rad(amplitude2_deg) / 2.0;
  return a1 * (std::cos(phase_rad) - std::cos(omega * tau + phase_rad)) +
         a2 * (std::cos(phase2_rad) - std::cos(2.0 * omega * tau + phase2_rad));
}

double JointWave::rate(double tau, double omega) const {
  if (tau < 0.0) return 0.0;
  const double a1 = deg_to_rad(amplitude_deg) / 2.0;
  const double a2 = deg_to_rad(amplitude2_deg) / 2.0;
  return a1 * omega * std::sin(omega * tau + phase_rad) +
         a2 * 2.0 * omega * std::sin(2.0 * omega * tau + phase2_rad);
}

void GaitProfile::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!(stride_period_s > 0.0)) fail("stride period must be > 0");
  if (n_strides < 1) fail("need at least one stride");
  if (!(standing_s >= 0.0)) fail("standing lead-in must be >= 0");
  for (const auto& [name, w] : {std::pair{"hip", &hip}, {"knee", &knee}, {"ankle", &ankle}}) {
    if (!(w->amplitude_deg >= 0.0) || !(w->amplitude2_deg >= 0.0)) {
      fail(std::string(name) + " amplitude must be >= 0");
    }
  }
  if (!(thigh_m > 0.0) || !(shank_m > 0.0) || !(foot_m > 0.0)) {
    fail("segment lengths must be > 0");
  }
  if (!(gravity_mps2 > 0.0)) fail("gravity must be > 0");
  if (!(impact_peak_mps2 >= 0.0)) fail("impact peak must be >= 0");
  if (!(impact_width_s > 0.0)) fail("impact width must be > 0");
}

double GaitProfile::omega() const { return 2.0 * std::numbers::pi / stride_period_s; }

NoiseProfile NoiseProfile::noiseless() {
  NoiseProfile n;
  n.accel_noise_std = 0.0;
  n.gyro_noise_std = 0.0;
  return n;
}

void NoiseProfile::validate() const {
  if (!(accel_noise_std >= 0.0) || !(gyro_noise_std >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise standard deviations must be >= 0");
  }
  if (!gyro_bias.allFinite()) throw Error(ErrorKind::NonFinite, "gyro bias must be finite");
  for (const auto& [id, q] : mounting) {
    if (std::abs(q.coeffs().norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument,
                  "mounting offset for sensor " + std::to_string(id) + " is not unit");
    }
  }
}

std::map<int, Quaternion> random_mounting(const SensorLayout& layout, double max_tilt_deg,
                                          double max_axial_deg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tilt(-deg_to_rad(max_tilt_deg), deg_to_rad(max_tilt_deg));
  std::uniform_real_distribution<double> axial(-deg_to_rad(max_axial_deg),
                                               deg_to_rad(max_axial_deg));
  std::map<int, Quaternion> out;
  for (Side side : kSides) {
    for (SensorRole role : kSensorRoles) {
      EulerAngles e;
      e.roll = tilt(rng);
      e.pitch = tilt(rng);
      e.yaw = axial(rng);
      out[layout.sensor(side, role)] = euler_to_quat(e);
    }
  }
  return out;
}

Segment segment_of(SensorRole role) {
  switch (role) {
    case SensorRole::Pelvis: return Segment::Pelvis;
    case SensorRole::ThighUpper:
    case SensorRole::ThighLower: return Segment::Thigh;
    case SensorRole::ShankUpper:
    case SensorRole::ShankLower: return Segment::Shank;
    case SensorRole::Foot: return Segment::Foot;
  }
  return Segment::Pelvis;
}

Vec3 segment_angular_velocity(const GaitProfile& profile, Side side, Segment segment, double t) {
  return {0.0, segment_pitch_rate(profile, side, segment, t), 0.0};
}

Vec3 sensor_position(const GaitProfile& p, Side side, SensorRole role, double t) {
  const Vec3 hip(0.0, side == Side::Left ? kHipLateral : -kHipLateral, 0.0);
  const double thigh = segment_pitch(p, side, Segment::Thigh, t);
  const double shank = segment_pitch(p, side, Segment::Shank, t);
  const double foot = segment_pitch(p, side, Segment::Foot, t);
  const Vec3 knee = hip + along(thigh, Vec3(0.0, 0.0, -p.thigh_m));
  const Vec3 ankle = knee + along(shank, Vec3(0.0, 0.0, -p.shank_m));
  switch (role) {
    case SensorRole::Pelvis: return hip + kPelvisSensorHeight * kUp;
    case SensorRole::ThighUpper: return hip + along(thigh, Vec3(0.0, 0.0, -0.25 * p.thigh_m));
    case SensorRole::ThighLower: return hip + along(thigh, Vec3(0.0, 0.0, -0.75 * p.thigh_m));
    case SensorRole::ShankUpper: return knee + along(shank, Vec3(0.0, 0.0, -0.25 * p.shank_m));
    case SensorRole::ShankLower: return knee + along(shank, Vec3(0.0, 0.0, -0.75 * p.shank_m));
    case SensorRole::Foot: return ankle + along(foot, Vec3(0.5 * p.foot_m, 0.0, 0.0));
  }
  return hip;
}

Trajectory gen_trajectory(const GaitProfile& profile, double fs) {
  profile.validate();
  if (!(fs > 0.0)) throw Error(ErrorKind::InvalidArgument, "gen_trajectory: fs must be > 0");
  const auto n = static_cast<std::size_t>(
      std::llround((2.0 * profile.standing_s + profile.n_strides * profile.stride_period_s) * fs));

  Trajectory tr;
  tr.fs = fs;
  tr.time_s.resize(n);
  for (Side side : kSides) {
    const int s = static_cast<int>(side);
    for (auto& v : tr.joint_angle_rad[s]) v.resize(n);
    for (auto& v : tr.segment_orientation[s]) v.resize(n);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs;
    tr.time_s[k] = t;
    for (Side side : kSides) {
      const int s = static_cast<int>(side);
      tr.joint_angle_rad[s][0][k] = joint_truth(profile, side, profile.hip, t);
      tr.joint_angle_rad[s][1][k] = joint_truth(profile, side, profile.knee, t);
      tr.joint_angle_rad[s][2][k] = joint_truth(profile, side, profile.ankle, t);
      for (int seg = 0; seg < 4; ++seg) {
        tr.segment_orientation[s][seg][k] =
            pitch_quat(segment_pitch(profile, side, static_cast<Segment>(seg), t));
      }
    }
  }
  return tr;
}

SynthSession synth_imu(const Trajectory& trajectory, const GaitProfile& profile,
                       const NoiseProfile& noise, const SensorLayout& layout) {
  profile.validate();
  noise.validate();
  layout.validate();

  SynthSession out;
  out.fs = trajectory.fs;
  out.truth = trajectory;
  const std::size_t n = trajectory.size();

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  for (Side side : kSides) {
    const int s = static_cast<int>(side);
    for (SensorRole role : kSensorRoles) {
      const int id = layout.sensor(side, role);
      const Segment seg = segment_of(role);
      const auto mit = noise.mounting.find(id);
      const Quaternion mount = mit == noise.mounting.end() ? Quaternion::Identity() : mit->second;
      const RotationMatrix r_bs = quat_to_rotmat(mount);

      ImuStream& stream = out.streams[id];
      stream.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double t = trajectory.time_s[k];
        const RotationMatrix r_gb =
            quat_to_rotmat(trajectory.segment_orientation[s][static_cast<int>(seg)][k]);
        const RotationMatrix r_gs = r_gb * r_bs;

        ImuSample x;
        x.timestamp_s = t;
        x.sensor_id = id;
        x.accel = r_gs.transpose() * specific_force_global(profile, side, role, t);
        x.gyro = r_bs.transpose() * segment_angular_velocity(profile, side, seg, t) +
                 noise.gyro_bias;
        if (noise.accel_noise_std > 0.0) {
          for (int a = 0; a < 3; ++a) x.accel[a] += noise.accel_noise_std * unit(rng);
        }
        if (noise.gyro_noise_std > 0.0) {
          for (int a = 0; a < 3; ++a) x.gyro[a] += noise.gyro_noise_std * unit(rng);
        }
        stream.push_back(x);
      }
    }
  }

  for (int stride = 0; stride < profile.n_strides; ++stride) {
    out.event_times_s.push_back(profile.standing_s + (stride + 1) * profile.stride_period_s);
  }

  if (out.event_times_s.size() >= 2) {
    const auto k0 = static_cast<std::size_t>(std::llround(out.event_times_s.front() * out.fs));
    const auto k1 = std::min(
        n - 1, static_cast<std::size_t>(std::llround(out.event_times_s.back() * out.fs)));
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = k0; k <= k1; ++k) {
      const double m =
          specific_force_global(profile, Side::Left, SensorRole::ShankLower, trajectory.time_s[k])
              .norm();
      sum += m;
      sq += m * m;
    }
    const double cnt = static_cast<double>(k1 - k0 + 1);
    out.truth_accel_mean_mps2 = sum / cnt;
    out.truth_accel_variance_mps2sq = sq / cnt - out.truth_accel_mean_mps2 * out.truth_accel_mean_mps2;
  }
  return out;
}

SynthSession simulate(const GaitProfile& profile, const NoiseProfile& noise,
                      const SensorLayout& layout, double fs) {
  return synth_imu(gen_trajectory(profile, fs), profile, noise, layout);
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

void write_session(const SynthSession& session, const GaitProfile& profile,
                   const SessionMeta& meta, const std::filesystem::path& out_dir) {
  meta.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  write_text_file(out_dir / "meta.kv", format_meta(meta));
  for (const ModuleFile& m : streams_to_modules(session.streams, meta)) {
    write_module_file(m, out_dir / ("module_" + std::to_string(m.module_id) + ".csv"));
  }

  KeyValueFile truth;
  truth.set("n_strides", std::to_string(profile.n_strides));
  truth.set("stride_period_s", format_double(profile.stride_period_s));
  truth.set("standing_s", format_double(profile.standing_s));
  truth.set("sample_rate_hz", format_double(session.fs));
  truth.set("hip_amplitude_deg", format_double(profile.hip.amplitude_deg));
  truth.set("knee_amplitude_deg", format_double(profile.knee.amplitude_deg));
  truth.set("ankle_amplitude_deg", format_double(profile.ankle.amplitude_deg));
  truth.set("linear_acceleration", profile.linear_acceleration ? "true" : "false");
  truth.set("events_s", join_doubles(session.event_times_s));
  truth.set("accel_mean_mps2", format_double(session.truth_accel_mean_mps2));
  truth.set("accel_variance_mps2sq", format_double(session.truth_accel_variance_mps2sq));
  write_text_file(out_dir / "truth.kv", "# simulator ground truth\n" + truth.format());

  std::string csv = "tick,time_s";
  for (Side side : kSides) {
    for (Joint joint : kJoints) csv += "," + JointKey{side, joint}.name() + "_deg";
  }
  csv += '\n';
  const Trajectory& tr = session.truth;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    csv += std::to_string(k) + "," + format_double(tr.time_s[k]);
    for (int s = 0; s < 2; ++s) {
      for (int j = 0; j < 3; ++j) csv += "," + format_double(rad_to_deg(tr.joint_angle_rad[s][j][k]));
    }
    csv += '\n';
  }
  write_text_file(out_dir / "truth_angles.csv", csv);
}

TruthSidecar read_truth_sidecar(const std::filesystem::path& session_dir) {
  const KeyValueFile kv = KeyValueFile::load(session_dir / "truth.kv");
  TruthSidecar t;
  t.n_strides = static_cast<int>(kv.require_int("n_strides"));
  t.stride_period_s = kv.require_double("stride_period_s");
  t.standing_s = kv.require_double("standing_s");
  t.sample_rate_hz = kv.require_double("sample_rate_hz");
  t.accel_mean_mps2 = kv.require_double("accel_mean_mps2");
  t.accel_variance_mps2sq = kv.require_double("accel_variance_mps2sq");
  t.hip_amplitude_deg = kv.require_double("hip_amplitude_deg");
  t.knee_amplitude_deg = kv.require_double("knee_amplitude_deg");
  t.ankle_amplitude_deg = kv.require_double("ankle_amplitude_deg");
  const std::string events = kv.require("events_s");
  for (std::string_view e : split(events, ',')) {
    if (e.empty()) continue;
    const auto v = parse_double(e);
    if (!v) throw Error(ErrorKind::MalformedLine, "truth.kv: bad event time");
    t.event_times_s.push_back(*v);
  }
  return t;
}

}  // namespace gaitkit

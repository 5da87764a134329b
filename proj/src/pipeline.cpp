#include "gaitkit/pipeline.hpp"

#include <algorithm>

#include "gaitkit/error.hpp"

namespace gaitkit {

void AnalysisConfig::validate() const {
  ekf.validate();
  peaks.validate();
  if (!(calibration_window_s >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "calibration window must be at least 1 s");
  }
}

MountingCalibration calibrate_streams(const std::map<int, ImuStream>& streams,
                                      const SensorLayout& layout, double window_s) {
  std::map<int, ImuStream> standing;
  for (const auto& [id, stream] : streams) {
    if (stream.empty()) throw Error(ErrorKind::EmptyInput, "sensor " + std::to_string(id) + " has no samples");
    const double t0 = stream.front().timestamp_s;
    ImuStream& out = standing[id];
    for (const ImuSample& s : stream) {
      if (s.timestamp_s - t0 > window_s + 1e-9) break;
      out.push_back(s);
    }
  }
  return static_calibrate(standing, layout);
}

SessionResult analyze_streams(const std::map<int, ImuStream>& streams, const SessionMeta& meta,
                              const std::optional<MountingCalibration>& calibration,
                              const AnalysisConfig& config) {
  config.validate();
  meta.validate();

  SessionResult r;
  r.candidate_id = meta.candidate_id;
  r.shoe = meta.shoe;
  r.fs = meta.sample_rate_hz;
  r.calibration = calibration ? *calibration
                              : calibrate_streams(streams, meta.layout, config.calibration_window_s);

  std::map<int, std::vector<OrientationSample>> orientation;
  for (const auto& [id, stream] : streams) {
    try {
      orientation[id] = ekf_run(stream, config.ekf, meta.sample_rate_hz);
    } catch (const StreamError& e) {
      throw StreamError(e.kind(), e.index(), "sensor " + std::to_string(id) + " stream");
    }
  }
  r.angles = joint_angles(orientation, meta.layout, r.calibration);

  const int det_id = meta.layout.sensor(config.detection_side, config.detection_role);
  const ImuStream& det = streams.at(det_id);
  const std::vector<OrientationSample>& det_q = orientation.at(det_id);
  const Vec3 g(0.0, 0.0, config.ekf.gravity_magnitude);
  r.accel.magnitude.reserve(det_q.size());
  r.accel.dynamic_magnitude.reserve(det_q.size());
  for (std::size_t k = 0; k < det_q.size(); ++k) {
    const Vec3& a = det[k + kEkfInitWindow].accel;
    r.accel.magnitude.push_back(accel_magnitude(a));
    r.accel.dynamic_magnitude.push_back((a - quat_to_rotmat(det_q[k].q).transpose() * g).norm());
  }

  r.peaks = detect_steps(r.accel.magnitude, r.fs, config.peaks);
  r.step_times_s = step_cycle_times(r.peaks, r.fs).times_s;
  r.cycles = segment_cycles(r.peaks, r.angles);
  r.metrics = session_metrics(r.cycles, r.accel);
  return r;
}

SessionResult analyze_session(const SessionData& session, const AnalysisConfig& config) {
  if (session.is_fixture()) {
    const FixtureMetrics& f = *session.meta.fixture;
    SessionResult r;
    r.candidate_id = session.meta.candidate_id;
    r.shoe = session.meta.shoe;
    r.from_fixture = true;
    r.fs = session.meta.sample_rate_hz;
    r.stored = f;
    r.metrics.mean_step_cycle_time_s = f.step_cycle_time_s.value_or(0.0);
    r.metrics.mean_accel_magnitude_mps2 = f.mean_accel_mps2.value_or(0.0);
    r.metrics.accel_variance_mps2sq = f.accel_variance_mps2sq.value_or(0.0);
    return r;
  }
  if (session.modules.empty()) {
    throw Error(ErrorKind::EmptyInput, session.dir.string() + ": no module files and no stored metrics");
  }
  const SyncedStreams synced = synchronize(session.modules, session.meta);
  SessionResult r = analyze_streams(synced.streams, session.meta, session.calibration, config);
  for (const auto& [id, flags] : synced.interpolated) {
    r.interpolated_samples += static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  }
  return r;
}

SessionResult analyze_session_dir(const std::filesystem::path& dir, const AnalysisConfig& config) {
  return analyze_session(load_session(dir), config);
}

}  // namespace gaitkit

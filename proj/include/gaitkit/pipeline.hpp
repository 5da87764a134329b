#pragma once

// End-to-end analysis of one session: synchronize, calibrate, filter every
// sensor, derive joint angles, detect strides and summarize.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaitkit/ekf.hpp"
#include "gaitkit/gait_metrics.hpp"
#include "gaitkit/kinematics.hpp"
#include "gaitkit/session_io.hpp"

namespace gaitkit {

struct AnalysisConfig {
  EkfConfig ekf;
  PeakParams peaks;
  double calibration_window_s{1.5};  // quiet standing at the start of a trial
  Side detection_side{Side::Left};
  SensorRole detection_role{SensorRole::ShankLower};

  void validate() const;
};

struct SessionResult {
  std::string candidate_id;
  ShoeConfig shoe;
  bool from_fixture{false};
  FixtureMetrics stored;  // fixtures only; absent values stay absent in reports
  double fs{kNominalSampleRateHz};

  SessionMetrics metrics;
  std::vector<GaitCycle> cycles;
  std::vector<JointAngleSeries> angles;  // empty for fixtures
  std::vector<std::size_t> peaks;        // indices into the joint-angle grid
  std::vector<double> step_times_s;
  AccelTrace accel;
  MountingCalibration calibration;
  std::size_t interpolated_samples{0};
};

/// Neutral-pose calibration from the first `window_s` seconds of every stream.
MountingCalibration calibrate_streams(const std::map<int, ImuStream>& streams,
                                      const SensorLayout& layout, double window_s);

/// Runs the pipeline on synchronized streams. A supplied calibration is used
/// as is; otherwise one is derived from the opening standing window.
SessionResult analyze_streams(const std::map<int, ImuStream>& streams, const SessionMeta& meta,
                              const std::optional<MountingCalibration>& calibration,
                              const AnalysisConfig& config);

/// Metadata-only fixtures pass their stored metrics through untouched.
SessionResult analyze_session(const SessionData& session, const AnalysisConfig& config);

SessionResult analyze_session_dir(const std::filesystem::path& dir, const AnalysisConfig& config);

}  // namespace gaitkit

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gaitkit/imu_sample.hpp"
#include "gaitkit/kinematics.hpp"

namespace gaitkit {

struct PeakParams {
  double min_separation_s{0.7};
  double min_prominence{1.0};  // m/s²
  int smoothing_window{5};     // samples, odd

  void validate() const;
};

/// Euclidean norm of the accelerometer vector.
double accel_magnitude(const Vec3& accel);
double accel_magnitude(const ImuSample& sample);

/// Centered moving average; the window shrinks symmetrically at the edges.
std::vector<double> moving_average(std::span<const double> signal, int window);

/// Prominence of each index in `peaks` (height above the higher of the two
/// bases, each base being the lowest point before the signal climbs above the
/// peak on that side).
std::vector<double> peak_prominences(std::span<const double> signal,
                                     std::span<const std::size_t> peaks);

/// Step events: local maxima of the smoothed signal (first index of a plateau)
/// with prominence >= min_prominence, thinned greedily from the tallest so no
/// two survivors are closer than min_separation_s. Ascending indices; an empty
/// result is valid. The signal must span at least 2 · min_separation_s.
std::vector<std::size_t> detect_steps(std::span<const double> signal, double fs,
                                      const PeakParams& params);

struct StepTimes {
  std::vector<double> times_s;
  double mean_s{0};
};

StepTimes step_cycle_times(std::span<const std::size_t> peaks, double fs);

struct GaitCycle {
  std::size_t start_index{0};
  std::size_t end_index{0};
  double duration_s{0};
  std::map<JointKey, double> range_deg;  // max - min of the primary angle over the cycle
};

/// One cycle per consecutive peak pair, both ends inclusive.
std::vector<GaitCycle> segment_cycles(std::span<const std::size_t> peaks,
                                      std::span<const JointAngleSeries> angle_series);

/// Tukey box-plot summary. Quartiles interpolate linearly between order
/// statistics at rank (n-1)·p; whiskers sit on the most extreme data within
/// 1.5·IQR of the box; everything beyond is an outlier.
struct BoxStats {
  double median{0};
  double q1{0};
  double q3{0};
  double whisker_low{0};
  double whisker_high{0};
  std::vector<double> outliers;
  std::size_t n{0};
};

/// Linear-interpolation quantile of already sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

BoxStats box_stats(std::span<const double> values);

/// Per-sample accelerometer magnitudes aligned with the joint-angle grid.
/// `dynamic_magnitude` is |accel - R(q)ᵀ g| using the filter attitude; empty
/// when no attitude is available.
struct AccelTrace {
  std::vector<double> magnitude;
  std::vector<double> dynamic_magnitude;
};

struct SessionMetrics {
  std::size_t n_cycles{0};
  double mean_step_cycle_time_s{0};
  double mean_accel_magnitude_mps2{0};
  double accel_variance_mps2sq{0};
  std::optional<double> mean_dynamic_accel_mps2;
  std::optional<double> dynamic_accel_variance_mps2sq;
  std::map<JointKey, BoxStats> range_stats;
};

/// Means and population variances over the walking span, first cycle start to
/// last cycle end inclusive. Throws InsufficientPeaks without cycles.
SessionMetrics session_metrics(std::span<const GaitCycle> cycles, const AccelTrace& accel);

/// Resamples samples [start, end] of `values` onto `points` evenly spaced
/// positions (0-100 % of the cycle) by linear interpolation.
std::vector<double> normalize_cycle(std::span<const double> values, std::size_t start,
                                    std::size_t end, std::size_t points = 101);

}  // namespace gaitkit

#include "gaitkit/gait_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gaitkit/error.hpp"

namespace gaitkit {

void PeakParams::validate() const {
  if (!(min_separation_s > 0.0) || !std::isfinite(min_separation_s)) {
    throw Error(ErrorKind::InvalidArgument, "PeakParams.min_separation_s must be > 0");
  }
  if (!(min_prominence >= 0.0) || !std::isfinite(min_prominence)) {
    throw Error(ErrorKind::InvalidArgument, "PeakParams.min_prominence must be >= 0");
  }
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "PeakParams.smoothing_window must be odd");
  }
}

double accel_magnitude(const Vec3& accel) {
  return std::sqrt(accel.x() * accel.x() + accel.y() * accel.y() + accel.z() * accel.z());
}

double accel_magnitude(const ImuSample& sample) { return accel_magnitude(sample.accel); }

std::vector<double> moving_average(std::span<const double> signal, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "moving_average: window must be odd");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(signal.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(signal.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) sum += signal[j];
    out[i] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

std::vector<double> peak_prominences(std::span<const double> signal,
                                     std::span<const std::size_t> peaks) {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t p : peaks) {
    const double height = signal[p];
    double left_min = height;
    for (std::size_t i = p; i-- > 0;) {
      if (signal[i] > height) break;
      left_min = std::min(left_min, signal[i]);
    }
    double right_min = height;
    for (std::size_t i = p + 1; i < signal.size(); ++i) {
      if (signal[i] > height) break;
      right_min = std::min(right_min, signal[i]);
    }
    out.push_back(height - std::max(left_min, right_min));
  }
  return out;
}

namespace {

// Interior local maxima; a flat top counts once, at its first index.
std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  std::size_t i = 1;
  while (i + 1 < x.size()) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i;
      while (ahead + 1 < x.size() && x[ahead + 1] == x[i]) ++ahead;
      if (ahead + 1 < x.size() && x[ahead + 1] < x[i]) {
        peaks.push_back(i);
      }
      i = ahead + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

}  // namespace

std::vector<std::size_t> detect_steps(std::span<const double> signal, double fs,
                                      const PeakParams& params) {
  params.validate();
  if (!(fs > 0.0)) throw Error(ErrorKind::InvalidArgument, "detect_steps: fs must be > 0");
  const double min_len = 2.0 * fs * params.min_separation_s;
  if (static_cast<double>(signal.size()) < min_len) {
    throw Error(ErrorKind::InvalidArgument,
                "detect_steps: signal of " + std::to_string(signal.size()) +
                    " samples is shorter than two minimum separations");
  }
  for (double v : signal) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "detect_steps: non-finite sample");
  }

  const std::vector<double> smooth = moving_average(signal, params.smoothing_window);
  std::vector<std::size_t> candidates = local_maxima(smooth);
  const std::vector<double> prom = peak_prominences(smooth, candidates);

  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (prom[k] >= params.min_prominence) kept.push_back(candidates[k]);
  }

  // Greedy thinning, tallest first; equal heights resolve to the earlier index.
  std::vector<std::size_t> order = kept;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return smooth[a] > smooth[b]; });
  const double min_distance = params.min_separation_s * fs;
  std::vector<std::size_t> accepted;
  for (std::size_t idx : order) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      const double d = std::abs(static_cast<double>(idx) - static_cast<double>(a));
      return d < min_distance;
    });
    if (clear) accepted.push_back(idx);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

StepTimes step_cycle_times(std::span<const std::size_t> peaks, double fs) {
  if (peaks.size() < 2) {
    throw Error(ErrorKind::InsufficientPeaks,
                "need at least 2 peaks, got " + std::to_string(peaks.size()));
  }
  if (!(fs > 0.0)) throw Error(ErrorKind::InvalidArgument, "step_cycle_times: fs must be > 0");
  StepTimes out;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i] <= peaks[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "step_cycle_times: peaks must be ascending");
    }
    out.times_s.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / fs);
  }
  out.mean_s = std::accumulate(out.times_s.begin(), out.times_s.end(), 0.0) /
               static_cast<double>(out.times_s.size());
  return out;
}

std::vector<GaitCycle> segment_cycles(std::span<const std::size_t> peaks,
                                      std::span<const JointAngleSeries> angle_series) {
  if (peaks.size() < 2) {
    throw Error(ErrorKind::InsufficientPeaks,
                "need at least 2 peaks, got " + std::to_string(peaks.size()));
  }
  if (angle_series.empty()) {
    throw Error(ErrorKind::EmptyInput, "segment_cycles: no joint-angle series");
  }
  const std::size_t len = angle_series.front().primary_deg.size();
  for (const JointAngleSeries& s : angle_series) {
    if (s.primary_deg.size() != len || s.timestamps.size() != len) {
      throw Error(ErrorKind::Misalignment, "segment_cycles: series lengths differ");
    }
  }

  std::vector<GaitCycle> cycles;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const std::size_t start = peaks[i - 1];
    const std::size_t end = peaks[i];
    if (end <= start) {
      throw Error(ErrorKind::InvalidArgument, "segment_cycles: peaks must be ascending");
    }
    if (end >= len) {
      throw Error(ErrorKind::SpanOutOfBounds, "cycle [" + std::to_string(start) + ", " +
                                                  std::to_string(end) +
                                                  "] exceeds series of length " +
                                                  std::to_string(len));
    }
    GaitCycle c;
    c.start_index = start;
    c.end_index = end;
    const auto& t = angle_series.front().timestamps;
    c.duration_s = t[end] - t[start];
    for (const JointAngleSeries& s : angle_series) {
      const auto first = s.primary_deg.begin() + static_cast<std::ptrdiff_t>(start);
      const auto last = s.primary_deg.begin() + static_cast<std::ptrdiff_t>(end) + 1;
      const auto [lo, hi] = std::minmax_element(first, last);
      c.range_deg[s.key()] = *hi - *lo;
    }
    cycles.push_back(std::move(c));
  }
  return cycles;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "box_stats of empty data");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "box_stats: non-finite value");
  }
  std::sort(v.begin(), v.end());

  BoxStats b;
  b.n = v.size();
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;

  bool any_inside = false;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
      continue;
    }
    if (!any_inside) {
      b.whisker_low = x;
      any_inside = true;
    }
    b.whisker_high = x;
  }
  if (!any_inside || b.whisker_low > b.q1) b.whisker_low = b.q1;
  if (!any_inside || b.whisker_high < b.q3) b.whisker_high = b.q3;
  return b;
}

namespace {

struct MeanVar {
  double mean;
  double variance;
};

MeanVar mean_and_population_variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / n};
}

}  // namespace

SessionMetrics session_metrics(std::span<const GaitCycle> cycles, const AccelTrace& accel) {
  if (cycles.empty()) {
    throw Error(ErrorKind::InsufficientPeaks, "session_metrics: no complete gait cycle");
  }
  const std::size_t first = cycles.front().start_index;
  const std::size_t last = cycles.back().end_index;
  if (last >= accel.magnitude.size()) {
    throw Error(ErrorKind::SpanOutOfBounds, "session_metrics: accel trace shorter than cycles");
  }

  SessionMetrics m;
  m.n_cycles = cycles.size();
  double total = 0.0;
  for (const GaitCycle& c : cycles) total += c.duration_s;
  m.mean_step_cycle_time_s = total / static_cast<double>(cycles.size());

  const std::span<const double> span(accel.magnitude.data() + first, last - first + 1);
  const MeanVar mv = mean_and_population_variance(span);
  m.mean_accel_magnitude_mps2 = mv.mean;
  m.accel_variance_mps2sq = mv.variance;

  if (!accel.dynamic_magnitude.empty()) {
    if (accel.dynamic_magnitude.size() != accel.magnitude.size()) {
      throw Error(ErrorKind::Misalignment, "session_metrics: dynamic trace length differs");
    }
    const MeanVar dyn = mean_and_population_variance(
        std::span<const double>(accel.dynamic_magnitude.data() + first, last - first + 1));
    m.mean_dynamic_accel_mps2 = dyn.mean;
    m.dynamic_accel_variance_mps2sq = dyn.variance;
  }

  std::map<JointKey, std::vector<double>> ranges;
  for (const GaitCycle& c : cycles) {
    for (const auto& [key, r] : c.range_deg) ranges[key].push_back(r);
  }
  for (const auto& [key, r] : ranges) m.range_stats[key] = box_stats(r);
  return m;
}

std::vector<double> normalize_cycle(std::span<const double> values, std::size_t start,
                                    std::size_t end, std::size_t points) {
  if (end <= start || end >= values.size()) {
    throw Error(ErrorKind::SpanOutOfBounds, "normalize_cycle: bad span");
  }
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "normalize_cycle: need >= 2 points");
  std::vector<double> out(points);
  const double span = static_cast<double>(end - start);
  for (std::size_t k = 0; k < points; ++k) {
    const double pos = static_cast<double>(start) +
                       span * static_cast<double>(k) / static_cast<double>(points - 1);
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), end - 1);
    const double frac = pos - static_cast<double>(i);
    out[k] = values[i] + frac * (values[i + 1] - values[i]);
  }
  return out;
}

}  // namespace gaitkit

#pragma once

// Result artifacts: metrics table (text and CSV), box-plot statistics (JSON),
// per-cycle ranges and normalized traces (CSV) and SVG plots. Every writer is
// deterministic; rows are ordered by candidate, then shoe label.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/config.hpp"
#include "gaitkit/pipeline.hpp"

namespace gaitkit {

/// Four decimals, ties to even on the shortest round-trip decimal form of the
/// value, so 0.03125 -> "0.0312" and 1.55555 -> "1.5556".
std::string format_fixed4(double value);

/// Natural order for shoe labels: H2 < H10.
bool shoe_label_less(std::string_view a, std::string_view b);

struct ShoeGroup {
  std::string name;
  std::vector<std::string> labels;  // natural order
};

/// walking_height, platform, overall_height from the reference shoes.
std::vector<ShoeGroup> shoe_groups();

struct MetricsRow {
  std::string candidate_id;
  std::string shoe;
  double platform_in{0};
  double heel_in{0};
  std::optional<std::size_t> n_cycles;
  std::optional<double> step_cycle_time_s;
  std::optional<double> mean_accel_mps2;
  std::optional<double> accel_variance_mps2sq;
  std::optional<double> mean_accel_dynamic_mps2;
  std::optional<double> accel_dynamic_variance_mps2sq;

  bool operator==(const MetricsRow&) const = default;
};

MetricsRow metrics_row(const SessionResult& result);
void sort_rows(std::vector<MetricsRow>& rows);
void sort_results(std::vector<SessionResult>& results);

inline constexpr std::string_view kMetricsHeader =
    "candidate,shoe,platform_in,heel_in,walking_height_in,n_cycles,step_cycle_time_s,"
    "mean_accel_mps2,accel_variance_mps2sq,mean_accel_dynamic_mps2,accel_dynamic_variance_mps2sq";

/// metrics.csv: metric columns at four decimals, empty cells for absent values.
std::string format_metrics_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text,
                                          const std::string& source = "metrics.csv");

/// Shoe-by-candidate pivot with platform, heel and three metric blocks.
std::string format_table_text(std::span<const MetricsRow> rows, AccelBasis basis);

/// boxstats.json tree: group definitions, per-session range statistics and
/// per (candidate, joint, group) panels.
std::string format_boxstats_json(std::span<const SessionResult> results);

/// cycles.csv: one line per (session, joint, cycle) with span and range.
std::string format_cycles_csv(std::span<const SessionResult> results);

/// cycle_traces.csv: primary angle resampled to 0-100 % of each cycle.
std::string format_cycle_traces_csv(std::span<const SessionResult> results);

struct BoxPlotEntry {
  std::string label;
  BoxStats stats;
};

/// Box plot with the five levels and outliers also stored as data-* attributes
/// in data units on each box group.
std::string boxplot_svg(const std::string& title, std::span<const BoxPlotEntry> boxes,
                        const std::string& y_label = "range (deg)");

/// Overlaid cycle traces on a 0-100 % axis.
std::string cycle_overlay_svg(const std::string& title,
                              std::span<const std::vector<double>> traces);

/// Writes the selected artifacts into out_dir and returns the written paths.
std::vector<std::filesystem::path> write_report(std::span<const SessionResult> results,
                                                const ReportConfig& config,
                                                const std::filesystem::path& out_dir);

struct PlotSummary {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Renders SVGs from a report directory (boxstats.json, optional
/// cycle_traces.csv). Missing groups produce warnings, not errors.
PlotSummary plot_bundle(const std::filesystem::path& bundle_dir,
                        const std::filesystem::path& out_dir);

}  // namespace gaitkit

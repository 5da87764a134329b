#pragma once

// Tool configuration: one flat key-value file covers analysis, reporting and
// the simulator. Every key is optional; `--print-config` writes the complete
// set with current values, which loads back unchanged.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/pipeline.hpp"
#include "gaitkit/synth.hpp"
#include "gaitkit/textio.hpp"

namespace gaitkit {

enum class OutputFormat { TableText, TableStructured, BoxstatsStructured, PlotSvg };

std::string_view to_string(OutputFormat format);
OutputFormat parse_output_format(std::string_view text);

/// Which acceleration statistic fills the text table's acceleration columns.
enum class AccelBasis { Total, Dynamic };

struct ReportConfig {
  std::vector<OutputFormat> formats{OutputFormat::TableText, OutputFormat::TableStructured,
                                    OutputFormat::BoxstatsStructured, OutputFormat::PlotSvg};
  AccelBasis accel_basis{AccelBasis::Total};

  bool wants(OutputFormat f) const;
};

struct SimConfig {
  GaitProfile profile;
  NoiseProfile noise;  // mounting comes from the tilt/axial draws below
  double mount_tilt_deg{0};
  double mount_axial_deg{0};
  double sample_rate_hz{kNominalSampleRateHz};
  std::string candidate_id{"sim01"};
  std::string shoe{"H1"};

  /// Noise profile with the mounting offsets drawn for `layout`.
  NoiseProfile noise_for(const SensorLayout& layout) const;
  void validate() const;
};

struct ToolConfig {
  AnalysisConfig analysis;
  ReportConfig report;
  SimConfig sim;
  int jobs{0};  // 0 = one worker per hardware thread

  void validate() const;
};

/// Unknown keys are rejected with their location so typos do not pass silently.
ToolConfig parse_config(const KeyValueFile& kv, ToolConfig base = {});
ToolConfig load_config(const std::filesystem::path& path);
std::string format_config(const ToolConfig& config);

}  // namespace gaitkit

#pragma once

// On-disk session layout:
//
//   <session>/meta.kv          flat key-value metadata (candidate, shoe, layout)
//   <session>/module_<n>.csv   one sample file per leg module
//   <session>/calibration.kv   optional sensor-to-segment alignments
//
// Module file grammar (UTF-8, '\n'-terminated records, '\r' tolerated):
//
//   module_id,tick,sensor_id,ax,ay,az,gx,gy,gz[,event]
//   <int>,<int>,<int>,<real>,<real>,<real>,<real>,<real>,<real>[,<int>]
//
// accel in m/s², gyro in rad/s, ticks counted from the shared trigger (tick 0)
// at the session sample rate. docs/formats.md carries the full contract.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/imu_sample.hpp"
#include "gaitkit/kinematics.hpp"

namespace gaitkit {

/// Shoe geometry in inches: platform (forefoot) height x, heel height y.
struct ShoeConfig {
  std::string label;
  double platform_height_in{0};
  double heel_height_in{0};

  /// y - x
  double walking_height_in() const { return heel_height_in - platform_height_in; }
  /// Throws InvalidArgument unless heel >= platform >= 0 and the label is set.
  void validate() const;

  bool operator==(const ShoeConfig&) const = default;
};

double derive_walking_height(const ShoeConfig& shoe);

/// The seven reference shoes H1-H7.
const std::vector<ShoeConfig>& reference_shoes();
std::optional<ShoeConfig> find_reference_shoe(std::string_view label);

/// Thresholds used to group shoes into comparison sets.
struct ClusterRules {
  double low_platform_max_in{0.5};     // walking-height set: platform at or below this
  double heel_band_in{1.0};            // platform set: heels within this of the tallest
  double walking_height_tol_in{0.25};  // overall-height pair: walking heights this close
};

/// Walking-height set (low platform, spread walking height), platform set
/// (raised platform, near-constant tall heel) and the overall-height pair
/// (near-equal walking height, largest platform difference). Labels sorted.
struct ShoeClusters {
  std::vector<std::string> walking_height;
  std::vector<std::string> platform;
  std::vector<std::string> overall_height;
};

ShoeClusters cluster_shoes(std::span<const ShoeConfig> shoes, const ClusterRules& rules = {});

/// Pre-computed metrics carried by metadata-only fixtures.
struct FixtureMetrics {
  std::optional<double> step_cycle_time_s;
  std::optional<double> mean_accel_mps2;
  std::optional<double> accel_variance_mps2sq;
};

struct SessionMeta {
  std::string candidate_id;
  ShoeConfig shoe;
  double sample_rate_hz{kNominalSampleRateHz};
  SensorLayout layout{SensorLayout::standard()};
  std::string calibration_file;  // relative to the session directory; may be empty
  std::string notes;
  std::optional<FixtureMetrics> fixture;

  void validate() const;
};

SessionMeta parse_meta(std::string_view text, const std::string& source = "meta.kv");
SessionMeta read_meta(const std::filesystem::path& path);
std::string format_meta(const SessionMeta& meta);

MountingCalibration parse_calibration(std::string_view text,
                                      const std::string& source = "calibration.kv");
std::string format_calibration(const MountingCalibration& calib);

struct ModuleRecord {
  std::int64_t tick{0};
  int sensor_id{0};
  Vec3 accel{Vec3::Zero()};
  Vec3 gyro{Vec3::Zero()};
  std::optional<std::int64_t> event;

  bool operator==(const ModuleRecord&) const = default;
};

struct ModuleFile {
  int module_id{0};
  bool has_event_column{false};
  std::vector<ModuleRecord> records;

  bool operator==(const ModuleFile&) const = default;
};

constexpr double kAccelFullScale = 160.0;  // m/s², per axis
constexpr double kGyroFullScale = 35.0;    // rad/s, per axis

inline constexpr std::string_view kModuleHeader = "module_id,tick,sensor_id,ax,ay,az,gx,gy,gz";

/// Parses and validates module file text. Errors are ParseError with the
/// 1-based line and column of the offending field.
ModuleFile parse_module_text(std::string_view text, const std::string& source);
ModuleFile parse_module_file(const std::filesystem::path& path);

std::string format_module_file(const ModuleFile& module);
void write_module_file(const ModuleFile& module, const std::filesystem::path& path);

/// Per-sensor streams on the common tick grid.
struct SyncedStreams {
  std::map<int, ImuStream> streams;
  /// Per stream, true where the sample was filled by interpolation.
  std::map<int, std::vector<bool>> interpolated;
  std::int64_t first_tick{0};
  std::int64_t last_tick{0};
};

/// Merges module files: timestamps are tick / sample_rate_hz, every stream is
/// cut to the tick range all sensors cover, runs of at most two missing ticks
/// are linearly interpolated (and flagged), longer gaps are left open.
SyncedStreams synchronize(std::span<const ModuleFile> modules, const SessionMeta& meta);

/// Splits streams back into module files, one per leg of the layout (module
/// id = leg index). Used by the simulator and for idempotence checks.
std::vector<ModuleFile> streams_to_modules(const std::map<int, ImuStream>& streams,
                                           const SessionMeta& meta);

struct SessionData {
  std::filesystem::path dir;
  SessionMeta meta;
  std::vector<ModuleFile> modules;
  std::optional<MountingCalibration> calibration;

  bool is_fixture() const { return modules.empty() && meta.fixture.has_value(); }
};

/// module_<n>.csv files sorted by n.
std::vector<std::filesystem::path> list_module_files(const std::filesystem::path& session_dir);
SessionData load_session(const std::filesystem::path& session_dir);

}  // namespace gaitkit

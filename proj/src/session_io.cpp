#include "gaitkit/session_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <set>

#include "gaitkit/error.hpp"
#include "gaitkit/textio.hpp"

namespace gaitkit {

void ShoeConfig::validate() const {
  if (label.empty()) throw Error(ErrorKind::InvalidArgument, "shoe label is empty");
  if (!std::isfinite(platform_height_in) || !std::isfinite(heel_height_in) ||
      platform_height_in < 0.0 || heel_height_in < platform_height_in) {
    throw Error(ErrorKind::InvalidArgument,
                "shoe " + label + ": need heel height >= platform height >= 0");
  }
}

double derive_walking_height(const ShoeConfig& shoe) {
  shoe.validate();
  return shoe.walking_height_in();
}

const std::vector<ShoeConfig>& reference_shoes() {
  static const std::vector<ShoeConfig> shoes{
      {"H1", 0.5, 0.75}, {"H2", 0.25, 2.0}, {"H3", 0.5, 3.0}, {"H4", 1.5, 5.5},
      {"H5", 2.0, 6.0},  {"H6", 2.0, 6.5},  {"H7", 3.0, 5.25},
  };
  return shoes;
}

std::optional<ShoeConfig> find_reference_shoe(std::string_view label) {
  for (const ShoeConfig& s : reference_shoes()) {
    if (s.label == label) return s;
  }
  return std::nullopt;
}

ShoeClusters cluster_shoes(std::span<const ShoeConfig> shoes, const ClusterRules& rules) {
  ShoeClusters out;
  if (shoes.empty()) return out;
  for (const ShoeConfig& s : shoes) s.validate();

  for (const ShoeConfig& s : shoes) {
    if (s.platform_height_in <= rules.low_platform_max_in) out.walking_height.push_back(s.label);
  }

  double tallest = 0.0;
  for (const ShoeConfig& s : shoes) {
    if (s.platform_height_in > rules.low_platform_max_in) {
      tallest = std::max(tallest, s.heel_height_in);
    }
  }
  for (const ShoeConfig& s : shoes) {
    if (s.platform_height_in > rules.low_platform_max_in &&
        s.heel_height_in >= tallest - rules.heel_band_in) {
      out.platform.push_back(s.label);
    }
  }

  double best = -1.0;
  for (std::size_t i = 0; i < shoes.size(); ++i) {
    for (std::size_t j = i + 1; j < shoes.size(); ++j) {
      const double dw = std::abs(shoes[i].walking_height_in() - shoes[j].walking_height_in());
      const double dp = std::abs(shoes[i].platform_height_in - shoes[j].platform_height_in);
      if (dw <= rules.walking_height_tol_in + 1e-12 && dp > best) {
        best = dp;
        out.overall_height = {shoes[i].label, shoes[j].label};
      }
    }
  }

  for (auto* v : {&out.walking_height, &out.platform, &out.overall_height}) {
    std::sort(v->begin(), v->end());
  }
  return out;
}

void SessionMeta::validate() const {
  if (candidate_id.empty()) throw Error(ErrorKind::InvalidArgument, "candidate_id is empty");
  shoe.validate();
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorKind::InvalidArgument, "sample_rate_hz must be > 0");
  }
  layout.validate();
}

namespace {

std::string layout_key(Side side, SensorRole role) {
  return "layout." + std::string(to_string(side)) + "." + std::string(to_string(role));
}

}  // namespace

SessionMeta parse_meta(std::string_view text, const std::string& source) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  SessionMeta meta;
  meta.candidate_id = kv.require("candidate_id");
  meta.shoe.label = kv.require("shoe.label");
  const auto ref = find_reference_shoe(meta.shoe.label);
  if (kv.contains("shoe.platform_in") || !ref) {
    meta.shoe.platform_height_in = kv.require_double("shoe.platform_in");
    meta.shoe.heel_height_in = kv.require_double("shoe.heel_in");
  } else {
    meta.shoe = *ref;
  }
  meta.sample_rate_hz = kv.get_double("sample_rate_hz", kNominalSampleRateHz);
  for (Side side : kSides) {
    for (SensorRole role : kSensorRoles) {
      const std::string key = layout_key(side, role);
      if (kv.contains(key)) {
        meta.layout.sensor_ids[static_cast<int>(side)][static_cast<int>(role)] =
            static_cast<int>(kv.require_int(key));
      }
    }
  }
  meta.calibration_file = kv.get("calibration").value_or("");
  meta.notes = kv.get("notes").value_or("");

  FixtureMetrics fx;
  bool any = false;
  if (kv.contains("metrics.step_cycle_time_s")) {
    fx.step_cycle_time_s = kv.require_double("metrics.step_cycle_time_s");
    any = true;
  }
  if (kv.contains("metrics.mean_accel_mps2")) {
    fx.mean_accel_mps2 = kv.require_double("metrics.mean_accel_mps2");
    any = true;
  }
  if (kv.contains("metrics.accel_variance_mps2sq")) {
    fx.accel_variance_mps2sq = kv.require_double("metrics.accel_variance_mps2sq");
    any = true;
  }
  if (any) meta.fixture = fx;

  // Re-raise validation failures at the offending key.
  const auto checked_at = [&](std::string_view key, const auto& check) {
    try {
      check();
    } catch (const Error& e) {
      const auto at = kv.locate(key);
      throw ParseError(e.kind(), source, at.line, at.column, e.what());
    }
  };
  checked_at("candidate_id", [&] {
    if (meta.candidate_id.empty()) throw Error(ErrorKind::InvalidArgument, "candidate_id is empty");
  });
  checked_at(kv.contains("shoe.heel_in") ? "shoe.heel_in" : "shoe.label",
             [&] { meta.shoe.validate(); });
  checked_at("sample_rate_hz", [&] { meta.validate(); });
  return meta;
}

SessionMeta read_meta(const std::filesystem::path& path) {
  return parse_meta(read_text_file(path), path.string());
}

std::string format_meta(const SessionMeta& meta) {
  KeyValueFile kv;
  kv.set("candidate_id", meta.candidate_id);
  kv.set("shoe.label", meta.shoe.label);
  kv.set("shoe.platform_in", format_double(meta.shoe.platform_height_in));
  kv.set("shoe.heel_in", format_double(meta.shoe.heel_height_in));
  kv.set("sample_rate_hz", format_double(meta.sample_rate_hz));
  for (Side side : kSides) {
    for (SensorRole role : kSensorRoles) {
      kv.set(layout_key(side, role), std::to_string(meta.layout.sensor(side, role)));
    }
  }
  if (!meta.calibration_file.empty()) kv.set("calibration", meta.calibration_file);
  if (!meta.notes.empty()) kv.set("notes", meta.notes);
  if (meta.fixture) {
    if (meta.fixture->step_cycle_time_s) {
      kv.set("metrics.step_cycle_time_s", format_double(*meta.fixture->step_cycle_time_s));
    }
    if (meta.fixture->mean_accel_mps2) {
      kv.set("metrics.mean_accel_mps2", format_double(*meta.fixture->mean_accel_mps2));
    }
    if (meta.fixture->accel_variance_mps2sq) {
      kv.set("metrics.accel_variance_mps2sq", format_double(*meta.fixture->accel_variance_mps2sq));
    }
  }
  return kv.format();
}

MountingCalibration parse_calibration(std::string_view text, const std::string& source) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  MountingCalibration calib;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("sensor.", 0) != 0) continue;
    const auto id = parse_int(std::string_view(key).substr(7));
    const auto parts = split(value, ' ');
    std::vector<double> wxyz;
    for (std::string_view p : parts) {
      if (p.empty()) continue;
      const auto v = parse_double(p);
      if (!v) {
        kv.bad_value(key, "expected four numbers 'w x y z'");
      }
      wxyz.push_back(*v);
    }
    if (!id || *id < 0 || *id > kMaxSensorId || wxyz.size() != 4) {
      kv.bad_value(key, "expected sensor.<0-11> = w x y z");
    }
    const Quaternion q(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    if (std::abs(q.coeffs().norm() - 1.0) > 1e-6) {
      kv.bad_value(key, "alignment is not a unit quaternion");
    }
    calib.alignment[static_cast<int>(*id)] = q;
  }
  return calib;
}

std::string format_calibration(const MountingCalibration& calib) {
  KeyValueFile kv;
  for (const auto& [id, q] : calib.alignment) {
    kv.set("sensor." + std::to_string(id), format_double(q.w()) + " " + format_double(q.x()) +
                                               " " + format_double(q.y()) + " " +
                                               format_double(q.z()));
  }
  return "# sensor-to-segment alignment quaternions, w x y z\n" + kv.format();
}

ModuleFile parse_module_text(std::string_view text, const std::string& source) {
  ModuleFile module;
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) {
    throw ParseError(ErrorKind::MalformedLine, source, 1, 0, "empty file; header expected");
  }

  auto strip_cr = [](std::string_view l) {
    return (!l.empty() && l.back() == '\r') ? l.substr(0, l.size() - 1) : l;
  };

  const std::string_view header = strip_cr(lines[0]);
  if (header == kModuleHeader) {
    module.has_event_column = false;
  } else if (header == std::string(kModuleHeader) + ",event") {
    module.has_event_column = true;
  } else {
    throw ParseError(ErrorKind::MalformedLine, source, 1, 1,
                     "header must be '" + std::string(kModuleHeader) + "[,event]'");
  }
  const std::size_t n_fields = module.has_event_column ? 10 : 9;

  std::set<std::pair<std::int64_t, int>> seen;
  std::optional<int> module_id;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string_view line = strip_cr(lines[li]);
    const std::vector<std::string_view> fields = split(line, ',');
    if (fields.size() != n_fields) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, 0,
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    auto column_of = [&](std::size_t f) {
      return static_cast<std::size_t>(fields[f].data() - line.data()) + 1;
    };
    auto int_field = [&](std::size_t f, const char* name) {
      const auto v = parse_int(fields[f]);
      if (!v) {
        throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(f),
                         std::string(name) + ": expected an integer, got '" +
                             std::string(fields[f]) + "'");
      }
      return *v;
    };
    auto real_field = [&](std::size_t f, const char* name) {
      const auto v = parse_double(fields[f]);
      if (!v) {
        throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(f),
                         std::string(name) + ": expected a finite number, got '" +
                             std::string(fields[f]) + "'");
      }
      return *v;
    };

    ModuleRecord rec;
    const auto mid = int_field(0, "module_id");
    rec.tick = int_field(1, "tick");
    const auto sid = int_field(2, "sensor_id");
    static constexpr const char* kAxis[] = {"ax", "ay", "az", "gx", "gy", "gz"};
    for (int k = 0; k < 3; ++k) rec.accel[k] = real_field(3 + k, kAxis[k]);
    for (int k = 0; k < 3; ++k) rec.gyro[k] = real_field(6 + k, kAxis[3 + k]);
    if (module.has_event_column) rec.event = int_field(9, "event");

    if (mid < 0 || mid > std::numeric_limits<int>::max()) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(0),
                       "module_id must be non-negative");
    }
    if (module_id && *module_id != mid) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(0),
                       "module_id changes within the file");
    }
    module_id = static_cast<int>(mid);
    if (sid < 0 || sid > kMaxSensorId) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(2),
                       "sensor_id must be in 0..11");
    }
    rec.sensor_id = static_cast<int>(sid);
    if (rec.tick < 0) {
      throw ParseError(ErrorKind::MalformedLine, source, line_no, column_of(1),
                       "tick must be non-negative");
    }
    for (int k = 0; k < 3; ++k) {
      if (std::abs(rec.accel[k]) > kAccelFullScale) {
        throw ParseError(ErrorKind::UnitRange, source, line_no, column_of(3 + k),
                         std::string(kAxis[k]) + " beyond accelerometer full scale (160 m/s²)");
      }
      if (std::abs(rec.gyro[k]) > kGyroFullScale) {
        throw ParseError(ErrorKind::UnitRange, source, line_no, column_of(6 + k),
                         std::string(kAxis[3 + k]) + " beyond gyroscope full scale (35 rad/s)");
      }
    }
    if (!module.records.empty() && rec.tick < module.records.back().tick) {
      throw ParseError(ErrorKind::NonMonotoneTick, source, line_no, column_of(1),
                       "tick " + std::to_string(rec.tick) + " after tick " +
                           std::to_string(module.records.back().tick));
    }
    if (!seen.insert({rec.tick, rec.sensor_id}).second) {
      throw ParseError(ErrorKind::DuplicateRecord, source, line_no, 0,
                       "second record for tick " + std::to_string(rec.tick) + ", sensor " +
                           std::to_string(rec.sensor_id));
    }
    module.records.push_back(rec);
  }

  if (module.records.empty()) {
    throw ParseError(ErrorKind::MalformedLine, source, 2, 0, "no records after the header");
  }
  module.module_id = *module_id;

  // Every sensor of the module must report at the trigger tick.
  std::set<int> at_trigger;
  for (const ModuleRecord& r : module.records) {
    if (r.tick == 0) at_trigger.insert(r.sensor_id);
  }
  for (std::size_t i = 0; i < module.records.size(); ++i) {
    const ModuleRecord& r = module.records[i];
    if (!at_trigger.contains(r.sensor_id)) {
      throw ParseError(ErrorKind::MissingTriggerTick, source, i + 2, 0,
                       "sensor " + std::to_string(r.sensor_id) + " has no record at tick 0");
    }
  }
  return module;
}

ModuleFile parse_module_file(const std::filesystem::path& path) {
  return parse_module_text(read_text_file(path), path.string());
}

std::string format_module_file(const ModuleFile& module) {
  std::string out(kModuleHeader);
  if (module.has_event_column) out += ",event";
  out += '\n';
  for (const ModuleRecord& r : module.records) {
    out += std::to_string(module.module_id);
    out += ',';
    out += std::to_string(r.tick);
    out += ',';
    out += std::to_string(r.sensor_id);
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(r.accel[k]);
    }
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(r.gyro[k]);
    }
    if (module.has_event_column) {
      out += ',';
      out += std::to_string(r.event.value_or(0));
    }
    out += '\n';
  }
  return out;
}

void write_module_file(const ModuleFile& module, const std::filesystem::path& path) {
  write_text_file(path, format_module_file(module));
}

SyncedStreams synchronize(std::span<const ModuleFile> modules, const SessionMeta& meta) {
  if (modules.empty()) throw Error(ErrorKind::EmptyInput, "synchronize: no module files");
  if (!(meta.sample_rate_hz > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "synchronize: sample rate must be > 0");
  }

  std::map<int, std::map<std::int64_t, const ModuleRecord*>> by_sensor;
  std::map<int, int> owner;
  for (const ModuleFile& m : modules) {
    for (const ModuleRecord& r : m.records) {
      const auto [it, inserted] = owner.emplace(r.sensor_id, m.module_id);
      if (!inserted && it->second != m.module_id) {
        throw Error(ErrorKind::DuplicateRecord, "sensor " + std::to_string(r.sensor_id) +
                                                    " appears in modules " +
                                                    std::to_string(it->second) + " and " +
                                                    std::to_string(m.module_id));
      }
      by_sensor[r.sensor_id][r.tick] = &r;
    }
  }

  std::int64_t first = std::numeric_limits<std::int64_t>::min();
  std::int64_t last = std::numeric_limits<std::int64_t>::max();
  for (const auto& [id, ticks] : by_sensor) {
    first = std::max(first, ticks.begin()->first);
    last = std::min(last, ticks.rbegin()->first);
  }
  if (first > last) {
    throw Error(ErrorKind::NoCommonRange, "module files share no common tick range");
  }

  SyncedStreams out;
  out.first_tick = first;
  out.last_tick = last;
  const double rate = meta.sample_rate_hz;
  for (const auto& [id, ticks] : by_sensor) {
    ImuStream& stream = out.streams[id];
    std::vector<bool>& flags = out.interpolated[id];
    const ModuleRecord* prev = nullptr;
    for (auto it = ticks.lower_bound(first); it != ticks.end() && it->first <= last; ++it) {
      const ModuleRecord& r = *it->second;
      if (prev != nullptr) {
        const std::int64_t missing = r.tick - prev->tick - 1;
        if (missing > 0 && missing <= 2) {
          for (std::int64_t k = 1; k <= missing; ++k) {
            const double f = static_cast<double>(k) / static_cast<double>(missing + 1);
            ImuSample s;
            s.sensor_id = id;
            s.timestamp_s = static_cast<double>(prev->tick + k) / rate;
            s.accel = prev->accel + f * (r.accel - prev->accel);
            s.gyro = prev->gyro + f * (r.gyro - prev->gyro);
            stream.push_back(s);
            flags.push_back(true);
          }
        }
      }
      ImuSample s;
      s.sensor_id = id;
      s.timestamp_s = static_cast<double>(r.tick) / rate;
      s.accel = r.accel;
      s.gyro = r.gyro;
      stream.push_back(s);
      flags.push_back(false);
      prev = &r;
    }
  }
  return out;
}

std::vector<ModuleFile> streams_to_modules(const std::map<int, ImuStream>& streams,
                                           const SessionMeta& meta) {
  std::vector<ModuleFile> modules;
  for (Side side : kSides) {
    ModuleFile m;
    m.module_id = static_cast<int>(side);
    std::vector<ModuleRecord> recs;
    for (SensorRole role : kSensorRoles) {
      const int id = meta.layout.sensor(side, role);
      const auto it = streams.find(id);
      if (it == streams.end()) continue;
      for (const ImuSample& s : it->second) {
        ModuleRecord r;
        r.tick = std::llround(s.timestamp_s * meta.sample_rate_hz);
        r.sensor_id = id;
        r.accel = s.accel;
        r.gyro = s.gyro;
        recs.push_back(r);
      }
    }
    std::stable_sort(recs.begin(), recs.end(), [](const ModuleRecord& a, const ModuleRecord& b) {
      return a.tick != b.tick ? a.tick < b.tick : a.sensor_id < b.sensor_id;
    });
    m.records = std::move(recs);
    if (!m.records.empty()) modules.push_back(std::move(m));
  }
  return modules;
}

std::vector<std::filesystem::path> list_module_files(const std::filesystem::path& session_dir) {
  static const std::regex kName(R"(module_(\d+)\.csv)");
  std::vector<std::pair<long, std::filesystem::path>> found;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(session_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, kName)) found.emplace_back(std::stol(m[1].str()), entry.path());
  }
  if (ec) throw Error(ErrorKind::Io, "cannot list " + session_dir.string() + ": " + ec.message());
  std::sort(found.begin(), found.end());
  std::vector<std::filesystem::path> out;
  for (auto& [n, p] : found) out.push_back(std::move(p));
  return out;
}

SessionData load_session(const std::filesystem::path& session_dir) {
  if (!std::filesystem::is_directory(session_dir)) {
    throw Error(ErrorKind::Io, session_dir.string() + " is not a session directory");
  }
  SessionData data;
  data.dir = session_dir;
  data.meta = read_meta(session_dir / "meta.kv");
  for (const auto& path : list_module_files(session_dir)) {
    data.modules.push_back(parse_module_file(path));
  }
  std::filesystem::path calib_path = session_dir / "calibration.kv";
  if (!data.meta.calibration_file.empty()) calib_path = session_dir / data.meta.calibration_file;
  if (std::filesystem::exists(calib_path)) {
    data.calibration = parse_calibration(read_text_file(calib_path), calib_path.string());
  } else if (!data.meta.calibration_file.empty()) {
    throw Error(ErrorKind::Io, "calibration file " + calib_path.string() + " not found");
  }
  if (data.modules.empty() && !data.meta.fixture) {
    throw Error(ErrorKind::EmptyInput,
                "session " + session_dir.string() + " has no module files and no fixture metrics");
  }
  return data;
}

}  // namespace gaitkit

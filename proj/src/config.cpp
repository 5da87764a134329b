#include "gaitkit/config.hpp"

#include <algorithm>
#include <functional>
#include <type_traits>

#include "gaitkit/error.hpp"

namespace gaitkit {

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::TableText: return "table-text";
    case OutputFormat::TableStructured: return "table-structured";
    case OutputFormat::BoxstatsStructured: return "boxstats-structured";
    case OutputFormat::PlotSvg: return "plot-svg";
  }
  return "?";
}

OutputFormat parse_output_format(std::string_view text) {
  for (OutputFormat f : {OutputFormat::TableText, OutputFormat::TableStructured,
                         OutputFormat::BoxstatsStructured, OutputFormat::PlotSvg}) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown output format '" + std::string(text) + "'");
}

bool ReportConfig::wants(OutputFormat f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

NoiseProfile SimConfig::noise_for(const SensorLayout& layout) const {
  NoiseProfile n = noise;
  n.mounting.clear();
  if (mount_tilt_deg > 0.0 || mount_axial_deg > 0.0) {
    n.mounting = random_mounting(layout, mount_tilt_deg, mount_axial_deg, noise.seed + 1);
  }
  return n;
}

void SimConfig::validate() const {
  profile.validate();
  noise.validate();
  if (!(mount_tilt_deg >= 0.0) || !(mount_axial_deg >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "mounting spreads must be >= 0");
  }
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample rate must be > 0");
  if (candidate_id.empty()) throw Error(ErrorKind::InvalidArgument, "candidate id must not be empty");
}

void ToolConfig::validate() const {
  analysis.validate();
  sim.validate();
  if (report.formats.empty()) throw Error(ErrorKind::InvalidArgument, "no output format selected");
  if (jobs < 0) throw Error(ErrorKind::InvalidArgument, "jobs must be >= 0");
}

namespace {

struct Key {
  std::string name;
  std::function<std::string(const ToolConfig&)> get;
  std::function<void(ToolConfig&, const KeyValueFile&)> set;
};

template <typename Access>
Key real_key(std::string name, Access access) {
  return {name,
          [access](const ToolConfig& c) { return format_double(access(c)); },
          [access, name](ToolConfig& c, const KeyValueFile& kv) {
            access(c) = kv.require_double(name);
          }};
}

template <typename Access>
Key int_key(std::string name, Access access) {
  return {name,
          [access](const ToolConfig& c) {
            return std::to_string(access(c));
          },
          [access, name](ToolConfig& c, const KeyValueFile& kv) {
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = static_cast<T>(kv.require_int(name));
          }};
}

template <typename Access>
Key bool_key(std::string name, Access access) {
  return {name,
          [access](const ToolConfig& c) {
            return std::string(access(c) ? "true" : "false");
          },
          [access, name](ToolConfig& c, const KeyValueFile& kv) {
            access(c) = kv.get_bool(name, false);
          }};
}

template <typename Access>
Key string_key(std::string name, Access access) {
  return {name, [access](const ToolConfig& c) { return access(c); },
          [access, name](ToolConfig& c, const KeyValueFile& kv) {
            const std::string v = kv.require(name);
            if (v.empty()) kv.bad_value(name, "must not be empty");
            access(c) = v;
          }};
}

std::vector<double> parse_list(const KeyValueFile& kv, const std::string& name, std::size_t n) {
  std::vector<double> out;
  const std::string value = kv.require(name);
  for (std::string_view part : split(value, ' ')) {
    if (part.empty()) continue;
    const auto v = parse_double(part);
    if (!v) kv.bad_value(name, "expected numbers separated by spaces");
    out.push_back(*v);
  }
  if (out.size() != n) kv.bad_value(name, "expected " + std::to_string(n) + " numbers");
  return out;
}

template <typename Access>
Key wave_key(std::string name, Access access) {
  return {name,
          [access](const ToolConfig& c) {
            const JointWave& w = access(c);
            return format_double(w.amplitude_deg) + " " + format_double(w.phase_rad) + " " +
                   format_double(w.amplitude2_deg) + " " + format_double(w.phase2_rad);
          },
          [access, name](ToolConfig& c, const KeyValueFile& kv) {
            const auto v = parse_list(kv, name, 4);
            access(c) = JointWave{v[0], v[1], v[2], v[3]};
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      real_key("ekf.gyro_noise_density", [](auto& c) -> auto& { return c.analysis.ekf.gyro_noise_density; }),
      real_key("ekf.accel_noise", [](auto& c) -> auto& { return c.analysis.ekf.accel_noise; }),
      real_key("ekf.linear_accel_std", [](auto& c) -> auto& { return c.analysis.ekf.linear_accel_std; }),
      real_key("ekf.bias_random_walk", [](auto& c) -> auto& { return c.analysis.ekf.bias_random_walk; }),
      real_key("ekf.gravity", [](auto& c) -> auto& { return c.analysis.ekf.gravity_magnitude; }),
      real_key("ekf.accel_gate", [](auto& c) -> auto& { return c.analysis.ekf.accel_gate; }),
      real_key("ekf.initial_attitude_std", [](auto& c) -> auto& { return c.analysis.ekf.initial_attitude_std; }),
      real_key("ekf.initial_bias_std", [](auto& c) -> auto& { return c.analysis.ekf.initial_bias_std; }),
      real_key("peaks.min_separation_s", [](auto& c) -> auto& { return c.analysis.peaks.min_separation_s; }),
      real_key("peaks.min_prominence", [](auto& c) -> auto& { return c.analysis.peaks.min_prominence; }),
      int_key("peaks.smoothing_window", [](auto& c) -> auto& { return c.analysis.peaks.smoothing_window; }),
      real_key("calibration.window_s", [](auto& c) -> auto& { return c.analysis.calibration_window_s; }),
      {"analysis.detection_side",
       [](const ToolConfig& c) { return std::string(to_string(c.analysis.detection_side)); },
       [](ToolConfig& c, const KeyValueFile& kv) {
         try {
           c.analysis.detection_side = parse_side(kv.require("analysis.detection_side"));
         } catch (const ParseError&) {
           throw;
         } catch (const Error& e) {
           kv.bad_value("analysis.detection_side", e.what());
         }
       }},
      {"analysis.detection_role",
       [](const ToolConfig& c) { return std::string(to_string(c.analysis.detection_role)); },
       [](ToolConfig& c, const KeyValueFile& kv) {
         try {
           c.analysis.detection_role = parse_sensor_role(kv.require("analysis.detection_role"));
         } catch (const ParseError&) {
           throw;
         } catch (const Error& e) {
           kv.bad_value("analysis.detection_role", e.what());
         }
       }},
      {"report.formats",
       [](const ToolConfig& c) {
         std::string out;
         for (OutputFormat f : c.report.formats) {
           if (!out.empty()) out += ',';
           out += to_string(f);
         }
         return out;
       },
       [](ToolConfig& c, const KeyValueFile& kv) {
         c.report.formats.clear();
         const std::string value = kv.require("report.formats");
         for (std::string_view part : split(value, ',')) {
           part = trim(part);
           if (part.empty()) continue;
           try {
             const OutputFormat f = parse_output_format(part);
             if (!c.report.wants(f)) c.report.formats.push_back(f);
           } catch (const Error& e) {
             kv.bad_value("report.formats", e.what());
           }
         }
       }},
      {"report.accel_basis",
       [](const ToolConfig& c) {
         return std::string(c.report.accel_basis == AccelBasis::Total ? "total" : "dynamic");
       },
       [](ToolConfig& c, const KeyValueFile& kv) {
         const std::string v = kv.require("report.accel_basis");
         if (v == "total") c.report.accel_basis = AccelBasis::Total;
         else if (v == "dynamic") c.report.accel_basis = AccelBasis::Dynamic;
         else kv.bad_value("report.accel_basis", "expected total or dynamic");
       }},
      int_key("jobs", [](auto& c) -> auto& { return c.jobs; }),
      int_key("sim.strides", [](auto& c) -> auto& { return c.sim.profile.n_strides; }),
      real_key("sim.period_s", [](auto& c) -> auto& { return c.sim.profile.stride_period_s; }),
      real_key("sim.standing_s", [](auto& c) -> auto& { return c.sim.profile.standing_s; }),
      wave_key("sim.hip", [](auto& c) -> auto& { return c.sim.profile.hip; }),
      wave_key("sim.knee", [](auto& c) -> auto& { return c.sim.profile.knee; }),
      wave_key("sim.ankle", [](auto& c) -> auto& { return c.sim.profile.ankle; }),
      real_key("sim.thigh_m", [](auto& c) -> auto& { return c.sim.profile.thigh_m; }),
      real_key("sim.shank_m", [](auto& c) -> auto& { return c.sim.profile.shank_m; }),
      real_key("sim.foot_m", [](auto& c) -> auto& { return c.sim.profile.foot_m; }),
      real_key("sim.impact_mps2", [](auto& c) -> auto& { return c.sim.profile.impact_peak_mps2; }),
      real_key("sim.impact_width_s", [](auto& c) -> auto& { return c.sim.profile.impact_width_s; }),
      bool_key("sim.linear_acceleration", [](auto& c) -> auto& { return c.sim.profile.linear_acceleration; }),
      real_key("sim.gravity", [](auto& c) -> auto& { return c.sim.profile.gravity_mps2; }),
      real_key("sim.accel_noise", [](auto& c) -> auto& { return c.sim.noise.accel_noise_std; }),
      real_key("sim.gyro_noise", [](auto& c) -> auto& { return c.sim.noise.gyro_noise_std; }),
      {"sim.gyro_bias",
       [](const ToolConfig& c) {
         const Vec3& b = c.sim.noise.gyro_bias;
         return format_double(b.x()) + " " + format_double(b.y()) + " " + format_double(b.z());
       },
       [](ToolConfig& c, const KeyValueFile& kv) {
         const auto v = parse_list(kv, "sim.gyro_bias", 3);
         c.sim.noise.gyro_bias = Vec3(v[0], v[1], v[2]);
       }},
      int_key("sim.seed", [](auto& c) -> auto& { return c.sim.noise.seed; }),
      real_key("sim.mount_tilt_deg", [](auto& c) -> auto& { return c.sim.mount_tilt_deg; }),
      real_key("sim.mount_axial_deg", [](auto& c) -> auto& { return c.sim.mount_axial_deg; }),
      real_key("sim.sample_rate_hz", [](auto& c) -> auto& { return c.sim.sample_rate_hz; }),
      string_key("sim.candidate", [](auto& c) -> auto& { return c.sim.candidate_id; }),
      string_key("sim.shoe", [](auto& c) -> auto& { return c.sim.shoe; }),
  };
  return k;
}

}  // namespace

ToolConfig parse_config(const KeyValueFile& kv, ToolConfig base) {
  for (const auto& [name, value] : kv.entries()) {
    const auto it = std::find_if(keys().begin(), keys().end(),
                                 [&](const Key& k) { return k.name == name; });
    if (it == keys().end()) {
      const auto at = kv.locate(name);
      throw ParseError(ErrorKind::MalformedLine, kv.source(), at.line, 1,
                       "unknown config key '" + name + "'");
    }
    it->set(base, kv);
  }
  try {
    base.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(ErrorKind::InvalidArgument, kv.source(), 0, 0, e.what());
  }
  return base;
}

ToolConfig load_config(const std::filesystem::path& path) {
  return parse_config(KeyValueFile::load(path));
}

std::string format_config(const ToolConfig& config) {
  std::string out = "# gaitkit configuration\n";
  std::string section;
  for (const Key& k : keys()) {
    const std::string head = k.name.substr(0, k.name.find('.'));
    if (head != section) {
      out += '\n';
      section = head;
    }
    out += k.name + " = " + k.get(config) + '\n';
  }
  return out;
}

}  // namespace gaitkit

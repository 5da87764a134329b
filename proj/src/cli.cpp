#include "gaitkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "gaitkit/config.hpp"
#include "gaitkit/error.hpp"
#include "gaitkit/pipeline.hpp"
#include "gaitkit/report.hpp"
#include "gaitkit/synth.hpp"

namespace gaitkit {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  bool print_config{false};
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Key-value config file overriding built-in defaults")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--print-config", c.print_config, "Print the effective configuration and exit");
}

ToolConfig base_config(const Common& c) {
  return c.config_path.empty() ? ToolConfig{} : load_config(c.config_path);
}

std::vector<fs::path> discover_sessions(const fs::path& input) {
  if (fs::exists(input / "meta.kv")) return {input};
  if (!fs::is_directory(input)) return {};
  std::vector<fs::path> found;
  for (const auto& entry : fs::recursive_directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().filename() == "meta.kv") {
      found.push_back(entry.path().parent_path());
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

int cmd_simulate(const ToolConfig& cfg, const std::string& out_dir, std::ostream& out) {
  SimConfig sim = cfg.sim;
  sim.validate();
  const auto shoe = find_reference_shoe(sim.shoe);
  if (!shoe) throw UsageError("--shoe: unknown shoe label '" + sim.shoe + "' (expected H1..H7)");

  SessionMeta meta;
  meta.candidate_id = sim.candidate_id;
  meta.shoe = *shoe;
  meta.sample_rate_hz = sim.sample_rate_hz;
  meta.notes = "simulated";
  const SynthSession s = simulate(sim.profile, sim.noise_for(meta.layout), meta.layout, sim.sample_rate_hz);
  write_session(s, sim.profile, meta, out_dir);
  out << "wrote " << out_dir << ": " << sim.profile.n_strides << " strides of "
      << format_double(sim.profile.stride_period_s) << " s, " << s.streams.size() << " sensors\n";
  return kExitOk;
}

int cmd_analyze(const ToolConfig& cfg, const std::vector<std::string>& inputs,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> sessions;
  int failures = 0;
  for (const std::string& in : inputs) {
    const auto found = discover_sessions(in);
    if (found.empty()) {
      err << "error: " << in << ": no session (meta.kv) found\n";
      ++failures;
    }
    sessions.insert(sessions.end(), found.begin(), found.end());
  }

  std::vector<std::optional<SessionResult>> results(sessions.size());
  std::vector<std::string> errors(sessions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sessions.size(); i = next++) {
      try {
        results[i] = analyze_session_dir(sessions[i], cfg.analysis);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::size_t n_workers = cfg.jobs > 0 ? static_cast<std::size_t>(cfg.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::clamp<std::size_t>(n_workers, 1, std::max<std::size_t>(1, sessions.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::vector<SessionResult> ok;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (results[i]) {
      ok.push_back(std::move(*results[i]));
    } else {
      err << "error: " << sessions[i].string() << ": " << errors[i] << '\n';
      ++failures;
    }
  }
  if (ok.empty()) {
    err << "error: no session could be analyzed\n";
    return kExitData;
  }
  const auto written = write_report(ok, cfg.report, out_dir);
  out << "analyzed " << ok.size() << " session(s)";
  if (failures > 0) out << ", " << failures << " failed";
  out << "; wrote " << written.size() << " file(s) to " << out_dir << '\n';
  return kExitOk;
}

int cmd_calibrate(const ToolConfig& cfg, const std::string& session_dir, std::string out_file,
                  std::ostream& out) {
  const SessionData session = load_session(session_dir);
  if (session.modules.empty()) throw Error(ErrorKind::EmptyInput, session_dir + ": no module files");
  const SyncedStreams synced = synchronize(session.modules, session.meta);
  const MountingCalibration calib =
      calibrate_streams(synced.streams, session.meta.layout, cfg.analysis.calibration_window_s);
  if (out_file.empty()) out_file = (fs::path(session_dir) / "calibration.kv").string();
  write_text_file(out_file, format_calibration(calib));
  out << "wrote " << out_file << " (" << calib.alignment.size() << " sensors)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gaitkit: IMU gait analysis toolkit", "gaitkit"};
  app.require_subcommand(1);

  Common sim_common, an_common, cal_common;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a synthetic session with ground truth");
  add_common(sim, sim_common);
  std::string sim_out;
  std::optional<int> strides;
  std::optional<double> period, standing, hip_amp, knee_amp, ankle_amp, accel_noise, gyro_noise,
      mount_tilt, mount_axial, rate;
  std::optional<std::uint64_t> seed;
  std::vector<double> gyro_bias;
  std::optional<std::string> candidate, shoe;
  bool quasi_static = false;
  sim->add_option("--out,-o", sim_out, "Session directory to create");
  sim->add_option("--strides", strides, "Number of strides")->check(CLI::PositiveNumber);
  sim->add_option("--period", period, "Stride period (s)")->check(CLI::PositiveNumber);
  sim->add_option("--standing", standing, "Quiet standing before and after walking (s)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--hip-amplitude", hip_amp, "Hip range (deg)")->check(CLI::NonNegativeNumber);
  sim->add_option("--knee-amplitude", knee_amp, "Knee range (deg)")->check(CLI::NonNegativeNumber);
  sim->add_option("--ankle-amplitude", ankle_amp, "Ankle range (deg)")->check(CLI::NonNegativeNumber);
  sim->add_option("--accel-noise", accel_noise, "Accelerometer noise std (m/s^2)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--gyro-noise", gyro_noise, "Gyroscope noise std (rad/s)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--gyro-bias", gyro_bias, "Gyroscope bias x y z (rad/s)")->expected(3);
  sim->add_option("--mount-tilt", mount_tilt, "Random mounting tilt spread (deg)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--mount-axial", mount_axial, "Random mounting axial spread (deg)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--rate", rate, "Sample rate (Hz)")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--candidate", candidate, "Candidate id");
  sim->add_option("--shoe", shoe, "Reference shoe label (H1..H7)");
  sim->add_flag("--quasi-static", quasi_static, "Accelerometers see gravity only");

  // analyze
  auto* an = app.add_subcommand("analyze", "Analyze sessions and write the report bundle");
  add_common(an, an_common);
  std::vector<std::string> an_inputs;
  std::string an_out;
  std::optional<std::string> formats, basis;
  std::optional<int> jobs;
  an->add_option("sessions", an_inputs, "Session directories or folders containing them");
  an->add_option("--out,-o", an_out, "Report directory");
  an->add_option("--format", formats,
                 "Comma list of table-text, table-structured, boxstats-structured, plot-svg");
  an->add_option("--accel-basis", basis, "Acceleration shown in the text table: total or dynamic")
      ->check(CLI::IsMember({"total", "dynamic"}));
  an->add_option("--jobs,-j", jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  // plot
  auto* pl = app.add_subcommand("plot", "Render SVG plots from a report directory");
  std::string pl_in, pl_out;
  pl->add_option("bundle", pl_in, "Report directory written by analyze")->required();
  pl->add_option("--out,-o", pl_out, "Directory for the SVG files")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Derive calibration.kv from a session's standing window");
  add_common(cal, cal_common);
  std::string cal_in, cal_out;
  std::optional<double> window;
  cal->add_option("session", cal_in, "Session directory");
  cal->add_option("--out,-o", cal_out, "Output file (default <session>/calibration.kv)");
  cal->add_option("--window", window, "Standing window length (s)")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"gaitkit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      ToolConfig cfg = base_config(sim_common);
      GaitProfile& p = cfg.sim.profile;
      if (strides) p.n_strides = *strides;
      if (period) p.stride_period_s = *period;
      if (standing) p.standing_s = *standing;
      if (hip_amp) p.hip.amplitude_deg = *hip_amp;
      if (knee_amp) p.knee.amplitude_deg = *knee_amp;
      if (ankle_amp) p.ankle.amplitude_deg = *ankle_amp;
      if (quasi_static) p.linear_acceleration = false;
      if (accel_noise) cfg.sim.noise.accel_noise_std = *accel_noise;
      if (gyro_noise) cfg.sim.noise.gyro_noise_std = *gyro_noise;
      if (!gyro_bias.empty()) cfg.sim.noise.gyro_bias = Vec3(gyro_bias[0], gyro_bias[1], gyro_bias[2]);
      if (mount_tilt) cfg.sim.mount_tilt_deg = *mount_tilt;
      if (mount_axial) cfg.sim.mount_axial_deg = *mount_axial;
      if (rate) cfg.sim.sample_rate_hz = *rate;
      if (seed) cfg.sim.noise.seed = *seed;
      if (candidate) cfg.sim.candidate_id = *candidate;
      if (shoe) cfg.sim.shoe = *shoe;
      cfg.validate();
      if (sim_common.print_config) {
        out << format_config(cfg);
        return kExitOk;
      }
      if (sim_out.empty()) throw UsageError("simulate: --out is required");
      return cmd_simulate(cfg, sim_out, out);
    }
    if (an->parsed()) {
      ToolConfig cfg = base_config(an_common);
      if (formats) {
        cfg.report.formats.clear();
        for (std::string_view f : split(*formats, ',')) {
          f = trim(f);
          if (f.empty()) continue;
          try {
            const OutputFormat parsed = parse_output_format(f);
            if (!cfg.report.wants(parsed)) cfg.report.formats.push_back(parsed);
          } catch (const Error& e) {
            throw UsageError(std::string("--format: ") + e.what());
          }
        }
      }
      if (basis) cfg.report.accel_basis = *basis == "total" ? AccelBasis::Total : AccelBasis::Dynamic;
      if (jobs) cfg.jobs = *jobs;
      cfg.validate();
      if (an_common.print_config) {
        out << format_config(cfg);
        return kExitOk;
      }
      if (an_inputs.empty()) throw UsageError("analyze: at least one session path is required\n" + an->help());
      if (an_out.empty()) throw UsageError("analyze: --out is required");
      return cmd_analyze(cfg, an_inputs, an_out, out, err);
    }
    if (pl->parsed()) {
      const PlotSummary s = plot_bundle(pl_in, pl_out);
      for (const std::string& w : s.warnings) err << "warning: " << w << '\n';
      out << "wrote " << s.files.size() << " plot(s) to " << pl_out << '\n';
      return kExitOk;
    }
    if (cal->parsed()) {
      ToolConfig cfg = base_config(cal_common);
      if (window) cfg.analysis.calibration_window_s = *window;
      cfg.validate();
      if (cal_common.print_config) {
        out << format_config(cfg);
        return kExitOk;
      }
      if (cal_in.empty()) throw UsageError("calibrate: a session directory is required");
      return cmd_calibrate(cfg, cal_in, cal_out, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace gaitkit

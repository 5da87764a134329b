// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gaitkit/cli.hpp"
#include "gaitkit/ekf.hpp"
#include "gaitkit/gait_metrics.hpp"
#include "gaitkit/pipeline.hpp"
#include "gaitkit/report.hpp"
#include "gaitkit/session_io.hpp"
#include "gaitkit/synth.hpp"
#include "support.hpp"

using namespace gaitkit;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass{true};
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

// Roll and pitch errors in degrees; both depend on the gravity direction only.
std::pair<double, double> tilt_errors(const Quaternion& est, const Quaternion& truth) {
  const EulerAngles a = rotmat_to_euler(quat_to_rotmat(est));
  const EulerAngles b = rotmat_to_euler(quat_to_rotmat(truth));
  auto wrap = [](double d) { return std::remainder(d, 2.0 * std::numbers::pi); };
  return {rad_to_deg(wrap(a.roll - b.roll)), rad_to_deg(wrap(a.pitch - b.pitch))};
}

SessionMeta sim_meta(const std::string& shoe = "H1") {
  SessionMeta meta;
  meta.candidate_id = "sim01";
  meta.shoe = *find_reference_shoe(shoe);
  return meta;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const double fs = 32.0;
  const std::size_t n = static_cast<std::size_t>(60.0 * fs) + 1;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> accel_noise(0.0, 0.05), gyro_noise(0.0, 0.005);
  const Vec3 bias(0.01, 0.01, 0.01);
  ImuStream s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i].timestamp_s = static_cast<double>(i) / fs;
    s[i].accel = Vec3(accel_noise(rng), accel_noise(rng), 9.81 + accel_noise(rng));
    s[i].gyro = bias + Vec3(gyro_noise(rng), gyro_noise(rng), gyro_noise(rng));
  }
  const auto est = ekf_run(s, EkfConfig{});
  std::vector<double> roll, pitch;
  for (const OrientationSample& q : est) {
    if (q.timestamp_s < 2.0) continue;
    const auto [r, p] = tilt_errors(q.q, Quaternion::Identity());
    roll.push_back(r);
    pitch.push_back(p);
  }

  // Open-loop strapdown integration of the same gyro stream.
  Quaternion q = Quaternion::Identity();
  double drift_60 = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const Vec3 w = 0.5 * (s[i - 1].gyro + s[i].gyro);
    q = quat_normalize(quat_multiply(q, quat_from_rotation_vector<double>(w / fs)));
    if (i == n - 1) {
      const auto [r, p] = tilt_errors(q, Quaternion::Identity());
      drift_60 = std::max(std::abs(r), std::abs(p));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(rms(roll) < 1.0, "roll RMS " + fmt(rms(roll)) + " deg < 1");
  o.require(rms(pitch) < 1.0, "pitch RMS " + fmt(rms(pitch)) + " deg < 1");
  o.require(drift_60 > 5.0, "open-loop tilt at 60 s " + fmt(drift_60, 1) + " deg > 5");
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed, 2) + " s < 5");
  return o;
}

Outcome criterion2() {
  Outcome o;
  GaitProfile p;
  p.linear_acceleration = false;
  p.knee.amplitude_deg = 60.0;
  p.stride_period_s = 1.25;
  p.n_strides = 20;
  const SensorLayout layout = SensorLayout::standard();
  const SynthSession sim = simulate(p, NoiseProfile{}, layout);
  for (SensorRole role : {SensorRole::ShankUpper, SensorRole::ShankLower}) {
    const int id = layout.sensor(Side::Left, role);
    const auto est = ekf_run(sim.streams.at(id), EkfConfig{});
    const auto& truth = sim.truth.segment_orientation[0][static_cast<int>(Segment::Shank)];
    std::vector<double> roll, pitch;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const auto [r, pt] = tilt_errors(est[i].q, truth[i + kEkfInitWindow]);
      roll.push_back(r);
      pitch.push_back(pt);
    }
    const std::string name(to_string(role));
    o.require(rms(roll) < 2.0 && rms(pitch) < 2.0,
              name + " roll/pitch RMS " + fmt(rms(roll)) + "/" + fmt(rms(pitch)) + " deg < 2");
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = Clock::now();
  GaitProfile p;
  p.knee.amplitude_deg = 60.0;
  p.ankle.amplitude_deg = 25.0;
  const SensorLayout layout = SensorLayout::standard();
  NoiseProfile noise;
  noise.seed = 31;
  noise.mounting = random_mounting(layout, 15.0, 5.0, 32);
  const SynthSession sim = simulate(p, noise, layout);
  const SessionResult r = analyze_streams(sim.streams, sim_meta(), std::nullopt, AnalysisConfig{});
  const double elapsed = seconds_since(t0);
  o.require(r.cycles.size() >= 19, std::to_string(r.cycles.size()) + " cycles");
  for (Side side : kSides) {
    const BoxStats& knee = r.metrics.range_stats.at({side, Joint::Knee});
    const BoxStats& ankle = r.metrics.range_stats.at({side, Joint::Ankle});
    const std::string s(to_string(side));
    o.require(std::abs(knee.median - 60.0) <= 3.0, s + " knee median " + fmt(knee.median, 2));
    o.require(std::abs(ankle.median - 25.0) <= 2.0, s + " ankle median " + fmt(ankle.median, 2));
  }
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed, 2) + " s < 10");
  return o;
}

Outcome criterion4() {
  Outcome o;
  GaitProfile p;
  p.n_strides = 20;
  p.stride_period_s = 1.25;
  const SynthSession sim = simulate(p, NoiseProfile{}, SensorLayout::standard());
  const SessionResult r = analyze_streams(sim.streams, sim_meta(), std::nullopt, AnalysisConfig{});
  const StepTimes st = step_cycle_times(r.peaks, r.fs);
  o.require(st.times_s.size() == 19,
            std::to_string(r.peaks.size()) + " peaks, " + std::to_string(st.times_s.size()) +
                " cycle times");
  o.require(std::abs(st.mean_s - 1.25) <= 1.0 / 32.0, "mean " + fmt(st.mean_s, 4) + " s");
  const std::vector<double> flat(640, 9.81);
  o.require(detect_steps(flat, 32.0, PeakParams{}).empty(), "constant signal: 0 peaks");
  return o;
}

Outcome criterion5() {
  Outcome o;
  o.require(accel_magnitude(Vec3(3.0, 4.0, 0.0)) == 5.0 &&
                accel_magnitude(Vec3(0.0, 5.0, 12.0)) == 13.0 &&
                accel_magnitude(Vec3(-8.0, 0.0, 15.0)) == 17.0,
            "(3,4,0)->5, (0,5,12)->13, (-8,0,15)->17");

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v(u(rng), u(rng), u(rng));
    const Quaternion q = quat_normalize(Quaternion(n(rng), n(rng), n(rng), n(rng)));
    worst = std::max(worst, std::abs(accel_magnitude(quat_rotate(q, v)) - accel_magnitude(v)));
  }
  std::ostringstream w;
  w << "rotation invariance max error " << worst;
  o.require(worst <= 1e-12, w.str());

  GaitProfile still;
  still.n_strides = 1;
  still.hip.amplitude_deg = still.knee.amplitude_deg = still.ankle.amplitude_deg = 0.0;
  still.impact_peak_mps2 = 0.0;
  const SynthSession sim = simulate(still, NoiseProfile::noiseless(), SensorLayout::standard());
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [id, stream] : sim.streams) {
    for (const ImuSample& s : stream) {
      sum += accel_magnitude(s);
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  o.require(std::abs(mean - 9.81) <= 1e-6, "static mean " + fmt(mean, 9) + " m/s^2");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const BoxStats a = box_stats(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  o.require(a.median == 5 && a.q1 == 3 && a.q3 == 7 && a.whisker_low == 1 && a.whisker_high == 9 &&
                a.outliers.empty(),
            "[1..9] -> 5/3/7, whiskers 1/9");
  const BoxStats b = box_stats(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 40});
  o.require(b.whisker_high == 8 && b.outliers == std::vector<double>{40},
            "fence case: 40 is an outlier, whisker at 8");

  std::mt19937_64 rng(66);
  std::uniform_int_distribution<int> len(1, 80);
  std::normal_distribution<double> n(0.0, 10.0);
  std::exponential_distribution<double> tail(0.2);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (double& x : v) x = trial % 2 ? n(rng) : tail(rng);
    const BoxStats s = box_stats(v);
    const double iqr = s.q3 - s.q1;
    bool ok = s.n == v.size() && s.whisker_low <= s.q1 && s.q1 <= s.median &&
              s.median <= s.q3 && s.q3 <= s.whisker_high &&
              s.whisker_low >= s.q1 - 1.5 * iqr && s.whisker_high <= s.q3 + 1.5 * iqr;
    for (double x : s.outliers) ok = ok && (x < s.q1 - 1.5 * iqr || x > s.q3 + 1.5 * iqr);
    const auto inside = std::count_if(v.begin(), v.end(), [&](double x) {
      return x >= s.whisker_low && x <= s.whisker_high;
    });
    ok = ok && static_cast<std::size_t>(inside) + s.outliers.size() == v.size();
    if (!ok) ++bad;
  }
  o.require(bad == 0, "invariants on 1000 random datasets (" + std::to_string(bad) + " violations)");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::vector<std::pair<std::string, double>> heights{
      {"H1", 0.25}, {"H2", 1.75}, {"H3", 2.5}, {"H4", 4.0}, {"H5", 4.0}, {"H6", 4.5}, {"H7", 2.25}};
  bool all = true;
  for (const auto& [label, h] : heights) {
    all = all && derive_walking_height(*find_reference_shoe(label)) == h;
  }
  o.require(all, "walking heights H1..H7 (H3 2.5 in, H7 2.25 in)");
  const ShoeClusters c = cluster_shoes(reference_shoes());
  o.require(c.walking_height == std::vector<std::string>{"H1", "H2", "H3"},
            "walking-height cluster H1,H2,H3");
  o.require(c.platform == std::vector<std::string>{"H4", "H5", "H6"}, "platform cluster H4,H5,H6");
  o.require(c.overall_height == std::vector<std::string>{"H3", "H7"}, "overall-height pair H3,H7");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const test::TempDir dir("acceptance8");
  const std::string fixtures = test::fixture_path("table1").string();
  std::string first;
  for (const char* out : {"a", "b"}) {
    std::ostringstream sout, serr;
    const int code = run_cli({"analyze", fixtures, "--out", (dir / out).string()}, sout, serr);
    if (code != kExitOk) {
      o.require(false, "analyze exit " + std::to_string(code) + ": " + serr.str());
      return o;
    }
  }
  const std::string a = test::slurp(dir / "a" / "table.txt");
  const auto rows = test::table_text_rows(a);
  const auto& expected = test::table1_rows();
  std::size_t matched = 0;
  for (std::size_t i = 0; i < expected.size() && i < rows.size(); ++i) {
    for (std::size_t k = 3; k < expected[i].size() && k < rows[i].size(); ++k) {
      if (rows[i][k] == expected[i][k]) ++matched;
    }
  }
  o.require(matched == 63, std::to_string(matched) + "/63 values reproduced");
  o.require(rows == expected, "shoe parameters and layout match");
  o.require(a == test::slurp(dir / "b" / "table.txt") &&
                test::slurp(dir / "a" / "metrics.csv") == test::slurp(dir / "b" / "metrics.csv"),
            "byte-identical across runs");
  return o;
}

bool healthy(const EkfState& s) {
  if (std::abs(s.q.coeffs().norm() - 1.0) > 1e-9) return false;
  if ((s.P - s.P.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  return Eigen::SelfAdjointEigenSolver<Mat6>(s.P).eigenvalues().minCoeff() >= -1e-9;
}

Outcome criterion9() {
  Outcome o;
  GaitProfile p;
  p.n_strides = 45;  // 2 + 56.25 + 2 s
  const SensorLayout layout = SensorLayout::standard();
  NoiseProfile noise;
  noise.gyro_bias = Vec3(0.01, -0.01, 0.01);
  const SynthSession sim = simulate(p, noise, layout);
  const EkfConfig cfg;
  std::size_t steps = 0, unhealthy = 0;
  for (int id : {4, 5, 10}) {
    const ImuStream& s = sim.streams.at(id);
    std::vector<Vec3> init;
    for (std::size_t i = 0; i < kEkfInitWindow; ++i) init.push_back(s[i].accel);
    EkfState st = ekf_init(cfg, init);
    for (std::size_t i = kEkfInitWindow; i < s.size(); ++i) {
      const double dt = s[i].timestamp_s - s[i - 1].timestamp_s;
      st = ekf_predict(st, 0.5 * (s[i - 1].gyro + s[i].gyro), dt, cfg);
      unhealthy += healthy(st) ? 0 : 1;
      st = ekf_update(st, s[i].accel, cfg).state;
      unhealthy += healthy(st) ? 0 : 1;
      steps += 2;
    }
  }
  o.require(sim.truth.time_s.back() >= 60.0 && unhealthy == 0,
            std::to_string(steps) + " filter steps over " + fmt(sim.truth.time_s.back(), 1) +
                " s: norm, symmetry and PSD held (" + std::to_string(unhealthy) + " failures)");

  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Quaternion q = quat_normalize(Quaternion(n(rng), n(rng), n(rng), n(rng)));
    const Mat36 H = gravity_measurement_jacobian(q, cfg.gravity_magnitude);
    Mat36 num = Mat36::Zero();
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      Vec3 d = Vec3::Zero();
      d[c] = h;
      const Vec3 plus = gravity_measurement(quat_multiply(q, quat_from_rotation_vector(d)),
                                            cfg.gravity_magnitude);
      const Vec3 minus = gravity_measurement(
          quat_multiply(q, quat_from_rotation_vector<double>(-d)), cfg.gravity_magnitude);
      num.col(c) = (plus - minus) / (2.0 * h);
    }
    worst = std::max(worst, (num - H).norm() / H.norm());
  }
  std::ostringstream w;
  w << "Jacobian vs central differences, worst relative error " << worst;
  o.require(worst < 1e-5, w.str());
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<int> strides(1, 3);
  std::uniform_real_distribution<double> period(0.8, 1.6), amp(10.0, 70.0), noise_std(0.0, 0.3);
  std::uniform_int_distribution<int> shoe(1, 7);
  int failures = 0;
  const test::TempDir dir("acceptance10");
  for (int i = 0; i < 100; ++i) {
    GaitProfile p;
    p.n_strides = strides(rng);
    p.stride_period_s = period(rng);
    p.standing_s = 1.0;
    p.knee.amplitude_deg = amp(rng);
    p.hip.amplitude_deg = amp(rng) / 2.0;
    NoiseProfile noise;
    noise.seed = rng();
    noise.accel_noise_std = noise_std(rng);
    noise.gyro_noise_std = noise_std(rng) / 10.0;
    const SensorLayout layout = SensorLayout::standard();
    noise.mounting = random_mounting(layout, 20.0, 10.0, rng());
    const SynthSession sim = simulate(p, noise, layout);
    SessionMeta meta = sim_meta("H" + std::to_string(shoe(rng)));
    meta.candidate_id = "rt" + std::to_string(i);
    const auto path = dir / ("s" + std::to_string(i));
    write_session(sim, p, meta, path);
    const SessionData back = load_session(path);
    const SyncedStreams synced = synchronize(back.modules, back.meta);
    bool same = back.meta.candidate_id == meta.candidate_id && back.meta.shoe == meta.shoe &&
                back.modules == streams_to_modules(sim.streams, meta) &&
                synced.streams.size() == sim.streams.size();
    for (const auto& [id, stream] : sim.streams) {
      const ImuStream& got = synced.streams.at(id);
      same = same && got.size() == stream.size();
      for (std::size_t k = 0; same && k < stream.size(); ++k) {
        same = got[k].timestamp_s == stream[k].timestamp_s && got[k].accel == stream[k].accel &&
               got[k].gyro == stream[k].gyro;
      }
    }
    if (!same) ++failures;
  }
  o.require(failures == 0,
            "100 randomized sessions round trip (" + std::to_string(failures) + " mismatches)");

  std::size_t matched = 0;
  const auto cases = test::malformed_cases();
  std::string misses;
  for (const auto& c : cases) {
    const auto got = test::parse_malformed(c);
    if (got && got->kind == c.kind && got->line == c.line && got->column == c.column) {
      ++matched;
    } else {
      misses += " " + c.file;
    }
  }
  o.require(!cases.empty() && matched == cases.size(),
            std::to_string(matched) + "/" + std::to_string(cases.size()) +
                " malformed fixtures give their named error and location" + misses);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"EKF attitude accuracy (static)", criterion1},
      {"EKF dynamic tracking", criterion2},
      {"joint-angle recovery", criterion3},
      {"step-cycle detection", criterion4},
      {"acceleration magnitude", criterion5},
      {"quartile/box statistics", criterion6},
      {"shoe algebra", criterion7},
      {"table fixture round trip", criterion8},
      {"numerical hygiene", criterion9},
      {"format contracts", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "doctest.h"
#include "gaitkit/config.hpp"

using namespace gaitkit;

TEST_SUITE("config") {
  TEST_CASE("printed defaults load back unchanged") {
    const ToolConfig defaults;
    const std::string text = format_config(defaults);
    const ToolConfig back = parse_config(KeyValueFile::parse(text, "defaults.kv"));
    CHECK(format_config(back) == text);
  }

  TEST_CASE("every ekf field is exposed") {
    const std::string text = format_config(ToolConfig{});
    for (const char* key :
         {"ekf.gyro_noise_density", "ekf.accel_noise", "ekf.linear_accel_std",
          "ekf.bias_random_walk", "ekf.gravity", "ekf.accel_gate", "ekf.initial_attitude_std",
          "ekf.initial_bias_std", "peaks.min_separation_s", "peaks.min_prominence",
          "peaks.smoothing_window", "report.formats"}) {
      CAPTURE(key);
      CHECK(text.find(std::string(key) + " = ") != std::string::npos);
    }
  }

  TEST_CASE("overrides apply on top of the base") {
    const auto kv = KeyValueFile::parse(
        "ekf.accel_gate = 0.3\n"
        "peaks.smoothing_window = 7\n"
        "report.formats = table-text, boxstats-structured\n"
        "report.accel_basis = dynamic\n"
        "sim.knee = 45 0 5 1.5\n"
        "sim.gyro_bias = 0.01 0 -0.02\n"
        "sim.linear_acceleration = false\n",
        "over.kv");
    const ToolConfig c = parse_config(kv);
    CHECK(c.analysis.ekf.accel_gate == 0.3);
    CHECK(c.analysis.peaks.smoothing_window == 7);
    CHECK(c.report.formats ==
          std::vector<OutputFormat>{OutputFormat::TableText, OutputFormat::BoxstatsStructured});
    CHECK(c.report.accel_basis == AccelBasis::Dynamic);
    CHECK(c.sim.profile.knee.amplitude_deg == 45.0);
    CHECK(c.sim.profile.knee.amplitude2_deg == 5.0);
    CHECK(c.sim.profile.knee.phase2_rad == 1.5);
    CHECK(c.sim.noise.gyro_bias == Vec3(0.01, 0.0, -0.02));
    CHECK_FALSE(c.sim.profile.linear_acceleration);
    CHECK(c.analysis.ekf.accel_noise == EkfConfig{}.accel_noise);
  }

  TEST_CASE("unknown keys and bad values are located") {
    try {
      parse_config(KeyValueFile::parse("jobs = 2\nekf.gate = 1\n", "typo.kv"));
      FAIL("expected rejection");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 1);
    }
    try {
      parse_config(KeyValueFile::parse("ekf.accel_noise = lots\n", "bad.kv"));
      FAIL("expected rejection");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ErrorKind::MalformedLine);
      CHECK(e.line() == 1);
      CHECK(e.column() == 19);
    }
  }

  TEST_CASE("invalid combined configuration is rejected") {
    CHECK_THROWS_AS(parse_config(KeyValueFile::parse("ekf.accel_noise = -1\n", "neg.kv")), Error);
    CHECK_THROWS_AS(parse_config(KeyValueFile::parse("jobs = -3\n", "jobs.kv")), Error);
  }

  TEST_CASE("output format names") {
    for (OutputFormat f : {OutputFormat::TableText, OutputFormat::TableStructured,
                           OutputFormat::BoxstatsStructured, OutputFormat::PlotSvg}) {
      CHECK(parse_output_format(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_output_format("pdf"), Error);
  }
}

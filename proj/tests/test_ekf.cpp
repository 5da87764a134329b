#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "gaitkit/ekf.hpp"
#include "gaitkit/synth.hpp"

using namespace gaitkit;

namespace {

ImuStream level_stream(std::size_t n, double fs, const Vec3& accel, const Vec3& gyro) {
  ImuStream s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i].timestamp_s = static_cast<double>(i) / fs;
    s[i].accel = accel;
    s[i].gyro = gyro;
  }
  return s;
}

bool healthy(const EkfState& s) {
  if (std::abs(s.q.coeffs().norm() - 1.0) > 1e-9) return false;
  if ((s.P - s.P.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  return Eigen::SelfAdjointEigenSolver<Mat6>(s.P).eigenvalues().minCoeff() >= -1e-9;
}

}  // namespace

TEST_SUITE("ekf") {
  TEST_CASE("init levels from a tilted accelerometer") {
    const EulerAngles truth{deg_to_rad(10.0), deg_to_rad(-5.0), 0.0};
    const Vec3 f = euler_to_rotmat(truth).transpose() * Vec3(0.0, 0.0, 9.81);
    const std::vector<Vec3> window(kEkfInitWindow, f);
    const EkfState s = ekf_init(EkfConfig{}, window);
    const EulerAngles e = rotmat_to_euler(quat_to_rotmat(s.q));
    CHECK(rad_to_deg(e.roll) == doctest::Approx(10.0));
    CHECK(rad_to_deg(e.pitch) == doctest::Approx(-5.0));
    CHECK(s.bias.isZero());
  }

  TEST_CASE("init rejects short or moving windows") {
    const std::vector<Vec3> short_window(3, Vec3(0.0, 0.0, 9.81));
    CHECK_THROWS_AS(ekf_init(EkfConfig{}, short_window), Error);
    const std::vector<Vec3> falling(kEkfInitWindow, Vec3(0.0, 0.0, 1.0));
    try {
      ekf_init(EkfConfig{}, falling);
      FAIL("expected init failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InitFailure);
    }
  }

  TEST_CASE("zero rate predict is a fixed point on the attitude") {
    EkfConfig cfg;
    EkfState s;
    s.q = quat_normalize(Quaternion(0.9, 0.1, -0.2, 0.3));
    const EkfState next = ekf_predict(s, Vec3::Zero(), 1.0 / 32.0, cfg);
    CHECK(next.q.coeffs() == s.q.coeffs());
  }

  TEST_CASE("predict integrates a constant rate") {
    EkfConfig cfg;
    EkfState s;
    const Vec3 w(0.0, 0.0, 0.5);
    for (int i = 0; i < 64; ++i) s = ekf_predict(s, w, 1.0 / 32.0, cfg);
    const EulerAngles e = rotmat_to_euler(quat_to_rotmat(s.q));
    CHECK(e.yaw == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("gate skips updates far from gravity") {
    EkfConfig cfg;
    EkfState s;
    const EkfUpdate up = ekf_update(s, Vec3(0.0, 0.0, 9.81 * 1.3), cfg);
    CHECK(up.gated);
    CHECK(up.state.P == s.P);
    const EkfUpdate ok = ekf_update(s, Vec3(0.0, 0.5, 9.81), cfg);
    CHECK_FALSE(ok.gated);
  }

  TEST_CASE("update keeps the state healthy") {
    EkfConfig cfg;
    EkfState s;
    s.P = Mat6::Identity() * 0.01;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.2);
    for (int i = 0; i < 500; ++i) {
      s = ekf_predict(s, Vec3(n(rng), n(rng), n(rng)), 1.0 / 32.0, cfg);
      CHECK(healthy(s));
      s = ekf_update(s, Vec3(n(rng), n(rng), 9.81 + n(rng)), cfg).state;
      CHECK(healthy(s));
    }
  }

  TEST_CASE("measurement jacobian against central differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
      const Quaternion q = quat_normalize(Quaternion(n(rng), n(rng), n(rng), n(rng)));
      const Mat36 H = gravity_measurement_jacobian(q, 9.81);
      Mat36 num = Mat36::Zero();
      for (int k = 0; k < 3; ++k) {
        Vec3 d = Vec3::Zero();
        d[k] = h;
        const Vec3 plus = gravity_measurement(quat_multiply(q, quat_from_rotation_vector(d)), 9.81);
        const Vec3 minus =
            gravity_measurement(quat_multiply(q, quat_from_rotation_vector<double>(-d)), 9.81);
        num.col(k) = (plus - minus) / (2.0 * h);
      }
      CHECK((num - H).norm() / H.norm() < 1e-5);
    }
  }

  TEST_CASE("static run converges and yaw variance never shrinks") {
    const Vec3 f = euler_to_rotmat(EulerAngles{0.1, -0.05, 0.0}).transpose() * Vec3(0.0, 0.0, 9.81);
    const ImuStream s = level_stream(32 * 20, 32.0, f, Vec3::Zero());
    const auto states = ekf_run_states(s, EkfConfig{});
    REQUIRE(states.size() == s.size() - kEkfInitWindow);
    auto yaw_var = [](const EkfState& st) {
      const Vec3 up = quat_to_rotmat(st.q).transpose() * Vec3::UnitZ();
      return double(up.transpose() * st.P.topLeftCorner<3, 3>() * up);
    };
    for (std::size_t i = 1; i < states.size(); ++i) {
      CHECK(yaw_var(states[i]) >= yaw_var(states[i - 1]) - 1e-15);
    }
    const EulerAngles e = rotmat_to_euler(quat_to_rotmat(states.back().q));
    CHECK(e.roll == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(e.pitch == doctest::Approx(-0.05).epsilon(1e-6));
  }

  TEST_CASE("gap error names the offending sample") {
    ImuStream s = level_stream(40, 32.0, Vec3(0.0, 0.0, 9.81), Vec3::Zero());
    for (std::size_t i = 20; i < s.size(); ++i) s[i].timestamp_s += 0.5;
    try {
      ekf_run(s, EkfConfig{});
      FAIL("expected a gap error");
    } catch (const StreamError& e) {
      CHECK(e.kind() == ErrorKind::Gap);
      CHECK(e.index() == 20);
    }
  }

  TEST_CASE("non-finite input is rejected with its index") {
    ImuStream s = level_stream(40, 32.0, Vec3(0.0, 0.0, 9.81), Vec3::Zero());
    s[25].accel.x() = std::numeric_limits<double>::quiet_NaN();
    try {
      ekf_run(s, EkfConfig{});
      FAIL("expected a non-finite error");
    } catch (const StreamError& e) {
      CHECK(e.kind() == ErrorKind::NonFinite);
      CHECK(e.index() == 25);
    }
  }

  TEST_CASE("config validation") {
    EkfConfig cfg;
    cfg.accel_noise = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.linear_accel_std = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }

  TEST_CASE("tracks a simulated shank within a degree in quasi-static mode") {
    GaitProfile p;
    p.n_strides = 4;
    p.linear_acceleration = false;
    NoiseProfile noise;
    noise.seed = 9;
    const SensorLayout layout = SensorLayout::standard();
    const SynthSession sim = simulate(p, noise, layout);
    const int id = layout.sensor(Side::Left, SensorRole::ShankUpper);
    const auto out = ekf_run(sim.streams.at(id), EkfConfig{});
    const auto& truth = sim.truth.segment_orientation[0][static_cast<int>(Segment::Shank)];
    double sq = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const RotationMatrix rt = quat_to_rotmat(truth[i + kEkfInitWindow]);
      const Vec3 g_est = quat_to_rotmat(out[i].q).transpose().col(2);
      const Vec3 g_true = rt.transpose().col(2);
      const double err = std::acos(std::clamp(g_est.dot(g_true), -1.0, 1.0));
      sq += err * err;
    }
    CHECK(rad_to_deg(std::sqrt(sq / static_cast<double>(out.size()))) < 1.0);
  }
}

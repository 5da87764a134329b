#include <array>
#include <limits>
#include <random>

#include "doctest.h"
#include "gaitkit/rotation.hpp"

using namespace gaitkit;

namespace {

Quaternion unit(double w, double x, double y, double z) {
  return quat_normalize(Quaternion(w, x, y, z));
}

Quaternion random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return unit(n(rng), n(rng), n(rng), n(rng));
}

// Reference values from scipy.spatial.transform.Rotation.as_euler("ZYX").
struct EulerCase {
  std::array<double, 4> wxyz;
  double yaw, pitch, roll;
};

constexpr std::array<EulerCase, 3> kEulerCases{{
    {{0.9, 0.1, -0.3, 0.2}, 0.410127340541491, -0.6567249643647698, 0.07982998571223737},
    {{0.2, -0.7, 0.4, 0.5}, -1.2490457723982549, 1.1552443188104369, 2.8198420991931505},
    {{-0.5, 0.5, 0.5, -0.1}, 1.1902899496825317, -0.554261834452328, -1.9513027039072615},
}};

}  // namespace

TEST_SUITE("rotation") {
  TEST_CASE("hamilton product matches reference") {
    const Quaternion a = unit(0.9, 0.1, -0.3, 0.2);
    const Quaternion b = unit(0.2, -0.7, 0.4, 0.5);
    const Quaternion p = quat_multiply(a, b);
    CHECK(p.w() == doctest::Approx(0.28571828504639746).epsilon(1e-12));
    CHECK(p.x() == doctest::Approx(-0.8889013312554587).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(0.11640374575964343).epsilon(1e-12));
    CHECK(p.z() == doctest::Approx(0.3386290785735082).epsilon(1e-12));
  }

  TEST_CASE("sandwich rotation agrees with the direction cosine matrix") {
    const Quaternion q = unit(0.9, 0.1, -0.3, 0.2);
    const Vec3 v(1.0, -2.0, 0.5);
    const Vec3 r = quat_rotate(q, v);
    CHECK(r.x() == doctest::Approx(1.3473684210526315).epsilon(1e-12));
    CHECK(r.y() == doctest::Approx(-1.631578947368421).epsilon(1e-12));
    CHECK(r.z() == doctest::Approx(0.8789473684210526).epsilon(1e-12));
    CHECK((quat_to_rotmat(q) * v - r).norm() < 1e-14);
  }

  TEST_CASE("zyx decomposition matches reference") {
    for (const auto& c : kEulerCases) {
      const Quaternion q = unit(c.wxyz[0], c.wxyz[1], c.wxyz[2], c.wxyz[3]);
      const EulerAngles e = rotmat_to_euler(quat_to_rotmat(q));
      CHECK_FALSE(e.gimbal_locked);
      CHECK(e.yaw == doctest::Approx(c.yaw).epsilon(1e-12));
      CHECK(e.pitch == doctest::Approx(c.pitch).epsilon(1e-12));
      CHECK(e.roll == doctest::Approx(c.roll).epsilon(1e-12));
    }
  }

  TEST_CASE("euler round trip through quaternion") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0), up(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
      const EulerAngles e{u(rng), up(rng), u(rng)};
      const EulerAngles back = rotmat_to_euler(quat_to_rotmat(euler_to_quat(e)));
      CHECK((euler_to_rotmat(back) - euler_to_rotmat(e)).norm() < 1e-12);
      CHECK((quat_to_rotmat(euler_to_quat(e)) - euler_to_rotmat(e)).norm() < 1e-12);
    }
  }

  TEST_CASE("identity and pure pitch") {
    const EulerAngles zero = rotmat_to_euler(RotationMatrix::Identity().eval());
    CHECK(zero.roll == 0.0);
    CHECK(zero.pitch == 0.0);
    CHECK(zero.yaw == 0.0);
    const EulerAngles p = rotmat_to_euler(rot_y(deg_to_rad(30.0)));
    CHECK(rad_to_deg(p.pitch) == doctest::Approx(30.0));
    CHECK(p.roll == doctest::Approx(0.0));
  }

  TEST_CASE("gimbal band pins roll to zero") {
    const EulerAngles e{0.3, deg_to_rad(89.5), 0.2};
    const EulerAngles out = rotmat_to_euler(euler_to_rotmat(e));
    CHECK(out.gimbal_locked);
    CHECK(out.roll == 0.0);
    CHECK((euler_to_rotmat(out) - euler_to_rotmat(e)).norm() < 1e-2);
  }

  TEST_CASE("relative rotation ignores a shared rotation") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
      const Quaternion a = random_unit(rng), b = random_unit(rng), c = random_unit(rng);
      const RotationMatrix r0 = relative_rotation(a, b);
      const RotationMatrix r1 = relative_rotation(quat_multiply(c, a), quat_multiply(c, b));
      CHECK((r0 - r1).norm() < 1e-12);
    }
  }

  TEST_CASE("relative rotation matches reference") {
    const RotationMatrix r = relative_rotation(unit(0.9, 0.1, -0.3, 0.2), unit(0.2, -0.7, 0.4, 0.5));
    RotationMatrix ref;
    ref << -0.5867861142217247, -0.6907054871220605, -0.4226203807390816,  //
        -0.4568868980963045, -0.14848824188129878, 0.877043673012318,       //
        -0.6685330347144456, 0.7077267637178052, -0.22844344904815236;
    CHECK((r - ref).norm() < 1e-12);
  }

  TEST_CASE("rotation vector map") {
    const Quaternion q = quat_from_axis_angle(Vec3(0.0, 0.0, 2.0), deg_to_rad(90.0));
    CHECK((quat_rotate(q, Vec3(1.0, 0.0, 0.0)) - Vec3(0.0, 1.0, 0.0)).norm() < 1e-15);
    const Quaternion tiny = quat_from_rotation_vector(Vec3(1e-14, 0.0, 0.0));
    CHECK(std::abs(tiny.coeffs().norm() - 1.0) < 1e-15);
    CHECK(quat_angle_between(q, quat_identity<double>()) == doctest::Approx(deg_to_rad(90.0)));
  }

  TEST_CASE("attitude from gravity levels the sensor") {
    const EulerAngles e{deg_to_rad(12.0), deg_to_rad(-20.0), 0.0};
    const RotationMatrix r = euler_to_rotmat(e);
    const Vec3 f = r.transpose() * Vec3(0.0, 0.0, 9.81);
    const EulerAngles got = rotmat_to_euler(quat_to_rotmat(attitude_from_gravity(f)));
    CHECK(got.roll == doctest::Approx(e.roll).epsilon(1e-12));
    CHECK(got.pitch == doctest::Approx(e.pitch).epsilon(1e-12));
    CHECK(got.yaw == doctest::Approx(0.0));
  }

  TEST_CASE("single precision instantiation") {
    const QuaternionT<float> q = quat_from_axis_angle<float>(Vec3T<float>(1.0f, 0.0f, 0.0f), 0.5f);
    const EulerAnglesT<float> e = rotmat_to_euler(quat_to_rotmat(q));
    CHECK(e.roll == doctest::Approx(0.5f).epsilon(1e-6));
  }

  TEST_CASE("non-finite and degenerate input") {
    CHECK_THROWS_AS(quat_normalize(Quaternion(0.0, 0.0, 0.0, 0.0)), Error);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(quat_to_rotmat(Quaternion(nan, 0.0, 0.0, 0.0)), Error);
    const Quaternion scaled(2.0, 0.0, 0.0, 0.0);
    CHECK((quat_to_rotmat(scaled) - RotationMatrix::Identity()).norm() < 1e-15);
  }
}

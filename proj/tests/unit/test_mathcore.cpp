#include <doctest.h>

#include <random>

#include <Eigen/Geometry>

#include "tiltwing/mathcore.hpp"

using namespace tiltwing;

namespace {

Eigen::Quaterniond to_eigen(const Quaternion& q) { return {q.w, q.x, q.y, q.z}; }

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("degree conversion") {
    CHECK(deg2rad(180.0) == doctest::Approx(kPi));
    CHECK(rad2deg(kHalfPi) == doctest::Approx(90.0));
    CHECK(rad2deg(deg2rad(37.5)) == doctest::Approx(37.5));
}

TEST_CASE("axis-angle matches Eigen AngleAxis") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        const Vec3 axis = random_unit(rng);
        const double a = ang(rng);
        const Mat3 expected = Eigen::AngleAxisd(a, axis).toRotationMatrix();
        const Mat3 got = Quaternion::from_axis_angle(axis, a).to_matrix();
        CHECK((got - expected).norm() < 1e-12);
    }
}

TEST_CASE("Hamilton product and rotation match Eigen") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        const Quaternion a = Quaternion::from_axis_angle(random_unit(rng), ang(rng));
        const Quaternion b = Quaternion::from_axis_angle(random_unit(rng), ang(rng));
        const Eigen::Quaterniond e = to_eigen(a) * to_eigen(b);
        const Quaternion p = a * b;
        CHECK(std::abs(std::abs(p.w * e.w() + p.x * e.x() + p.y * e.y() + p.z * e.z()) - 1.0) <
              1e-12);
        const Vec3 v = random_unit(rng) * 3.0;
        CHECK((rotate_vector(a, v) - to_eigen(a) * v).norm() < 1e-12);
        CHECK((rotate_vector_inverse(a, rotate_vector(a, v)) - v).norm() < 1e-12);
    }
}

TEST_CASE("ZYX Euler angles") {
    const double roll = 0.3;
    const double pitch = -0.4;
    const double yaw = 1.1;
    const Mat3 expected = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                           Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                           Eigen::AngleAxisd(roll, Vec3::UnitX()))
                              .toRotationMatrix();
    const Quaternion q = Quaternion::from_euler(roll, pitch, yaw);
    CHECK((q.to_matrix() - expected).norm() < 1e-12);
    const Vec3 e = q.to_euler();
    CHECK(e.x() == doctest::Approx(roll).epsilon(1e-12));
    CHECK(e.y() == doctest::Approx(pitch).epsilon(1e-12));
    CHECK(e.z() == doctest::Approx(yaw).epsilon(1e-12));

    SUBCASE("positive roll lowers the right wing") {
        // Body +y (right wing) maps to a world vector with positive down component.
        const Vec3 right = rotate_vector(Quaternion::from_euler(0.2, 0.0, 0.0), Vec3::UnitY());
        CHECK(right.z() > 0.0);
    }
    SUBCASE("positive pitch raises the nose") {
        const Vec3 nose = rotate_vector(Quaternion::from_euler(0.0, 0.2, 0.0), Vec3::UnitX());
        CHECK(nose.z() < 0.0);
    }
}

TEST_CASE("matrix round trip, canonical form, inverse") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 100; ++i) {
        const Quaternion q = Quaternion::from_axis_angle(random_unit(rng), ang(rng)).canonical();
        const Quaternion r = Quaternion::from_matrix(q.to_matrix()).canonical();
        CHECK(std::abs(q.w - r.w) < 1e-12);
        CHECK((q.vec() - r.vec()).norm() < 1e-12);
        CHECK(q.canonical().w >= 0.0);
        const Quaternion id = q * q.inverse();
        CHECK(std::abs(id.w - 1.0) < 1e-12);
        CHECK(id.vec().norm() < 1e-12);
    }
    const Quaternion neg{-0.5, 0.5, 0.5, 0.5};
    const Quaternion c = neg.canonical();
    CHECK(c.w == 0.5);
    CHECK(c.x == -0.5);
}

TEST_CASE("angle between rotations") {
    const Quaternion a = Quaternion::from_euler(0.0, 0.0, 0.2);
    const Quaternion b = Quaternion::from_euler(0.0, 0.0, 0.2 + deg2rad(30.0));
    CHECK(angle_between(a, b) == doctest::Approx(deg2rad(30.0)).epsilon(1e-12));
    CHECK(angle_between(a, a) == doctest::Approx(0.0));
    // q and -q are the same rotation.
    const Quaternion m{-a.w, -a.x, -a.y, -a.z};
    CHECK(angle_between(a, m) < 1e-7);
}

TEST_CASE("body-rate integration is the exponential map") {
    const Vec3 omega(0.3, -0.2, 0.9);
    Quaternion q;
    for (int i = 0; i < 1000; ++i) {
        q = integrate_body_rate(q, omega, 1e-3);
    }
    const Mat3 expected = Eigen::AngleAxisd(omega.norm(), omega.normalized()).toRotationMatrix();
    CHECK((q.to_matrix() - expected).norm() < 1e-10);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("geometry conventions and validation") {
    VehicleGeometry g;
    g.x_offset = 0.02;
    g.y_offset = -0.01;
    g.z_offset = 0.03;  // CoG above the pivot: S lies below, +z in FRD
    const Vec3 s = g.pivot_from_cog();
    CHECK(s.x() == -0.02);
    CHECK(s.y() == 0.01);
    CHECK(s.z() == 0.03);
    CHECK(g.rotor_disc_area() == doctest::Approx(kPi * 0.53 * 0.53 / 4.0));
    CHECK_NOTHROW(g.validate());

    VehicleGeometry bad;
    bad.m = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.chi_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.inertia_diag.y() = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.x_offset = -1.0;  // tail lever vanishes
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

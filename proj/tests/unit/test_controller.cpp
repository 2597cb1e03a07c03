#include <doctest.h>

#include <cmath>
#include <random>

#include "tiltwing/controller.hpp"

using namespace tiltwing;

TEST_CASE("identity attitude error gives zero rate setpoint") {
    const Quaternion q = Quaternion::from_euler(0.3, -0.1, 2.0);
    const Quaternion e = attitude_error(q, q);
    CHECK(e.w == doctest::Approx(1.0));
    const Vec3 sp = attitude_law(e, AttitudeGains{}, 0.0);
    CHECK(sp.norm() < 1e-15);
    CHECK(attitude_law(Quaternion::identity(), AttitudeGains{}, 0.0) == Vec3::Zero());
}

TEST_CASE("attitude law is proportional to the error vector") {
    const AttitudeGains gains;
    const Quaternion des = Quaternion::from_euler(deg2rad(10.0), 0.0, 0.0);
    const Quaternion e = attitude_error(Quaternion::identity(), des);
    CHECK(e.x == doctest::Approx(std::sin(deg2rad(5.0))));
    const Vec3 sp = attitude_law(e, gains, 0.25);
    CHECK(sp.x() == doctest::Approx(gains.k_P.x() * std::sin(deg2rad(5.0))));
    CHECK(sp.y() == doctest::Approx(0.0));
    CHECK(sp.z() == doctest::Approx(0.25));  // yaw-rate feed-forward
}

TEST_CASE("attitude error takes the short way round") {
    const Quaternion cur{-1.0, 0.0, 0.0, 0.0};  // identity, other hemisphere
    const Quaternion e = attitude_error(cur, Quaternion::from_euler(0.1, 0.0, 0.0));
    CHECK(e.w > 0.0);
    CHECK(e.x > 0.0);
}

TEST_CASE("collective thrust from a_z") {
    const ThrustFeedForward ff = ThrustFeedForward::constant(49.05);
    CHECK(collective_thrust(9.81, kHalfPi, ff, 9.81) == 0.0);
    CHECK(collective_thrust(0.0, kHalfPi, ff, 9.81) == 49.05);
    CHECK(collective_thrust(-9.81, kHalfPi, ff, 9.81) == doctest::Approx(98.1));
    CHECK(collective_thrust(20.0, kHalfPi, ff, 9.81) == 0.0);  // never negative
    CHECK_THROWS_AS(collective_thrust(0.0, kHalfPi, ff, 0.0), std::invalid_argument);
}

TEST_CASE("feed-forward polynomial evaluation") {
    ThrustFeedForward ff;
    ff.c = {1.0, -2.0, 0.5, 0.25, -0.1, 0.03, -0.002, 0.0004};
    for (double chi : {0.2, 0.9, kHalfPi}) {
        double naive = 0.0;
        for (int k = 0; k < 8; ++k) {
            naive += ff.c[static_cast<std::size_t>(k)] * std::pow(chi, k);
        }
        CHECK(ff.evaluate(chi) == doctest::Approx(naive).epsilon(1e-13));
    }
}

TEST_CASE("rate law uses negative feedback") {
    ControllerState st;
    st.dt = 0.005;
    AttitudeGains g;
    const Vec3 lim(10.0, 10.0, 10.0);
    const Vec3 tau = rate_law(Vec3::Zero(), Vec3(1.0, 0.0, 0.0), Vec3::Zero(), st, g, lim);
    CHECK(tau.x() == doctest::Approx(g.k_P_rate.x() + g.k_I_rate.x() * 0.005));
    ControllerState st2;
    st2.dt = 0.005;
    const Vec3 damp = rate_law(Vec3(0.0, 2.0, 0.0), Vec3::Zero(), Vec3::Zero(), st2, g, lim);
    CHECK(damp.y() < 0.0);
    const Vec3 dterm = rate_law(Vec3::Zero(), Vec3::Zero(), Vec3(0.0, 0.0, 1.0), st2, g, lim);
    CHECK(dterm.z() == doctest::Approx(-g.k_D_rate.z()));
}

TEST_CASE("anti-windup clamp holds under random errors") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    ControllerConfig cfg;
    ControllerState st;
    st.dt = cfg.dt;
    const Vec3 lim = cfg.integral_limit();
    bool clamped_seen = false;
    for (int i = 0; i < 20000; ++i) {
        const Vec3 omega(u(rng), u(rng), u(rng));
        const Vec3 sp(u(rng), u(rng), u(rng));
        rate_law(omega, sp, Vec3::Zero(), st, cfg.gains, lim);
        for (int k = 0; k < 3; ++k) {
            REQUIRE(std::abs(st.omega_int[k]) <= lim[k]);
        }
        clamped_seen = clamped_seen || st.integral_clamped;
    }
    CHECK(clamped_seen);
    CHECK_THROWS_AS(
        [] {
            ControllerState bad;
            bad.dt = 0.0;
            rate_law(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), bad, AttitudeGains{},
                     Vec3::Ones());
        }(),
        std::invalid_argument);
}

TEST_CASE("roll trim fades with chi") {
    AttitudeGains g;
    g.tau_trim_roll = 0.4;
    CHECK(roll_trim(0.0, g) == 0.4);
    CHECK(std::abs(roll_trim(kHalfPi, g)) < 1e-16);
    CHECK(roll_trim(deg2rad(60.0), g) == doctest::Approx(0.2));
}

TEST_CASE("rate derivative estimate") {
    ControllerState st;
    st.dt = 0.005;
    CHECK(estimate_rate_derivative(Vec3::Zero(), st, 30.0) == Vec3::Zero());  // primes the filter
    Vec3 d;
    for (int i = 1; i <= 400; ++i) {
        d = estimate_rate_derivative(Vec3(2.0 * i * st.dt, 0.0, 0.0), st, 30.0);
    }
    CHECK(d.x() == doctest::Approx(2.0).epsilon(1e-6));  // ramp slope after the lag settles
}

TEST_CASE("attitude controller at level hover") {
    ControllerConfig cfg;
    AttitudeController c(cfg);
    RigidBodyState s;
    const ControlDemand d = c.step(s, Quaternion::identity(), 0.0, kHalfPi);
    CHECK(d.tau_roll == 0.0);
    CHECK(d.tau_pitch == 0.0);
    CHECK(d.tau_yaw == 0.0);
    CHECK(d.T_col == doctest::Approx(cfg.thrust_ff.evaluate(kHalfPi)));
    CHECK(d.chi == kHalfPi);

    // Rolled right: commands a left (negative) roll torque.
    s.attitude = Quaternion::from_euler(deg2rad(20.0), 0.0, 0.0);
    c.reset();
    const ControlDemand r = c.step(s, Quaternion::identity(), 0.0, kHalfPi);
    CHECK(r.tau_roll < 0.0);
    CHECK(c.last_rate_setpoint().x() < 0.0);
}

TEST_CASE("altitude hold") {
    AltitudeHoldGains g;
    AltitudeHold h(g, 0.005);
    const double below = h.step(9.0, 0.0, 10.0);  // too low -> push up (negative, NED)
    CHECK(below < 0.0);
    CHECK(below == doctest::Approx(-g.k_p - g.k_i * 0.005));
    h.reset();
    CHECK(h.step(10.0, 0.0, 10.0, 0.3) == doctest::Approx(0.3));  // feed-forward passes
    h.reset();
    CHECK(h.step(-100.0, 0.0, 10.0) == -g.a_z_limit);
    for (int i = 0; i < 100000; ++i) {
        h.step(-100.0, 0.0, 10.0);
    }
    CHECK(std::abs(h.integral()) <= g.integral_limit);
}

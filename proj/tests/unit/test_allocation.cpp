#include <doctest.h>

#include <cmath>
#include <limits>

#include "tiltwing/allocation.hpp"

using namespace tiltwing;

TEST_CASE("hover demand splits evenly and exactly") {
    const VehicleGeometry g;
    for (double T : {0.7, 10.0, 49.05, 59.9}) {
        ControlDemand d;
        d.T_col = T;
        d.chi = kHalfPi;
        const AllocationResult a = allocate(d, g);
        CHECK(a.command.T_r == T / 2.0);
        CHECK(a.command.T_l == T / 2.0);
        CHECK(a.command.epsilon == 0.0);
        CHECK(a.command.T_t == 0.0);
        CHECK(a.command.zeta_r() == kHalfPi);
        CHECK(a.command.zeta_l() == kHalfPi);
        CHECK_FALSE(a.flags.any());
    }
}

TEST_CASE("aero torque authority model") {
    const VehicleGeometry g;
    CHECK(tau_aero_model(g.chi_min, g) == doctest::Approx(200.0));
    CHECK(tau_aero_model(kHalfPi, g) == 0.0);
    CHECK(tau_aero_model(deg2rad(50.0), g) == doctest::Approx(50.0));
    CHECK(tau_aero_model(g.chi_min, g, 120.0) == doctest::Approx(120.0));
    CHECK_THROWS_AS(tau_aero_model(deg2rad(5.0), g), std::domain_error);
    CHECK_THROWS_AS(tau_aero_model(deg2rad(95.0), g), std::domain_error);
}

TEST_CASE("frozen allocation examples") {
    const VehicleGeometry g;  // b = 0.75, l = 0.55, no offsets

    SUBCASE("hover roll and pitch") {
        ControlDemand d;
        d.T_col = 40.0;
        d.tau_roll = 1.5;
        d.tau_pitch = 0.55;
        const AllocationResult a = allocate(d, g);
        CHECK(a.command.T_r == doctest::Approx(19.0));
        CHECK(a.command.T_l == doctest::Approx(21.0));
        CHECK(a.command.T_t == doctest::Approx(-1.0));
        CHECK(std::abs(a.command.epsilon) < 1e-15);
    }
    SUBCASE("hover yaw through differential tilt") {
        ControlDemand d;
        d.T_col = 40.0;
        d.tau_yaw = 1.0;
        const AllocationResult a = allocate(d, g);
        CHECK(a.command.epsilon == doctest::Approx(1.0 / 30.0));
        CHECK(a.command.T_r == doctest::Approx(20.0));
    }
    SUBCASE("fixed-wing roll through differential tilt") {
        ControlDemand d;
        d.T_col = 20.0;
        d.tau_roll = 2.0;
        d.chi = g.chi_min;
        const AllocationResult a = allocate(d, g);
        CHECK(a.command.epsilon == doctest::Approx(-0.009161002353601936).epsilon(1e-12));
        CHECK(a.command.T_r == doctest::Approx(9.768469096444093).epsilon(1e-12));
        CHECK(a.command.T_l == doctest::Approx(10.231530903555907).epsilon(1e-12));
        CHECK(a.eps_denominator == doctest::Approx(215.0));
    }
}

TEST_CASE("tilt identities hold for every command") {
    const VehicleGeometry g;
    ControlDemand d;
    d.T_col = 30.0;
    d.tau_roll = 0.4;
    d.tau_yaw = -0.7;
    d.chi = deg2rad(40.0);
    const ActuatorCommand c = allocate(d, g).command;
    CHECK(c.zeta_r() == c.chi + c.epsilon);
    CHECK(c.zeta_l() == c.chi - c.epsilon);
}

TEST_CASE("saturation is flagged, never silent") {
    const VehicleGeometry g;
    SUBCASE("epsilon denominator floor") {
        ControlDemand d;
        d.T_col = 0.0;
        d.tau_yaw = 0.1;
        const AllocationResult a = allocate(d, g);
        CHECK(a.flags.eps_denominator_floored);
        CHECK(a.eps_denominator == 0.5);
        CHECK(a.command.epsilon == doctest::Approx(0.2));
    }
    SUBCASE("main rotor limits") {
        ControlDemand d;
        d.T_col = 100.0;
        const AllocationResult a = allocate(d, g);
        CHECK(a.flags.T_r_clamped);
        CHECK(a.flags.T_l_clamped);
        CHECK(a.command.T_r == 30.0);
        ControlDemand r;
        r.T_col = 2.0;
        r.tau_roll = 5.0;  // needs a negative right thrust
        const AllocationResult b = allocate(r, g);
        CHECK(b.flags.T_r_clamped);
        CHECK(b.command.T_r == 0.0);
    }
    SUBCASE("tail limit") {
        ControlDemand d;
        d.T_col = 40.0;
        d.tau_pitch = 10.0;
        const AllocationResult a = allocate(d, g);
        CHECK(a.flags.T_t_clamped);
        CHECK(a.command.T_t == -8.0);
    }
}

TEST_CASE("invalid demands") {
    const VehicleGeometry g;
    ControlDemand d;
    d.T_col = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(allocate(d, g), std::invalid_argument);
    d.T_col = -1.0;
    CHECK_THROWS_AS(allocate(d, g), std::domain_error);
    d.T_col = 10.0;
    d.chi = deg2rad(100.0);
    CHECK_THROWS_AS(allocate(d, g), std::domain_error);
}

TEST_CASE("printed collective split keeps the sin(chi) factor") {
    const VehicleGeometry g;
    AllocatorConfig cfg;
    cfg.collective = CollectiveSplit::kPrinted;
    ControlDemand d;
    d.T_col = 30.0;
    d.chi = deg2rad(30.0);
    const AllocationResult a = allocate(d, g, cfg);
    CHECK(a.command.T_r + a.command.T_l == doctest::Approx(15.0));
    CHECK(reconstruct_wrench(a.command, g, d.chi, cfg).collective == doctest::Approx(30.0));
}

TEST_CASE("lateral CoG offset is compensated when the collective carries the weight") {
    VehicleGeometry g;
    g.y_offset = 0.02;
    ControlDemand d;
    d.T_col = g.m * g.g;
    const AllocationResult a = allocate(d, g);
    CHECK(a.command.T_r > a.command.T_l);  // CoG to the right: right rotor works harder
    const ReconstructedWrench w = reconstruct_wrench(a.command, g, d.chi);
    CHECK(std::abs(w.torque.x()) < 1e-12);
}

TEST_CASE("reconstruction of a pure collective at hover") {
    const VehicleGeometry g;
    ActuatorCommand c;
    c.T_r = c.T_l = 10.0;
    const ReconstructedWrench w = reconstruct_wrench(c, g, kHalfPi);
    CHECK(w.force.z() == doctest::Approx(-20.0));
    CHECK(w.torque.norm() < 1e-12);
    CHECK(w.collective == 20.0);
}

TEST_CASE("round-trip property suite") {
    RoundTripOptions opt;
    opt.samples = 20000;
    opt.seed = 11;
    const RoundTripReport r = allocation_round_trip(opt);
    CHECK(r.passed());
    CHECK(r.tested == 20000);
    CHECK(r.worst_torque_ratio < 1.0);
    CHECK(r.worst_collective_rel < 1e-12);
    // Deterministic in the seed.
    const RoundTripReport again = allocation_round_trip(opt);
    CHECK(again.redrawn == r.redrawn);
    CHECK(again.worst_torque_ratio == r.worst_torque_ratio);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tiltwing/sysid.hpp"

using namespace tiltwing;

namespace {

SweepGrid small_grid() {
    SweepGrid g;
    g.speed_min = 2.0;
    g.speed_max = 12.0;
    g.speed_count = 4;
    g.angle_count = 9;
    g.chi_count = 3;
    g.epsilon_count = 2;
    return g;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("predicted sample wrench") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams p = AeroParams::defaults();
    SweepSample s;
    s.T_r = s.T_l = 5.0;
    s.chi = kHalfPi;
    // No flow: rotor thrust less the slipstream drag on the wing, symmetric.
    const Wrench w = predict_sample(p, s, g, segs);
    CHECK(w.force.z() > -10.0);
    CHECK(w.force.z() < -9.5);
    CHECK(std::abs(w.force.y()) < 1e-12);

    SUBCASE("flow from below lifts a flat wing") {
        SweepSample f;
        f.flow_speed = 10.0;
        f.flow_angle = deg2rad(5.0);
        f.chi = deg2rad(10.0);
        const Wrench l = predict_sample(p, f, g, segs);
        SweepSample z = f;
        z.flow_angle = 0.0;
        CHECK(l.force.z() < predict_sample(p, z, g, segs).force.z());
    }
}

TEST_CASE("residuals vanish at the generating parameters") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams p = AeroParams::defaults();
    const auto samples = generate_synthetic_sweep(p, small_grid(), {}, 3, g, segs);
    const Eigen::VectorXd r = residuals(p, samples, g, segs);
    CHECK(r.size() == static_cast<Eigen::Index>(6 * samples.size()));
    CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_THROWS_AS(residuals(p, {}, g, segs), std::invalid_argument);
}

TEST_CASE("synthetic sweep") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams p = AeroParams::defaults();
    const auto a = generate_synthetic_sweep(p, SweepGrid{}, {0.01, 0.0, 0.0}, 9, g, segs);
    CHECK(a.size() == 1500);
    const auto b = generate_synthetic_sweep(p, SweepGrid{}, {0.01, 0.0, 0.0}, 9, g, segs);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].force == b[i].force && a[i].T_r == b[i].T_r &&
               a[i].flow_angle == b[i].flow_angle;
    }
    CHECK(same);
    // The operating points do not depend on the noise level.
    const auto c = generate_synthetic_sweep(p, SweepGrid{}, {}, 9, g, segs);
    CHECK(c[77].T_t == a[77].T_t);
    CHECK(c[77].force != a[77].force);
    for (const auto& s : a) {
        REQUIRE(s.flow_angle >= -kHalfPi);
        REQUIRE(s.flow_angle <= kHalfPi);
        REQUIRE(s.T_r >= 0.0);
        REQUIRE(s.T_r <= 20.0);
        REQUIRE(std::abs(s.T_t) <= 3.0);
    }

    SweepGrid bad;
    bad.speed_count = 0;
    CHECK_THROWS_AS(generate_synthetic_sweep(p, bad, {}, 1, g, segs), std::invalid_argument);
    bad = {};
    bad.speed_min = -1.0;
    CHECK_THROWS_AS(generate_synthetic_sweep(p, bad, {}, 1, g, segs), std::invalid_argument);
    bad = {};
    bad.angle_jitter = 2.0;
    CHECK_THROWS_AS(generate_synthetic_sweep(p, bad, {}, 1, g, segs), std::invalid_argument);
}

TEST_CASE("sweep and thrust CSV round trips are lossless") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const auto a =
        generate_synthetic_sweep(AeroParams::defaults(), small_grid(), {0.02, 0.0, 0.0}, 5, g, segs);
    std::stringstream ss;
    write_sweep_csv(ss, a);
    const std::string text = ss.str();
    CHECK(text.rfind("flow_speed,flow_angle,chi,epsilon,T_r,T_l,T_t,F_x,F_y,F_z,tau_x,tau_y,tau_z\n",
                     0) == 0);
    const auto b = read_sweep_csv(ss);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(b[i].force == a[i].force);
        REQUIRE(b[i].torque == a[i].torque);
        REQUIRE(b[i].chi == a[i].chi);
    }
    std::istringstream bad_header("speed,angle\n1,2\n");
    CHECK_THROWS_AS(read_sweep_csv(bad_header), std::runtime_error);
    std::istringstream short_row(text.substr(0, text.find('\n') + 1) + "1,2,3\n");
    CHECK_THROWS_AS(read_sweep_csv(short_row), std::runtime_error);

    std::vector<ThrustSample> t{{0.2, 40.1234567890123}, {1.5, 49.5}};
    std::stringstream ts;
    write_thrust_csv(ts, t);
    const auto u = read_thrust_csv(ts);
    REQUIRE(u.size() == 2);
    CHECK(u[0].thrust == t[0].thrust);
    CHECK(u[1].chi == 1.5);
}

TEST_CASE("fit from the truth stops immediately") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams p = AeroParams::defaults();
    const auto samples = generate_synthetic_sweep(p, small_grid(), {}, 3, g, segs);
    const FitResult r = fit(p, samples, g, segs);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.cost == 0.0);
    CHECK(r.stop_reason == "gradient tolerance");
    CHECK(r.params.to_vector() == p.to_vector());
    // Slots the wrench does not depend on are frozen and reported.
    CHECK(contains(r.frozen_indices, 16));  // tau_aero_scale
    for (std::size_t k = 18; k < 26; ++k) {
        CHECK(contains(r.frozen_indices, k));  // thrust feed-forward
    }
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.free_indices.size() + r.frozen_indices.size() == AeroParams::kCount);
}

TEST_CASE("noiseless recovery from a perturbed start") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams truth = AeroParams::defaults();
    const auto samples = generate_synthetic_sweep(truth, small_grid(), {}, 3, g, segs);
    auto v = truth.to_vector();
    for (std::size_t k = 0; k < 16; ++k) {
        v[k] *= (k % 2 == 0) ? 1.1 : 0.9;
    }
    const AeroParams start = AeroParams::from_vector(v);
    const FitResult r = fit(start, samples, g, segs);
    CHECK(r.converged);
    CHECK(r.cost < 1e-6 * r.initial_cost);
    const auto ids = r.identified_indices();
    CHECK(ids.size() >= 5);
    const auto got = r.params.to_vector();
    const auto want = truth.to_vector();
    for (std::size_t k : ids) {
        CAPTURE(k);
        CHECK(std::abs(got[k] - want[k]) < 1e-3 * std::abs(want[k]));
    }
    // Accepted steps never raise the cost.
    for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
        CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
    }
    FitOptions limited;
    limited.max_iterations = 1;
    const FitResult l = fit(start, samples, g, segs, limited);
    CHECK_FALSE(l.converged);
    CHECK(l.stop_reason == "iteration limit");
}

TEST_CASE("differential tilt slope") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const TiltSlope s = differential_tilt_slope(AeroParams::defaults(), g, segs);
    CHECK(s.slope == doctest::Approx(0.3252).epsilon(1e-3));
    CHECK(s.r_squared > 0.99);
    TiltSlopeCondition bad;
    bad.points = 2;
    CHECK_THROWS_AS(differential_tilt_slope(AeroParams::defaults(), g, segs, bad),
                    std::invalid_argument);
}

TEST_CASE("fit option validation") {
    const VehicleGeometry g;
    const auto segs = build_segments(g);
    const AeroParams p = AeroParams::defaults();
    CHECK_THROWS_AS(fit(p, {}, g, segs), std::invalid_argument);
    const auto samples = generate_synthetic_sweep(p, small_grid(), {}, 3, g, segs);
    FitOptions o;
    o.slope_target = -1.0;
    CHECK_THROWS_AS(fit(p, samples, g, segs, o), std::invalid_argument);
    o = {};
    o.prior_weight = -1.0;
    CHECK_THROWS_AS(fit(p, samples, g, segs, o), std::invalid_argument);
}

TEST_CASE("thrust feed-forward polynomial fit") {
    const std::array<double, 8> c{40.0, 3.0, -2.0, 1.0, 0.5, -0.25, 0.1, -0.02};
    std::vector<ThrustSample> s;
    for (int i = 0; i <= 40; ++i) {
        const double chi = deg2rad(10.0) + (kHalfPi - deg2rad(10.0)) * i / 40.0;
        double y = 0.0;
        for (int k = 7; k >= 0; --k) {
            y = y * chi + c[static_cast<std::size_t>(k)];
        }
        s.push_back({chi, y});
    }
    const auto got = fit_thrust_ff(s);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(got[k] == doctest::Approx(c[k]).epsilon(1e-6));
    }
    std::vector<ThrustSample> few(s.begin(), s.begin() + 7);
    CHECK_THROWS_AS(fit_thrust_ff(few), std::invalid_argument);
    std::vector<ThrustSample> negative = s;
    for (auto& x : negative) {
        x.thrust = -x.thrust;
    }
    CHECK_THROWS_AS(fit_thrust_ff(negative), std::runtime_error);
    std::vector<ThrustSample> wide;
    for (int i = 0; i < 10; ++i) {
        wide.push_back({100.0 * i, 1.0});
    }
    CHECK_THROWS_AS(fit_thrust_ff(wide), std::runtime_error);
}

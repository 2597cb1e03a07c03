#include "tiltwing/scenario.hpp"

#include <cmath>
#include <fstream>

namespace tiltwing {

namespace fs = std::filesystem;

namespace {

// Degrees in the file, radians inside; an absent key keeps the fallback
// bit for bit.
double deg(const kv::Table& t, const std::string& key, double fallback_rad) {
    const auto v = t.number(key);
    if (!v) {
        return fallback_rad;
    }
    return *v == 90.0 ? kHalfPi : deg2rad(*v);
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

AeroParams load_params_or_defaults(const fs::path& path) {
    return path.empty() ? AeroParams::defaults() : load_params(path.string());
}

Integrator parse_integrator(const std::string& name, const std::string& source) {
    if (name == "rk4") {
        return Integrator::kRK4;
    }
    if (name == "semi_implicit_euler") {
        return Integrator::kSemiImplicitEuler;
    }
    throw kv::ParseError(source + ": integrator must be \"rk4\" or \"semi_implicit_euler\"");
}

CollectiveSplit parse_split(const std::string& name, const std::string& source) {
    if (name == "axis") {
        return CollectiveSplit::kAxis;
    }
    if (name == "printed") {
        return CollectiveSplit::kPrinted;
    }
    throw kv::ParseError(source + ": collective must be \"axis\" or \"printed\"");
}

std::uint64_t read_seed(const kv::Table& t, std::uint64_t fallback, const std::string& src) {
    const auto s = t.number("seed");
    if (!s) {
        return fallback;
    }
    if (*s < 0.0 || *s != std::floor(*s) || *s > 9.007199254740992e15) {
        throw kv::ParseError(src + ": seed must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(*s);
}

}  // namespace

VehicleGeometry read_geometry(const kv::Table& t, const VehicleGeometry& base) {
    VehicleGeometry g = base;
    g.b = t.number("b", g.b);
    g.l = t.number("l", g.l);
    g.x_offset = t.number("x_offset", g.x_offset);
    g.y_offset = t.number("y_offset", g.y_offset);
    g.z_offset = t.number("z_offset", g.z_offset);
    g.m = t.number("mass", g.m);
    g.g = t.number("g", g.g);
    g.D = t.number("D", g.D);
    g.D_tail = t.number("D_tail", g.D_tail);
    g.rho = t.number("rho", g.rho);
    g.wingspan = t.number("wingspan", g.wingspan);
    g.chord = t.number("chord", g.chord);
    g.chi_min = deg(t, "chi_min_deg", g.chi_min);
    g.inertia_diag = t.vec3("inertia", g.inertia_diag);
    g.validate();
    return g;
}

Scenario parse_scenario(std::istream& in, const fs::path& base_dir, const std::string& source) {
    const kv::Document doc = kv::parse(in, source);
    Scenario sc;
    const kv::Table& root = doc.root;
    sc.name = root.string("name", "");
    sc.description = root.string("description", "");
    if (const auto p = root.string("params")) {
        sc.params_path = resolve(base_dir, *p);
    }

    SimConfig& cfg = sc.config;
    const VehicleGeometry geo = read_geometry(doc.section("geometry"));
    const AeroParams params = load_params_or_defaults(sc.params_path);
    cfg.vehicle = VehicleModel::make(geo, params);

    const kv::Table& sim = doc.section("sim");
    cfg.dt_physics = sim.number("dt_physics", cfg.dt_physics);
    cfg.dt_control = sim.number("dt_control", cfg.dt_control);
    cfg.duration = sim.number("duration", cfg.duration);
    cfg.integrator = parse_integrator(sim.string("integrator", "rk4"), source);
    cfg.seed = read_seed(sim, cfg.seed, source);

    const kv::Table& ini = doc.section("initial");
    cfg.initial.altitude = ini.number("altitude", cfg.initial.altitude);
    cfg.initial.speed = ini.number("speed", cfg.initial.speed);
    cfg.initial.roll = deg(ini, "roll_deg", cfg.initial.roll);
    cfg.initial.pitch = deg(ini, "pitch_deg", cfg.initial.pitch);
    cfg.initial.yaw = deg(ini, "yaw_deg", cfg.initial.yaw);

    const kv::Table& wind = doc.section("wind");
    cfg.wind.steady = wind.vec3("steady", cfg.wind.steady);
    cfg.wind.gust = wind.vec3("gust", cfg.wind.gust);
    cfg.wind.gust_start = wind.number("gust_start", cfg.wind.gust_start);
    cfg.wind.gust_duration = wind.number("gust_duration", cfg.wind.gust_duration);

    const kv::Table& noise = doc.section("noise");
    cfg.noise.gyro = deg(noise, "gyro_deg_s", cfg.noise.gyro);
    cfg.noise.attitude = deg(noise, "attitude_deg", cfg.noise.attitude);
    cfg.noise.altitude = noise.number("altitude", cfg.noise.altitude);
    cfg.noise.climb_rate = noise.number("climb_rate", cfg.noise.climb_rate);

    ControllerConfig& cc = cfg.controller;
    cc.thrust_ff.c = params.thrust_ff;
    cc.g = geo.g;
    const kv::Table& gains = doc.section("gains");
    cc.gains.k_P = gains.vec3("k_P", cc.gains.k_P);
    cc.gains.k_P_rate = gains.vec3("k_P_rate", cc.gains.k_P_rate);
    cc.gains.k_I_rate = gains.vec3("k_I_rate", cc.gains.k_I_rate);
    cc.gains.k_D_rate = gains.vec3("k_D_rate", cc.gains.k_D_rate);
    cc.gains.tau_trim_roll = gains.number("tau_trim_roll", cc.gains.tau_trim_roll);
    cc.max_torque = gains.vec3("max_torque", cc.max_torque);
    cc.integral_fraction = gains.number("integral_fraction", cc.integral_fraction);
    cc.derivative_cutoff_hz = gains.number("derivative_cutoff_hz", cc.derivative_cutoff_hz);

    const kv::Table& alt = doc.section("altitude_hold");
    cfg.altitude_hold = alt.boolean("enabled", cfg.altitude_hold);
    if (const auto ref = alt.number("ref")) {
        cfg.altitude_ref = *ref;
    }
    cc.altitude.k_p = alt.number("k_p", cc.altitude.k_p);
    cc.altitude.k_d = alt.number("k_d", cc.altitude.k_d);
    cc.altitude.k_i = alt.number("k_i", cc.altitude.k_i);
    cc.altitude.a_z_limit = alt.number("a_z_limit", cc.altitude.a_z_limit);
    cc.altitude.integral_limit = alt.number("integral_limit", cc.altitude.integral_limit);

    const kv::Table& al = doc.section("allocator");
    cfg.allocator.collective = parse_split(al.string("collective", "axis"), source);
    cfg.allocator.T_max_main = al.number("T_max_main", cfg.allocator.T_max_main);
    cfg.allocator.T_max_tail = al.number("T_max_tail", cfg.allocator.T_max_tail);
    cfg.allocator.eps_denominator_floor =
        al.number("eps_denominator_floor", cfg.allocator.eps_denominator_floor);

    const kv::Table& act = doc.section("actuators");
    cfg.actuators.rotor_time_constant =
        act.number("rotor_time_constant", cfg.actuators.rotor_time_constant);
    cfg.actuators.servo_rate = deg(act, "servo_rate_deg_s", cfg.actuators.servo_rate);
    cfg.actuators.T_main_min = act.number("T_main_min", cfg.actuators.T_main_min);
    cfg.actuators.T_main_max = act.number("T_main_max", cfg.actuators.T_main_max);
    cfg.actuators.T_tail_max = act.number("T_tail_max", cfg.actuators.T_tail_max);
    cfg.actuators.zeta_min = deg(act, "zeta_min_deg", cfg.actuators.zeta_min);
    cfg.actuators.zeta_max = deg(act, "zeta_max_deg", cfg.actuators.zeta_max);

    const kv::Table& pw = doc.section("power");
    cfg.power.eta = pw.number("eta", cfg.power.eta);
    cfg.power.k_profile = pw.number("k_profile", cfg.power.k_profile);

    // Omitted fields repeat the previous knot.
    TimelineKnot prev;
    for (const kv::Table& k : doc.array("timeline")) {
        TimelineKnot knot = prev;
        const auto t = k.number("t");
        if (!t) {
            throw kv::ParseError(source + ":" + std::to_string(k.line()) +
                                 ": timeline knot needs t");
        }
        knot.t = *t;
        knot.chi = deg(k, "chi_deg", prev.chi);
        knot.roll = deg(k, "roll_deg", prev.roll);
        knot.pitch = deg(k, "pitch_deg", prev.pitch);
        knot.yaw = deg(k, "yaw_deg", prev.yaw);
        knot.a_z = k.number("a_z", prev.a_z);
        knot.yaw_rate_ff = deg(k, "yaw_rate_ff_deg_s", prev.yaw_rate_ff);
        cfg.timeline.push_back(knot);
        prev = knot;
    }

    doc.expect_consumed({"sim", "geometry", "initial", "wind", "noise", "gains",
                         "altitude_hold", "allocator", "actuators", "power"},
                        {"timeline"});
    cfg.validate();
    return sc;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario " + path.string());
    }
    Scenario sc = parse_scenario(in, path.parent_path(), path.string());
    if (sc.name.empty()) {
        sc.name = path.stem().string();
    }
    return sc;
}

SweepSpec parse_sweep_spec(std::istream& in, const fs::path& base_dir,
                           const std::string& source) {
    const kv::Document doc = kv::parse(in, source);
    SweepSpec spec;
    spec.seed = read_seed(doc.root, spec.seed, source);
    if (const auto p = doc.root.string("params")) {
        spec.params_path = resolve(base_dir, *p);
    }
    spec.geometry = read_geometry(doc.section("geometry"));

    const kv::Table& g = doc.section("grid");
    SweepGrid& grid = spec.grid;
    auto count = [&](const std::string& key, int fallback) {
        const double v = g.number(key, fallback);
        if (v != std::floor(v) || v < 1.0 || v > 1e6) {
            throw kv::ParseError(source + ": " + key + " must be a positive integer");
        }
        return static_cast<int>(v);
    };
    grid.speed_min = g.number("speed_min", grid.speed_min);
    grid.speed_max = g.number("speed_max", grid.speed_max);
    grid.speed_count = count("speed_count", grid.speed_count);
    grid.angle_min = deg(g, "angle_min_deg", grid.angle_min);
    grid.angle_max = deg(g, "angle_max_deg", grid.angle_max);
    grid.angle_count = count("angle_count", grid.angle_count);
    grid.angle_jitter = g.number("angle_jitter", grid.angle_jitter);
    grid.chi_min = deg(g, "chi_min_deg", grid.chi_min);
    grid.chi_max = deg(g, "chi_max_deg", grid.chi_max);
    grid.chi_count = count("chi_count", grid.chi_count);
    grid.epsilon_min = deg(g, "epsilon_min_deg", grid.epsilon_min);
    grid.epsilon_max = deg(g, "epsilon_max_deg", grid.epsilon_max);
    grid.epsilon_count = count("epsilon_count", grid.epsilon_count);
    grid.main_thrust_min = g.number("main_thrust_min", grid.main_thrust_min);
    grid.main_thrust_max = g.number("main_thrust_max", grid.main_thrust_max);
    grid.tail_thrust_max = g.number("tail_thrust_max", grid.tail_thrust_max);

    const kv::Table& n = doc.section("noise");
    spec.noise.relative = n.number("relative", spec.noise.relative);
    spec.noise.absolute_force = n.number("absolute_force", spec.noise.absolute_force);
    spec.noise.absolute_torque = n.number("absolute_torque", spec.noise.absolute_torque);

    doc.expect_consumed({"grid", "noise", "geometry"}, {});
    return spec;
}

SweepSpec load_sweep_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open grid spec " + path.string());
    }
    return parse_sweep_spec(in, path.parent_path(), path.string());
}

}  // namespace tiltwing

#include "tiltwing/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace tiltwing {

ActuatorCommand ActuatorState::as_command() const {
    ActuatorCommand c;
    c.T_r = T_r;
    c.T_l = T_l;
    c.T_t = T_t;
    c.chi = 0.5 * (zeta_r + zeta_l);
    c.epsilon = 0.5 * (zeta_r - zeta_l);
    return c;
}

ActuatorState ActuatorState::from_command(const ActuatorCommand& cmd) {
    return {cmd.T_r, cmd.T_l, cmd.T_t, cmd.zeta_r(), cmd.zeta_l()};
}

ActuatorState step_actuators(const ActuatorState& act, const ActuatorCommand& cmd,
                             const ActuatorLimits& lim, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("actuator dt must be positive");
    }
    const double k = 1.0 - std::exp(-dt / lim.rotor_time_constant);
    auto lag = [k](double cur, double target) { return cur + k * (target - cur); };
    auto slew = [&](double cur, double target) {
        target = std::clamp(target, lim.zeta_min, lim.zeta_max);
        const double step = lim.servo_rate * dt;
        return cur + std::clamp(target - cur, -step, step);
    };
    ActuatorState out;
    out.T_r = std::clamp(lag(act.T_r, cmd.T_r), lim.T_main_min, lim.T_main_max);
    out.T_l = std::clamp(lag(act.T_l, cmd.T_l), lim.T_main_min, lim.T_main_max);
    out.T_t = std::clamp(lag(act.T_t, cmd.T_t), -lim.T_tail_max, lim.T_tail_max);
    out.zeta_r = slew(act.zeta_r, cmd.zeta_r());
    out.zeta_l = slew(act.zeta_l, cmd.zeta_l());
    return out;
}

double PowerModel::rotor_power(double thrust, double disc_area, double rho) const {
    const double t = std::abs(thrust);
    return std::pow(t, 1.5) / std::sqrt(2.0 * rho * disc_area) / eta + k_profile * t;
}

double PowerModel::total_power(const ActuatorState& act, const VehicleGeometry& geo) const {
    const double a_main = geo.rotor_disc_area();
    return rotor_power(act.T_r, a_main, geo.rho) + rotor_power(act.T_l, a_main, geo.rho) +
           rotor_power(act.T_t, geo.tail_disc_area(), geo.rho);
}

VehicleModel VehicleModel::make(const VehicleGeometry& geometry, const AeroParams& params,
                                const SegmentLayout& layout) {
    geometry.validate();
    params.validate();
    return {geometry, params, build_segments(geometry, layout)};
}

namespace {

// 13-element state: p(3) v(3) q(4: w x y z) omega(3).
using StateVec = Eigen::Matrix<double, 13, 1>;

StateVec pack(const RigidBodyState& s) {
    StateVec x;
    x << s.position, s.velocity, s.attitude.w, s.attitude.x, s.attitude.y, s.attitude.z,
        s.body_rates;
    return x;
}

RigidBodyState unpack(const StateVec& x) {
    RigidBodyState s;
    s.position = x.segment<3>(0);
    s.velocity = x.segment<3>(3);
    s.attitude = Quaternion{x(6), x(7), x(8), x(9)};
    s.body_rates = x.segment<3>(10);
    return s;
}

template <typename WrenchFn>
StateVec derivative(const StateVec& x, const VehicleGeometry& geo, bool gravity,
                    WrenchFn&& wrench_of) {
    RigidBodyState s = unpack(x);
    const double qn = s.attitude.norm();
    Quaternion qu{s.attitude.w / qn, s.attitude.x / qn, s.attitude.y / qn,
                  s.attitude.z / qn};
    s.attitude = qu;
    const Wrench w = wrench_of(s);

    Vec3 acc = rotate_vector(qu, w.force) / geo.m;
    if (gravity) {
        acc.z() += geo.g;
    }
    const Vec3& om = s.body_rates;
    const Vec3 iw = geo.inertia_diag.cwiseProduct(om);
    const Vec3 om_dot = (w.torque - om.cross(iw)).cwiseQuotient(geo.inertia_diag);
    // q_dot = 0.5 q (x) [0, omega], on the raw (unnormalized) components.
    const Quaternion& q = unpack(x).attitude;
    const double qw_dot = -0.5 * (q.x * om.x() + q.y * om.y() + q.z * om.z());
    const double qx_dot = 0.5 * (q.w * om.x() + q.y * om.z() - q.z * om.y());
    const double qy_dot = 0.5 * (q.w * om.y() - q.x * om.z() + q.z * om.x());
    const double qz_dot = 0.5 * (q.w * om.z() + q.x * om.y() - q.y * om.x());

    StateVec d;
    d << s.velocity, acc, qw_dot, qx_dot, qy_dot, qz_dot, om_dot;
    return d;
}

template <typename WrenchFn>
RigidBodyState integrate(const RigidBodyState& state, const VehicleGeometry& geo,
                         double dt, Integrator integrator, bool gravity,
                         WrenchFn&& wrench_of) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("physics dt must be positive");
    }
    RigidBodyState out;
    if (integrator == Integrator::kRK4) {
        const StateVec x = pack(state);
        const StateVec k1 = derivative(x, geo, gravity, wrench_of);
        const StateVec k2 = derivative(x + 0.5 * dt * k1, geo, gravity, wrench_of);
        const StateVec k3 = derivative(x + 0.5 * dt * k2, geo, gravity, wrench_of);
        const StateVec k4 = derivative(x + dt * k3, geo, gravity, wrench_of);
        out = unpack(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        out.attitude = out.attitude.normalized();
    } else {
        const StateVec x = pack(state);
        const StateVec d = derivative(x, geo, gravity, wrench_of);
        out = state;
        out.body_rates = state.body_rates + dt * d.segment<3>(10);
        out.velocity = state.velocity + dt * d.segment<3>(3);
        out.position = state.position + dt * out.velocity;
        out.attitude = integrate_body_rate(state.attitude, out.body_rates, dt);
    }

    const StateVec check = pack(out);
    if (!check.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite state after step: pos=" << state.position.transpose()
            << " vel=" << state.velocity.transpose()
            << " rates=" << state.body_rates.transpose();
        throw SimulationDiverged(msg.str());
    }
    return out;
}

}  // namespace

RigidBodyState step_rigid_body(const RigidBodyState& state, const Wrench& wrench,
                               const VehicleGeometry& geo, double dt,
                               Integrator integrator, bool gravity) {
    return integrate(state, geo, dt, integrator, gravity,
                     [&](const RigidBodyState&) { return wrench; });
}

RigidBodyState step_physics(const RigidBodyState& state, const ActuatorState& act,
                            const Vec3& wind, const VehicleModel& model, double dt,
                            Integrator integrator, bool aero_enabled) {
    const ActuatorCommand cmd = act.as_command();
    return integrate(state, model.geometry, dt, integrator, true,
                     [&](const RigidBodyState& s) {
                         if (aero_enabled) {
                             return vehicle_wrench(s, cmd, wind, model.params,
                                                   model.geometry, model.segments);
                         }
                         return propulsion_wrench(s, cmd, wind, model.params,
                                                  model.geometry);
                     });
}

TimelineKnot sample_timeline(const std::vector<TimelineKnot>& tl, double t) {
    if (tl.empty()) {
        return {};
    }
    if (t <= tl.front().t) {
        return tl.front();
    }
    if (t >= tl.back().t) {
        return tl.back();
    }
    const auto hi = std::upper_bound(tl.begin(), tl.end(), t,
                                     [](double v, const TimelineKnot& k) { return v < k.t; });
    const auto lo = hi - 1;
    const double span = hi->t - lo->t;
    const double a = span > 0.0 ? (t - lo->t) / span : 1.0;
    auto mix = [a](double x, double y) { return x + a * (y - x); };
    TimelineKnot k;
    k.t = t;
    k.chi = mix(lo->chi, hi->chi);
    k.roll = mix(lo->roll, hi->roll);
    k.pitch = mix(lo->pitch, hi->pitch);
    k.yaw = mix(lo->yaw, hi->yaw);
    k.a_z = mix(lo->a_z, hi->a_z);
    k.yaw_rate_ff = mix(lo->yaw_rate_ff, hi->yaw_rate_ff);
    return k;
}

Vec3 WindSpec::at(double t) const {
    if (gust_duration > 0.0 && t >= gust_start && t < gust_start + gust_duration) {
        return steady + gust;
    }
    return steady;
}

void SimConfig::validate() const {
    if (!(dt_physics > 0.0) || !(dt_control > 0.0)) {
        throw std::invalid_argument("time steps must be positive");
    }
    if (dt_physics > dt_control + 1e-15) {
        throw std::invalid_argument("dt_physics must not exceed dt_control");
    }
    const double ratio = dt_control / dt_physics;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw std::invalid_argument("dt_control must be a multiple of dt_physics");
    }
    for (std::size_t i = 1; i < timeline.size(); ++i) {
        if (timeline[i].t < timeline[i - 1].t) {
            throw std::invalid_argument("timeline must be sorted by time");
        }
    }
    for (const auto& k : timeline) {
        if (k.chi < vehicle.geometry.chi_min - 1e-12 || k.chi > kHalfPi + 1e-12) {
            throw std::invalid_argument("timeline chi outside [chi_min, pi/2]");
        }
    }
    if (duration <= 0.0 && timeline.empty()) {
        throw std::invalid_argument("scenario needs a duration or a timeline");
    }
}

namespace {

bool out_of_envelope(const RigidBodyState& s) {
    return s.body_rates.norm() > 60.0 || s.velocity.norm() > 150.0 ||
           s.position.norm() > 1e5;
}

}  // namespace

TimeSeriesLog run_scenario(const SimConfig& cfg) {
    cfg.validate();
    const VehicleGeometry& geo = cfg.vehicle.geometry;
    const int per_control = static_cast<int>(std::lround(cfg.dt_control / cfg.dt_physics));
    const double duration =
        cfg.duration > 0.0 ? cfg.duration : (cfg.timeline.empty() ? 0.0 : cfg.timeline.back().t);
    const long steps = std::lround(duration / cfg.dt_physics);

    const TimelineKnot first = sample_timeline(cfg.timeline, 0.0);
    RigidBodyState state;
    state.position = Vec3(0.0, 0.0, -cfg.initial.altitude);
    state.attitude = Quaternion::from_euler(cfg.initial.roll, cfg.initial.pitch, cfg.initial.yaw);
    state.velocity = rotate_vector(Quaternion::from_euler(0.0, 0.0, cfg.initial.yaw),
                                   Vec3(cfg.initial.speed, 0.0, 0.0));

    ActuatorState act;
    ControllerConfig ccfg = cfg.controller;
    ccfg.dt = cfg.dt_control;
    ccfg.g = geo.g;
    const double t_ff0 = ccfg.thrust_ff.evaluate(first.chi);
    const double sum0 = cfg.allocator.collective == CollectiveSplit::kAxis
                            ? t_ff0
                            : t_ff0 * std::sin(first.chi);
    act.T_r = act.T_l = std::clamp(0.5 * sum0, 0.0, cfg.actuators.T_main_max);
    act.zeta_r = act.zeta_l = first.chi;

    AttitudeController controller(ccfg);
    AltitudeHold alt_hold(ccfg.altitude, cfg.dt_control);
    const double alt_ref = cfg.altitude_ref.value_or(cfg.initial.altitude);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto noise = [&](double sigma) { return sigma > 0.0 ? sigma * normal(rng) : 0.0; };

    TimeSeriesLog log;
    log.rows.reserve(static_cast<std::size_t>(steps / per_control + 2));
    AllocationResult alloc;
    double yaw_ff_integral = 0.0;

    try {
        for (long k = 0; k <= steps; ++k) {
            const double t = k * cfg.dt_physics;
            const Vec3 wind = cfg.wind.at(t);
            if (k % per_control == 0) {
                const TimelineKnot ref = sample_timeline(cfg.timeline, t);

                RigidBodyState meas = state;
                meas.body_rates += Vec3(noise(cfg.noise.gyro), noise(cfg.noise.gyro),
                                        noise(cfg.noise.gyro));
                if (cfg.noise.attitude > 0.0) {
                    const Vec3 dtheta(noise(cfg.noise.attitude), noise(cfg.noise.attitude),
                                      noise(cfg.noise.attitude));
                    meas.attitude = integrate_body_rate(meas.attitude, dtheta, 1.0);
                }
                const double alt_meas = state.altitude() + noise(cfg.noise.altitude);
                const double climb_meas = -state.velocity.z() + noise(cfg.noise.climb_rate);

                const double a_z = cfg.altitude_hold
                                       ? alt_hold.step(alt_meas, climb_meas, alt_ref, ref.a_z)
                                       : ref.a_z;
                const Quaternion q_des =
                    Quaternion::from_euler(ref.roll, ref.pitch, ref.yaw + yaw_ff_integral);
                const ControlDemand demand =
                    controller.step(meas, q_des, a_z, ref.chi, ref.yaw_rate_ff);
                AllocatorConfig acfg = cfg.allocator;
                acfg.tau_aero_scale = cfg.vehicle.params.tau_aero_scale;
                alloc = allocate(demand, geo, acfg);
                yaw_ff_integral += ref.yaw_rate_ff * cfg.dt_control;

                LogRow row;
                row.t = t;
                row.state = state;
                row.actuators = act;
                row.demand = demand;
                row.command = alloc.command;
                row.flags = alloc.flags;
                row.a_z = a_z;
                row.power = cfg.power.total_power(act, geo);
                row.airspeed = (state.velocity - wind).norm();
                log.rows.push_back(row);
            }
            if (k == steps) {
                break;
            }
            act = step_actuators(act, alloc.command, cfg.actuators, cfg.dt_physics);
            state = step_physics(state, act, wind, cfg.vehicle, cfg.dt_physics, cfg.integrator);
            if (out_of_envelope(state)) {
                std::ostringstream msg;
                msg << "state left the flight envelope at t=" << t + cfg.dt_physics
                    << ": rates=" << state.body_rates.transpose()
                    << " vel=" << state.velocity.transpose();
                throw SimulationDiverged(msg.str());
            }
        }
    } catch (const SimulationDiverged& e) {
        log.status = RunStatus::kDiverged;
        log.message = e.what();
    }
    log.final_state = state;
    return log;
}

double collective_for_thrust_sum(double thrust_sum, double chi, CollectiveSplit split) {
    return split == CollectiveSplit::kAxis ? thrust_sum : thrust_sum / std::sin(chi);
}

namespace {

// Residual of level trim: world x force, world z force, pitch moment.
Eigen::Vector3d trim_residual(const VehicleModel& model, double chi, double pitch,
                              const Eigen::Vector3d& x) {
    RigidBodyState s;
    s.attitude = Quaternion::from_euler(0.0, pitch, 0.0);
    s.velocity = Vec3(x(0), 0.0, 0.0);
    ActuatorCommand cmd;
    cmd.chi = chi;
    cmd.T_r = cmd.T_l = 0.5 * x(1);
    cmd.T_t = x(2);
    const Wrench w = vehicle_wrench(s, cmd, Vec3::Zero(), model.params, model.geometry,
                                    model.segments);
    Vec3 f = rotate_vector(s.attitude, w.force);
    f.z() += model.geometry.m * model.geometry.g;
    const double wscale = model.geometry.m * model.geometry.g;
    return {f.x() / wscale, f.z() / wscale, w.torque.y() / (wscale * model.geometry.l)};
}

}  // namespace

TrimPoint solve_level_trim(const VehicleModel& model, double chi, double pitch,
                           const PowerModel& power, std::optional<TrimPoint> guess) {
    const double weight = model.geometry.m * model.geometry.g;
    Eigen::Vector3d x(0.0, weight, 0.0);
    if (guess) {
        x << guess->airspeed, guess->thrust_sum, guess->tail_thrust;
    }
    TrimPoint tp;
    tp.chi = chi;
    tp.pitch = pitch;
    Eigen::Vector3d r = trim_residual(model, chi, pitch, x);
    const Eigen::Vector3d h(1e-5, 1e-5, 1e-5);
    for (int it = 0; it < 100 && r.norm() > 1e-12; ++it) {
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d xp = x;
            xp(j) += h(j);
            Eigen::Vector3d xm = x;
            xm(j) -= h(j);
            J.col(j) = (trim_residual(model, chi, pitch, xp) -
                        trim_residual(model, chi, pitch, xm)) /
                       (2.0 * h(j));
        }
        const Eigen::Vector3d dx = J.fullPivLu().solve(-r);
        // Backtracking on the residual norm.
        double step = 1.0;
        Eigen::Vector3d xn = x + dx;
        Eigen::Vector3d rn = trim_residual(model, chi, pitch, xn);
        while (rn.norm() > r.norm() && step > 1e-4) {
            step *= 0.5;
            xn = x + step * dx;
            rn = trim_residual(model, chi, pitch, xn);
        }
        x = xn;
        r = rn;
        tp.iterations = it + 1;
    }
    tp.airspeed = x(0);
    tp.thrust_sum = x(1);
    tp.tail_thrust = x(2);
    tp.converged = r.norm() < 1e-9 && x(1) >= 0.0;
    ActuatorState act;
    act.T_r = act.T_l = 0.5 * x(1);
    act.T_t = x(2);
    tp.power = power.total_power(act, model.geometry);
    return tp;
}

std::vector<TrimPoint> trim_sweep(const VehicleModel& model, std::vector<double> chis,
                                  double pitch, const PowerModel& power) {
    // Continuation from hover downward; results are returned in input order.
    std::vector<std::size_t> order(chis.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return chis[a] > chis[b];
    });
    std::vector<TrimPoint> out(chis.size());
    std::optional<TrimPoint> guess;
    double prev_chi = kHalfPi;
    for (std::size_t idx : order) {
        // March in small chi steps so the Newton iteration stays near the branch.
        const double target = chis[idx];
        const int sub = std::max(1, static_cast<int>(std::ceil((prev_chi - target) / deg2rad(2.0))));
        for (int k = 1; k <= sub; ++k) {
            const double chi = prev_chi + (target - prev_chi) * k / sub;
            guess = solve_level_trim(model, chi, pitch, power, guess);
        }
        out[idx] = *guess;
        prev_chi = target;
    }
    return out;
}

TrimPoint trim_for_airspeed(const VehicleModel& model, double airspeed, double pitch,
                            const PowerModel& power) {
    const double chi_min = model.geometry.chi_min;
    std::vector<double> grid;
    for (double c = kHalfPi; c >= chi_min - 1e-12; c -= deg2rad(1.0)) {
        grid.push_back(std::max(c, chi_min));
    }
    const auto pts = trim_sweep(model, grid, pitch, power);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const TrimPoint& hi = pts[i - 1];
        const TrimPoint& lo = pts[i];
        if (hi.airspeed <= airspeed && lo.airspeed >= airspeed) {
            double a = hi.chi;
            double b = lo.chi;
            TrimPoint best = hi;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                best = solve_level_trim(model, mid, pitch, power, best);
                if (best.airspeed < airspeed) {
                    a = mid;
                } else {
                    b = mid;
                }
                if (std::abs(best.airspeed - airspeed) < 1e-9) {
                    break;
                }
            }
            return best;
        }
    }
    throw std::runtime_error("no level trim reaches the requested airspeed");
}

}  // namespace tiltwing

#include "tiltwing/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace tiltwing {

double ThrustFeedForward::evaluate(double chi) const {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * chi + *it;
    }
    return acc;
}

ThrustFeedForward ThrustFeedForward::constant(double thrust) {
    ThrustFeedForward ff;
    ff.c[0] = thrust;
    return ff;
}

Quaternion attitude_error(const Quaternion& q_current, const Quaternion& q_desired) {
    return quat_multiply(q_current.inverse(), q_desired).canonical();
}

Vec3 attitude_law(const Quaternion& q_error, const AttitudeGains& gains,
                  double yaw_rate_ff) {
    Vec3 omega_sp = gains.k_P.cwiseProduct(q_error.vec());
    omega_sp.z() += yaw_rate_ff;
    return omega_sp;
}

Vec3 rate_law(const Vec3& omega, const Vec3& omega_sp, const Vec3& omega_dot,
              ControllerState& state, const AttitudeGains& gains,
              const Vec3& integral_limit) {
    if (!(state.dt > 0.0)) {
        throw std::invalid_argument("controller dt must be positive");
    }
    const Vec3 error = omega_sp - omega;
    state.omega_int += gains.k_I_rate.cwiseProduct(error) * state.dt;
    state.integral_clamped = false;
    for (int i = 0; i < 3; ++i) {
        const double lim = integral_limit[i];
        if (std::abs(state.omega_int[i]) > lim) {
            state.omega_int[i] = std::clamp(state.omega_int[i], -lim, lim);
            state.integral_clamped = true;
        }
    }
    return gains.k_P_rate.cwiseProduct(error) - gains.k_D_rate.cwiseProduct(omega_dot) +
           state.omega_int;
}

double roll_trim(double chi, const AttitudeGains& gains) {
    return gains.tau_trim_roll * std::cos(chi);
}

double collective_thrust(double a_z, double chi, const ThrustFeedForward& ff, double g) {
    if (!(g > 0.0)) {
        throw std::invalid_argument("gravity must be positive");
    }
    const double t_ff = ff.evaluate(chi);
    return std::max(0.0, -a_z * t_ff / g + t_ff);
}

Vec3 estimate_rate_derivative(const Vec3& omega, ControllerState& state,
                              double cutoff_hz) {
    if (!state.primed) {
        state.omega_filtered = omega;
        state.prev_omega = omega;
        state.primed = true;
        return Vec3::Zero();
    }
    const double rc = 1.0 / (2.0 * kPi * cutoff_hz);
    const double alpha = state.dt / (state.dt + rc);
    state.prev_omega = state.omega_filtered;
    state.omega_filtered += alpha * (omega - state.omega_filtered);
    return (state.omega_filtered - state.prev_omega) / state.dt;
}

AttitudeController::AttitudeController(ControllerConfig config)
    : config_(std::move(config)) {
    reset();
}

void AttitudeController::reset() {
    state_ = ControllerState{};
    state_.dt = config_.dt;
    last_omega_sp_.setZero();
}

ControlDemand AttitudeController::step(const RigidBodyState& state,
                                       const Quaternion& q_desired, double a_z,
                                       double chi, double yaw_rate_ff) {
    const Quaternion q_err = attitude_error(state.attitude, q_desired);
    const Vec3 omega_sp = attitude_law(q_err, config_.gains, yaw_rate_ff);
    const Vec3 omega_dot =
        estimate_rate_derivative(state.body_rates, state_, config_.derivative_cutoff_hz);
    Vec3 tau = rate_law(state.body_rates, omega_sp, omega_dot, state_, config_.gains,
                        config_.integral_limit());
    tau.x() += roll_trim(chi, config_.gains);
    last_omega_sp_ = omega_sp;

    ControlDemand d;
    d.tau_roll = tau.x();
    d.tau_pitch = tau.y();
    d.tau_yaw = tau.z();
    d.chi = chi;
    d.T_col = collective_thrust(a_z, chi, config_.thrust_ff, config_.g);
    return d;
}

AltitudeHold::AltitudeHold(AltitudeHoldGains gains, double dt) : gains_(gains), dt_(dt) {}

double AltitudeHold::step(double altitude, double climb_rate, double altitude_ref,
                          double a_z_ff) {
    // Too low -> negative (upward) a_z.
    const double err = altitude - altitude_ref;
    integral_ = std::clamp(integral_ + gains_.k_i * err * dt_, -gains_.integral_limit,
                           gains_.integral_limit);
    const double a_z = a_z_ff + gains_.k_p * err + gains_.k_d * climb_rate + integral_;
    return std::clamp(a_z, -gains_.a_z_limit, gains_.a_z_limit);
}

}  // namespace tiltwing

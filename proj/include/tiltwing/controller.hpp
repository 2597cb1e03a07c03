#pragma once

#include <array>

#include "tiltwing/allocation.hpp"
#include "tiltwing/mathcore.hpp"

namespace tiltwing {

// Rate gains are inertia-normalized: they already carry the inertia, so
// k_P_rate * (rad/s) is a torque in N m.
struct AttitudeGains {
    Vec3 k_P{6.0, 6.0, 4.0};              // [1/s]
    Vec3 k_P_rate{3.0, 1.2, 2.6};         // [N m s/rad]
    Vec3 k_I_rate{3.0, 1.2, 2.6};         // [N m/rad]
    Vec3 k_D_rate{0.02, 0.01, 0.0};       // [N m s^2/rad]
    double tau_trim_roll = 0.0;           // [N m]
    double yaw_rate_ff = 0.0;             // [rad/s]
};

// T_ff(chi) = sum_k c_k chi^k, chi in rad, result in N.
struct ThrustFeedForward {
    std::array<double, 8> c{};

    double evaluate(double chi) const;
    // Constant polynomial equal to the hover weight.
    static ThrustFeedForward constant(double thrust);
};

struct ControllerState {
    Vec3 omega_int = Vec3::Zero();       // integral torque [N m]
    Vec3 omega_filtered = Vec3::Zero();  // low-passed body rates [rad/s]
    Vec3 prev_omega = Vec3::Zero();      // previous filtered rate [rad/s]
    bool primed = false;
    double dt = 0.005;                   // [s]
    bool integral_clamped = false;
};

struct AltitudeHoldGains {
    double k_p = 3.0;        // [1/s^2]
    double k_d = 3.0;        // [1/s]
    double k_i = 1.0;        // [1/s^3]
    double a_z_limit = 9.0;  // |a_z| limit [m/s^2]
    double integral_limit = 3.0;  // [m/s^2]
};

struct ControllerConfig {
    AttitudeGains gains;
    ThrustFeedForward thrust_ff = ThrustFeedForward::constant(5.0 * 9.81);
    AltitudeHoldGains altitude;
    Vec3 max_torque{22.5, 4.4, 22.5};  // torque authority per axis [N m]
    double integral_fraction = 0.3;    // anti-windup clamp, fraction of max_torque
    double derivative_cutoff_hz = 30.0;
    double dt = 0.005;                 // 200 Hz
    double g = 9.81;

    Vec3 integral_limit() const { return integral_fraction * max_torque; }
};

// q_error = q_IB^-1 (x) q_IB', canonicalized to w >= 0.
Quaternion attitude_error(const Quaternion& q_current, const Quaternion& q_desired);

// omega_sp = k_P * vec(q_error) + (0, 0, yaw_rate_ff).
Vec3 attitude_law(const Quaternion& q_error, const AttitudeGains& gains,
                  double yaw_rate_ff);

// Rate PID with negative-feedback error (omega_sp - omega). Integrates first,
// clamps each component of omega_int to +-integral_limit, then returns
// k_P_rate (omega_sp - omega) - k_D_rate omega_dot + omega_int.
Vec3 rate_law(const Vec3& omega, const Vec3& omega_sp, const Vec3& omega_dot,
              ControllerState& state, const AttitudeGains& gains,
              const Vec3& integral_limit);

// tau_trim_roll cos(chi).
double roll_trim(double chi, const AttitudeGains& gains);

// T_col = -a_z T_ff / g + T_ff, clamped to >= 0. a_z is positive downward.
double collective_thrust(double a_z, double chi, const ThrustFeedForward& ff, double g);

// Low-pass plus backward difference of the body rates.
Vec3 estimate_rate_derivative(const Vec3& omega, ControllerState& state,
                              double cutoff_hz);

// Full inner loop at the control rate: attitude P, rate PID with roll trim,
// collective from the thrust feed-forward.
class AttitudeController {
public:
    explicit AttitudeController(ControllerConfig config);

    ControlDemand step(const RigidBodyState& state, const Quaternion& q_desired,
                       double a_z, double chi, double yaw_rate_ff = 0.0);

    void reset();
    const ControllerState& state() const { return state_; }
    const ControllerConfig& config() const { return config_; }
    const Vec3& last_rate_setpoint() const { return last_omega_sp_; }

private:
    ControllerConfig config_;
    ControllerState state_;
    Vec3 last_omega_sp_ = Vec3::Zero();
};

// Altitude hold producing the a_z input (NED, positive down).
class AltitudeHold {
public:
    explicit AltitudeHold(AltitudeHoldGains gains, double dt);

    double step(double altitude, double climb_rate, double altitude_ref,
                double a_z_ff = 0.0);
    void reset() { integral_ = 0.0; }
    double integral() const { return integral_; }

private:
    AltitudeHoldGains gains_;
    double dt_;
    double integral_ = 0.0;
};

}  // namespace tiltwing

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltwing/aero.hpp"
#include "tiltwing/allocation.hpp"
#include "tiltwing/controller.hpp"
#include "tiltwing/mathcore.hpp"

namespace tiltwing {

struct ActuatorLimits {
    double rotor_time_constant = 0.05;  // first-order thrust lag [s]
    double servo_rate = 5.0;            // wing tilt slew limit [rad/s]
    double T_main_min = 0.0;
    double T_main_max = 30.0;
    double T_tail_max = 8.0;
    double zeta_min = deg2rad(-20.0);
    double zeta_max = deg2rad(110.0);
};

struct ActuatorState {
    double T_r = 0.0;
    double T_l = 0.0;
    double T_t = 0.0;
    double zeta_r = kHalfPi;
    double zeta_l = kHalfPi;

    // Same quantities in command form (chi/epsilon from the two tilts).
    ActuatorCommand as_command() const;
    static ActuatorState from_command(const ActuatorCommand& cmd);
};

// Thrusts lag the command with time constant tau, tilts slew toward the
// command at no more than the servo rate. Both respect the limits.
ActuatorState step_actuators(const ActuatorState& act, const ActuatorCommand& cmd,
                             const ActuatorLimits& limits, double dt);

// Momentum-theory rotor power plus a profile term:
//   P = T^1.5 / sqrt(2 rho A) / eta + k_profile T
struct PowerModel {
    double eta = 0.9;
    double k_profile = 0.3;  // [W/N]

    double rotor_power(double thrust, double disc_area, double rho) const;
    double total_power(const ActuatorState& act, const VehicleGeometry& geometry) const;
};

struct VehicleModel {
    VehicleGeometry geometry;
    AeroParams params = AeroParams::defaults();
    std::vector<WingSegment> segments;

    static VehicleModel make(const VehicleGeometry& geometry, const AeroParams& params,
                             const SegmentLayout& layout = {});
};

enum class Integrator { kRK4, kSemiImplicitEuler };

class SimulationDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One physics step with actuators held constant. Aero can be switched off for
// tests. Throws SimulationDiverged on a non-finite result.
RigidBodyState step_physics(const RigidBodyState& state, const ActuatorState& act,
                            const Vec3& wind, const VehicleModel& model, double dt,
                            Integrator integrator = Integrator::kRK4,
                            bool aero_enabled = true);

// Rigid-body dynamics under a given body wrench (no gravity added if
// gravity is false). Exposed for conservation tests.
RigidBodyState step_rigid_body(const RigidBodyState& state, const Wrench& wrench,
                               const VehicleGeometry& geometry, double dt,
                               Integrator integrator, bool gravity);

struct TimelineKnot {
    double t = 0.0;            // [s]
    double chi = kHalfPi;      // [rad]
    double roll = 0.0;         // [rad]
    double pitch = 0.0;        // [rad]
    double yaw = 0.0;          // [rad]
    double a_z = 0.0;          // feed-forward, positive down [m/s^2]
    double yaw_rate_ff = 0.0;  // [rad/s]
};

// Piecewise-linear interpolation, held constant outside the knot range.
// Knots must be sorted by time.
TimelineKnot sample_timeline(const std::vector<TimelineKnot>& timeline, double t);

struct WindSpec {
    Vec3 steady = Vec3::Zero();  // NED [m/s]
    Vec3 gust = Vec3::Zero();
    double gust_start = 0.0;
    double gust_duration = 0.0;

    Vec3 at(double t) const;
};

struct SensorNoise {
    double gyro = 0.0;      // [rad/s]
    double attitude = 0.0;  // [rad]
    double altitude = 0.0;  // [m]
    double climb_rate = 0.0;  // [m/s]
};

struct InitialConditions {
    double altitude = 10.0;  // [m]
    double speed = 0.0;      // forward ground speed [m/s]
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

struct SimConfig {
    double dt_physics = 0.001;
    double dt_control = 0.005;
    Integrator integrator = Integrator::kRK4;
    double duration = 0.0;  // 0: until the last timeline knot
    WindSpec wind;
    SensorNoise noise;
    std::uint64_t seed = 1;
    std::vector<TimelineKnot> timeline;
    InitialConditions initial;
    bool altitude_hold = true;
    std::optional<double> altitude_ref;  // default: initial altitude

    VehicleModel vehicle = VehicleModel::make({}, AeroParams::defaults());
    ControllerConfig controller;
    AllocatorConfig allocator;
    ActuatorLimits actuators;
    PowerModel power;

    // Throws std::invalid_argument when dt or the timeline are inconsistent.
    void validate() const;
};

struct LogRow {
    double t = 0.0;
    RigidBodyState state;
    ActuatorState actuators;
    ControlDemand demand;
    ActuatorCommand command;
    AllocationFlags flags;
    double a_z = 0.0;
    double power = 0.0;
    double airspeed = 0.0;
};

enum class RunStatus { kOk, kDiverged };

struct TimeSeriesLog {
    std::vector<LogRow> rows;
    RunStatus status = RunStatus::kOk;
    std::string message;
    RigidBodyState final_state;
};

// Closed loop: controller and allocation at dt_control, actuators and rigid
// body at dt_physics. Divergence stops the run and is reported in the log.
TimeSeriesLog run_scenario(const SimConfig& config);

// Level, unaccelerated flight at a fixed wing tilt and body pitch, with equal
// main rotor thrusts, zero differential tilt and the tail balancing pitch.
struct TrimPoint {
    double chi = kHalfPi;
    double pitch = 0.0;
    double airspeed = 0.0;      // [m/s]
    double thrust_sum = 0.0;    // T_r + T_l [N]
    double tail_thrust = 0.0;   // [N]
    double power = 0.0;         // [W]
    bool converged = false;
    int iterations = 0;
};

TrimPoint solve_level_trim(const VehicleModel& model, double chi, double pitch = 0.0,
                           const PowerModel& power = {},
                           std::optional<TrimPoint> guess = std::nullopt);

// Trim points from pi/2 down to chi_min (continuation from hover).
std::vector<TrimPoint> trim_sweep(const VehicleModel& model, std::vector<double> chis,
                                  double pitch = 0.0, const PowerModel& power = {});

// Wing tilt at which level trim flies at the requested airspeed.
TrimPoint trim_for_airspeed(const VehicleModel& model, double airspeed,
                            double pitch = 0.0, const PowerModel& power = {});

// Collective that makes allocate() produce a given rotor thrust sum.
double collective_for_thrust_sum(double thrust_sum, double chi, CollectiveSplit split);

}  // namespace tiltwing

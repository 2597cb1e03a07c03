#pragma once

#include <cstdint>
#include <string>

#include "tiltwing/mathcore.hpp"

namespace tiltwing {

struct ControlDemand {
    double tau_roll = 0.0;   // [N m]
    double tau_pitch = 0.0;  // [N m]
    double tau_yaw = 0.0;    // [N m]
    double T_col = 0.0;      // [N]
    double chi = kHalfPi;    // overall wing tilt [rad], pi/2 = hover
};

// Thrusts for the right, left and (reversible) tail rotor plus the total
// tilt of each wing. zeta_r/zeta_l are derived from chi and epsilon so the
// identities zeta_r = chi + epsilon, zeta_l = chi - epsilon hold exactly.
struct ActuatorCommand {
    double T_r = 0.0;
    double T_l = 0.0;
    double T_t = 0.0;
    double chi = kHalfPi;
    double epsilon = 0.0;

    double zeta_r() const { return chi + epsilon; }
    double zeta_l() const { return chi - epsilon; }
};

// How the collective term is split between the two main rotors.
enum class CollectiveSplit {
    // T_r + T_l = T_col. Consistent with the differential-tilt term, which
    // assumes the summed rotor thrust equals T_col.
    kAxis,
    // T_r + T_l = T_col sin(chi): the collective enters the thrust equations
    // inside the sin(chi) factor, exactly as printed.
    kPrinted,
};

struct AllocatorConfig {
    double T_max_main = 30.0;      // per main rotor [N]
    double T_max_tail = 8.0;       // |T_t| limit [N]
    double eps_denominator_floor = 0.5;  // [N m]
    double tau_aero_scale = 200.0;       // [N m] at chi = chi_min
    CollectiveSplit collective = CollectiveSplit::kAxis;
};

struct AllocationFlags {
    bool eps_denominator_floored = false;
    bool T_r_clamped = false;
    bool T_l_clamped = false;
    bool T_t_clamped = false;

    bool any() const {
        return eps_denominator_floored || T_r_clamped || T_l_clamped || T_t_clamped;
    }
};

struct AllocationResult {
    ActuatorCommand command;
    AllocationFlags flags;
    double eps_denominator = 0.0;  // the value actually used (after the floor)
};

// tau_scale (chi - pi/2)^2 / (chi_min - pi/2)^2. Throws std::domain_error for
// chi outside [chi_min, pi/2].
double tau_aero_model(double chi, const VehicleGeometry& geometry,
                      double tau_scale = 200.0);

// Closed-form unified allocation. Throws std::invalid_argument on non-finite
// input and std::domain_error when chi is out of range or T_col < 0.
AllocationResult allocate(const ControlDemand& demand, const VehicleGeometry& geometry,
                          const AllocatorConfig& config = {});

struct ReconstructedWrench {
    Vec3 torque = Vec3::Zero();  // roll, pitch, yaw about the CoG [N m]
    Vec3 force = Vec3::Zero();   // body-frame rotor force [N]
    double collective = 0.0;     // collective thrust implied by the rotor pair [N]
};

// Forward model used to check allocate(): exact trigonometry for the tilted
// rotors, the tau_aero(chi) epsilon differential-tilt term acting along the
// thrust axis, and the weight moment of a CoG displaced sideways.
ReconstructedWrench reconstruct_wrench(const ActuatorCommand& cmd,
                                       const VehicleGeometry& geometry, double chi,
                                       const AllocatorConfig& config = {});

// Randomized allocate() -> reconstruct_wrench() round trip. Each trial draws
// a geometry (lateral CoG offset kept at zero, the closed form has no
// y-offset pitch coupling), a tilt and a demand; trials that saturate or
// need |epsilon| > max_epsilon are redrawn.
struct RoundTripOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    double max_epsilon = deg2rad(3.0);
    double torque_rel_tol = 0.02;
    double torque_floor = 0.01;  // [N m]
    double collective_rel_tol = 0.01;
    CollectiveSplit collective = CollectiveSplit::kAxis;
};

struct RoundTripReport {
    std::size_t tested = 0;
    std::size_t redrawn = 0;
    std::size_t failures = 0;
    double worst_torque_ratio = 0.0;  // max |error| / max(tol * |demand|, floor)
    double worst_collective_rel = 0.0;
    std::string first_failure;

    bool passed() const { return failures == 0 && tested > 0; }
};

RoundTripReport allocation_round_trip(const RoundTripOptions& options = {});

}  // namespace tiltwing

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tiltwing/aero.hpp"
#include "tiltwing/mathcore.hpp"

namespace tiltwing {

// One wind-tunnel style measurement: the vehicle is fixed, the free stream
// arrives at flow_angle (body x-z plane, positive from below, i.e. the
// body-frame angle of attack) and a 6-DOF balance reads the total wrench.
struct SweepSample {
    double flow_speed = 0.0;  // [m/s]
    double flow_angle = 0.0;  // [rad]
    double chi = kHalfPi;     // [rad]
    double epsilon = 0.0;     // [rad]
    double T_r = 0.0;         // [N]
    double T_l = 0.0;
    double T_t = 0.0;
    Vec3 force = Vec3::Zero();   // body [N]
    Vec3 torque = Vec3::Zero();  // body, about CoG [N m]
};

// Wrench the model predicts for a sample's operating condition.
Wrench predict_sample(const AeroParams& params, const SweepSample& sample,
                      const VehicleGeometry& geometry,
                      std::span<const WingSegment> segments);

struct ChannelWeights {
    double force_scale = 1.0;   // residual = error / scale [N]
    double torque_scale = 1.0;  // [N m]
};

// Six entries per sample (Fx Fy Fz Mx My Mz), predicted minus measured,
// divided by the channel scale.
Eigen::VectorXd residuals(const AeroParams& params, const std::vector<SweepSample>& samples,
                          const VehicleGeometry& geometry,
                          std::span<const WingSegment> segments,
                          const ChannelWeights& weights = {});

// Roll torque vs differential tilt 2*epsilon at a fixed cruise condition.
struct TiltSlopeCondition {
    double airspeed = 10.0;            // [m/s]
    double chi = deg2rad(15.0);        // [rad]
    double thrust_per_rotor = 7.5;     // [N]
    double max_epsilon = deg2rad(3.0); // sweep |epsilon| <= this
    int points = 13;
};

struct TiltSlope {
    double slope = 0.0;      // roll authority -d(tau_roll)/d(2 eps) [N m/deg]
    double intercept = 0.0;  // [N m]
    double r_squared = 0.0;
};

// Least-squares line through the wing's roll torque over the epsilon sweep.
// Sign: positive epsilon tilts the right wing up, which rolls left, so the
// reported slope is the negated raw regression slope.
TiltSlope differential_tilt_slope(const AeroParams& params, const VehicleGeometry& geometry,
                                  std::span<const WingSegment> segments,
                                  const TiltSlopeCondition& cond = {});

struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;  // max cosine between r and a Jacobian column
    double step_tolerance = 1e-10;     // relative to the parameter norm
    double initial_lambda = 1e-3;
    double fd_relative_step = 1e-6;
    double identifiability_tolerance = 1e-9;  // relative column norm
    // Fitted slots whose covariance std-dev exceeds this fraction of their
    // value are reported as weakly identifiable.
    double weak_relative_sd = 0.02;
    ChannelWeights weights;

    // Calibration mode: adds weight*(slope - target)/target as a residual.
    std::optional<double> slope_target;  // [N m/deg]
    double slope_weight = 1e3;
    TiltSlopeCondition slope_condition;

    // Optional ridge toward the initial values, weight*(p - p0)/|p0| per
    // slot. Keeps calibrated parameters near their identified values
    // instead of letting weakly determined slots absorb the target.
    double prior_weight = 0.0;
};

struct FitResult {
    AeroParams params;
    std::array<double, 6> residual_rms{};  // per channel, in measurement units
    double cost = 0.0;                     // 0.5 |r|^2 (weighted)
    double initial_cost = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;  // gradient or step tolerance reached
    std::string stop_reason;
    std::vector<std::size_t> free_indices;    // fitted slots
    std::vector<std::size_t> frozen_indices;  // unidentifiable, held at initial value
    std::vector<std::size_t> weak_indices;    // fitted but poorly determined by the data
    // Fitted and well determined (free minus weak).
    std::vector<std::size_t> identified_indices() const;
    std::vector<std::string> warnings;
    Eigen::MatrixXd covariance;  // over all 26 slots; zero rows/cols for frozen ones
    std::vector<double> cost_history;  // cost after each accepted step (index 0: initial)
    std::optional<TiltSlope> calibrated_slope;
};

// Levenberg-Marquardt with a forward-difference Jacobian; stops on the
// iteration limit (not converged), gradient or step tolerance. Slots whose
// Jacobian column is numerically zero at the initial point are frozen.
FitResult fit(const AeroParams& initial, const std::vector<SweepSample>& samples,
              const VehicleGeometry& geometry, std::span<const WingSegment> segments,
              const FitOptions& options = {});

// Forward-difference Jacobian of residuals() over all 26 slots.
Eigen::MatrixXd residual_jacobian(const AeroParams& params,
                                  const std::vector<SweepSample>& samples,
                                  const VehicleGeometry& geometry,
                                  std::span<const WingSegment> segments,
                                  const ChannelWeights& weights, double relative_step,
                                  bool central = false);

struct ThrustSample {
    double chi = 0.0;     // [rad]
    double thrust = 0.0;  // required collective [N]
};

// Least-squares 7th-order polynomial in chi. Throws std::invalid_argument
// for fewer than 8 distinct chi values and std::runtime_error when the
// Vandermonde system is too ill-conditioned or the fit is not positive
// over the sampled chi range.
std::array<double, 8> fit_thrust_ff(const std::vector<ThrustSample>& samples);

struct SweepGrid {
    double speed_min = 0.0;
    double speed_max = 14.0;
    int speed_count = 10;
    double angle_min = -kHalfPi;
    double angle_max = kHalfPi;
    int angle_count = 10;
    // Uniform jitter of each flow angle as a fraction of the grid spacing,
    // so the sampled angles of attack do not sit on a coarse lattice.
    double angle_jitter = 0.5;
    double chi_min = deg2rad(10.0);
    double chi_max = kHalfPi;
    int chi_count = 5;
    double epsilon_min = deg2rad(-3.0);
    double epsilon_max = deg2rad(3.0);
    int epsilon_count = 3;
    double main_thrust_min = 0.0;   // per-sample thrusts drawn uniformly
    double main_thrust_max = 20.0;
    double tail_thrust_max = 3.0;   // symmetric range
};

struct NoiseSpec {
    double relative = 0.0;  // std-dev as a fraction of each true component
    double absolute_force = 0.0;   // [N]
    double absolute_torque = 0.0;  // [N m]
};

// Deterministic for a given seed. Throws std::invalid_argument on a grid
// with a non-positive count or a negative speed.
std::vector<SweepSample> generate_synthetic_sweep(const AeroParams& params,
                                                  const SweepGrid& grid,
                                                  const NoiseSpec& noise, std::uint64_t seed,
                                                  const VehicleGeometry& geometry,
                                                  std::span<const WingSegment> segments);

// CSV with header:
// flow_speed,flow_angle,chi,epsilon,T_r,T_l,T_t,F_x,F_y,F_z,tau_x,tau_y,tau_z
void write_sweep_csv(std::ostream& out, const std::vector<SweepSample>& samples);
std::vector<SweepSample> read_sweep_csv(std::istream& in);

// CSV with header chi,thrust (rad, N).
void write_thrust_csv(std::ostream& out, const std::vector<ThrustSample>& samples);
std::vector<ThrustSample> read_thrust_csv(std::istream& in);

}  // namespace tiltwing

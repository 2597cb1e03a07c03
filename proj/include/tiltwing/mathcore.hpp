#pragma once

// Frames used throughout the stack:
//   body  B: x forward, y right, z down (FRD), origin at the centre of gravity
//   world I: north, east, down (NED)
// Quaternions are Hamilton, q_IB maps body vectors to world vectors:
//   v_I = q_IB (x) [0, v_B] (x) q_IB^-1
// Positive roll lowers the right wing, positive pitch raises the nose,
// positive yaw turns the nose right. Angles are radians internally.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tiltwing {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = 0.5 * kPi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static Quaternion identity() { return {}; }
    static Quaternion from_axis_angle(const Vec3& axis, double angle);
    // ZYX (yaw-pitch-roll) Euler angles.
    static Quaternion from_euler(double roll, double pitch, double yaw);
    static Quaternion from_matrix(const Mat3& r);

    Vec3 vec() const { return {x, y, z}; }
    double norm() const;
    Quaternion normalized() const;
    Quaternion conjugate() const { return {w, -x, -y, -z}; }
    Quaternion inverse() const { return normalized().conjugate(); }
    // Picks the representative with w >= 0.
    Quaternion canonical() const;
    Mat3 to_matrix() const;
    // Returns (roll, pitch, yaw), ZYX convention.
    Vec3 to_euler() const;
};

// Hamilton product a (x) b, renormalized.
Quaternion quat_multiply(const Quaternion& a, const Quaternion& b);
inline Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return quat_multiply(a, b);
}

// R(q) v. With q = q_IB this maps a body vector into the world frame.
Vec3 rotate_vector(const Quaternion& q, const Vec3& v);
// R(q)^T v, i.e. world to body for q = q_IB.
Vec3 rotate_vector_inverse(const Quaternion& q, const Vec3& v);

// q (x) exp(0.5 * omega * dt): body-rate attitude propagation.
Quaternion integrate_body_rate(const Quaternion& q, const Vec3& omega, double dt);

// Rotation angle in [0, pi] of the relative rotation a^-1 b.
double angle_between(const Quaternion& a, const Quaternion& b);

// Vehicle geometry. Distances are measured from the wing pivot point S,
// the midpoint between the two wing/rotor arms.
//   x_offset: CoG ahead of S [m]
//   y_offset: CoG right of S [m]
//   z_offset: CoG above S [m]
struct VehicleGeometry {
    double b = 0.75;          // rotor arm half-span [m]
    double l = 0.55;          // tail arm length behind S [m]
    double x_offset = 0.0;
    double y_offset = 0.0;
    double z_offset = 0.0;
    double m = 5.0;           // [kg]
    double g = 9.81;          // [m/s^2]
    double D = 0.53;          // main propeller diameter [m]
    double D_tail = 0.20;     // tail propeller diameter [m]
    double rho = 1.225;       // [kg/m^3]
    double wingspan = 1.5;    // [m]
    double chord = 0.26;      // [m]
    double chi_min = deg2rad(10.0);
    Vec3 inertia_diag{0.50, 0.20, 0.65};  // [kg m^2], principal axes

    // Throws std::invalid_argument describing the first violated constraint.
    void validate() const;

    Mat3 inertia() const { return inertia_diag.asDiagonal(); }
    // Position of S relative to the CoG, body frame.
    Vec3 pivot_from_cog() const { return {-x_offset, -y_offset, z_offset}; }
    double rotor_disc_area() const { return 0.25 * kPi * D * D; }
    double tail_disc_area() const { return 0.25 * kPi * D_tail * D_tail; }
};

struct RigidBodyState {
    Vec3 position = Vec3::Zero();  // NED [m]
    Vec3 velocity = Vec3::Zero();  // NED [m/s]
    Quaternion attitude;           // q_IB
    Vec3 body_rates = Vec3::Zero();  // [rad/s]

    double altitude() const { return -position.z(); }
};

}  // namespace tiltwing

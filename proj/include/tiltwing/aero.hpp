#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiltwing/allocation.hpp"
#include "tiltwing/mathcore.hpp"

namespace tiltwing {

enum class Profile { kNaca0012, kNaca0029 };
enum class Side { kLeft, kRight };

// One spanwise strip of a half wing. span_start/span_end are |y| distances
// from the centreline; the strip's aerodynamic centre sits on the pivot axis.
struct WingSegment {
    double span_start = 0.0;
    double span_end = 0.0;
    Profile profile = Profile::kNaca0012;
    bool in_prop_wash = false;
    double area = 0.0;
    Side side = Side::kRight;

    double center() const { return 0.5 * (span_start + span_end); }
    // Signed body y of the strip centre (right positive).
    double y() const { return side == Side::kRight ? center() : -center(); }
};

struct SegmentLayout {
    int naca0012_per_half = 8;
    int nacelle_per_half = 2;
    double nacelle_width = 0.10;  // spanwise extent of the nacelle, centred on the rotor [m]
};

// Tiles each half wing with NACA0012 strips and NACA0029 nacelle strips
// around the rotor. A strip is washed iff its centre lies within D/sqrt(2)
// of the propeller axis.
std::vector<WingSegment> build_segments(const VehicleGeometry& geometry,
                                        const SegmentLayout& layout = {});

struct ProfileCoefficients {
    double lift_slope = 0.0;       // dC_l/dalpha attached [1/rad]
    double zero_lift_drag = 0.0;   // C_d0
    double induced_drag = 0.0;     // C_d = C_d0 + k C_l^2
    double stall_angle = 0.0;      // blend centre [rad]
    double flat_plate_lift = 0.0;  // C_l = k 2 sin(a) cos(a)
    double flat_plate_drag = 0.0;  // C_d = k 2 sin^2(a)
};

// The 26-slot grey-box parameter set. Index order is the serialization and
// fitting order; see AeroParams::schema().
struct AeroParams {
    static constexpr std::size_t kCount = 26;

    ProfileCoefficients naca0012;
    ProfileCoefficients naca0029;
    double stall_blend_width = 0.0;        // logistic width, shared [rad]
    double fuselage_drag_area = 0.0;       // C_d A [m^2]
    double tail_inflow_sensitivity = 0.0;  // T_eff = T (1 + k v_edge^2) [s^2/m^2]
    double prop_wash_efficiency = 1.0;     // scales the slipstream term
    double tau_aero_scale = 200.0;         // allocator authority model [N m]
    double roll_trim_asymmetry = 0.0;      // right minus left incidence [rad]
    std::array<double, 8> thrust_ff{};     // T_ff polynomial c_0..c_7 [N/rad^k]

    struct Slot {
        std::string_view key;
        std::string_view unit;
    };
    static const std::array<Slot, kCount>& schema();

    static AeroParams defaults();

    std::array<double, kCount> to_vector() const;
    static AeroParams from_vector(std::span<const double> v);

    const ProfileCoefficients& profile(Profile p) const {
        return p == Profile::kNaca0012 ? naca0012 : naca0029;
    }

    // Throws std::invalid_argument on a non-finite slot, a stall angle outside
    // (0, 45 deg) or a non-positive blend width.
    void validate() const;
};

// "key = value" lines, '#' comments. Missing keys keep the values of `base`;
// unknown keys throw.
AeroParams read_params(std::istream& in, const AeroParams& base = AeroParams::defaults());
AeroParams load_params(const std::string& path,
                       const AeroParams& base = AeroParams::defaults());
void write_params(std::ostream& out, const AeroParams& params);
void save_params(const std::string& path, const AeroParams& params);

struct LocalFlow {
    double v_x_wing = 0.0;           // perpendicular to the chord [m/s]
    double v_z_wing = 0.0;           // along the chord [m/s]
    double v_z_wing_tot = 0.0;       // chordwise component with slipstream [m/s]
    double v_total_corrected = 0.0;  // [m/s]
    double alpha_effective = 0.0;    // [rad]
};

// v_z,tot = sqrt(v_z^2 + eta 4T / (pi rho D^2)), alpha = atan2(v_x, v_z,tot).
// For reverse chordwise flow (v_z < 0) the slipstream speed is added
// linearly so the result stays continuous. Throws on T < 0.
LocalFlow prop_wash_correction(double v_z_wing, double v_x_wing, double T,
                               const VehicleGeometry& geometry, double efficiency = 1.0);

struct AeroCoefficients {
    double C_l = 0.0;
    double C_d = 0.0;
};

// Attached-flow model blended into a flat-plate model with a logistic in
// alpha^2 centred on the stall angle.
AeroCoefficients segment_coefficients(double alpha, Profile profile,
                                      const AeroParams& params);

struct Wrench {
    Vec3 force = Vec3::Zero();   // body [N]
    Vec3 torque = Vec3::Zero();  // body, about CoG [N m]

    Wrench& operator+=(const Wrench& o) {
        force += o.force;
        torque += o.torque;
        return *this;
    }
};

// Wing strips (with slipstream on washed strips) plus fuselage drag.
// Tilts are taken from cmd.zeta_r()/zeta_l(); the rotor thrusts feed the
// slipstream model only.
Wrench wing_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                   const Vec3& wind, const AeroParams& params,
                   const VehicleGeometry& geometry, std::span<const WingSegment> segments);

// Main rotors along their tilted axes and the tail rotor with edgewise
// inflow sensitivity.
Wrench propulsion_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                         const Vec3& wind, const AeroParams& params,
                         const VehicleGeometry& geometry);

// Everything except gravity.
Wrench vehicle_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                      const Vec3& wind, const AeroParams& params,
                      const VehicleGeometry& geometry,
                      std::span<const WingSegment> segments);

// Local air velocity seen by a point r (body, relative to CoG), body frame.
Vec3 local_air_velocity(const RigidBodyState& state, const Vec3& wind, const Vec3& r);

}  // namespace tiltwing

#include "tiltwing/aero.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tiltwing {

namespace {

void add_strips(std::vector<WingSegment>& out, double from, double to, int count,
                Profile profile, Side side, const VehicleGeometry& geo) {
    if (count <= 0 || to <= from) {
        return;
    }
    const double width = (to - from) / count;
    const double wash_radius = geo.D / std::sqrt(2.0);
    for (int i = 0; i < count; ++i) {
        WingSegment s;
        s.span_start = from + i * width;
        s.span_end = (i + 1 == count) ? to : from + (i + 1) * width;
        s.profile = profile;
        s.side = side;
        s.area = (s.span_end - s.span_start) * geo.chord;
        s.in_prop_wash = std::abs(s.center() - geo.b) < wash_radius;
        out.push_back(s);
    }
}

}  // namespace

std::vector<WingSegment> build_segments(const VehicleGeometry& geo,
                                        const SegmentLayout& layout) {
    const double half = 0.5 * geo.wingspan;
    const double nac_lo = std::clamp(geo.b - 0.5 * layout.nacelle_width, 0.0, half);
    const double nac_hi = std::clamp(geo.b + 0.5 * layout.nacelle_width, 0.0, half);
    const double inboard = nac_lo;
    const double outboard = half - nac_hi;
    const double plain = inboard + outboard;

    int n_in = 0;
    int n_out = 0;
    if (plain > 0.0) {
        n_in = inboard > 0.0 ? static_cast<int>(std::lround(layout.naca0012_per_half *
                                                            inboard / plain))
                             : 0;
        n_in = std::clamp(n_in, inboard > 0.0 ? 1 : 0, layout.naca0012_per_half);
        n_out = layout.naca0012_per_half - n_in;
        if (outboard > 0.0 && n_out == 0) {
            n_out = 1;
            n_in = std::max(n_in - 1, 1);
        }
    }

    std::vector<WingSegment> segs;
    for (Side side : {Side::kRight, Side::kLeft}) {
        add_strips(segs, 0.0, nac_lo, n_in, Profile::kNaca0012, side, geo);
        add_strips(segs, nac_lo, nac_hi, layout.nacelle_per_half, Profile::kNaca0029, side,
                   geo);
        add_strips(segs, nac_hi, half, n_out, Profile::kNaca0012, side, geo);
    }
    return segs;
}

const std::array<AeroParams::Slot, AeroParams::kCount>& AeroParams::schema() {
    static const std::array<Slot, kCount> slots{{
        {"naca0012.lift_slope", "1/rad"},
        {"naca0012.zero_lift_drag", "-"},
        {"naca0012.induced_drag", "-"},
        {"naca0012.stall_angle", "rad"},
        {"naca0012.flat_plate_lift", "-"},
        {"naca0012.flat_plate_drag", "-"},
        {"naca0029.lift_slope", "1/rad"},
        {"naca0029.zero_lift_drag", "-"},
        {"naca0029.induced_drag", "-"},
        {"naca0029.stall_angle", "rad"},
        {"naca0029.flat_plate_lift", "-"},
        {"naca0029.flat_plate_drag", "-"},
        {"stall_blend_width", "rad"},
        {"fuselage_drag_area", "m^2"},
        {"tail_inflow_sensitivity", "s^2/m^2"},
        {"prop_wash_efficiency", "-"},
        {"tau_aero_scale", "N m"},
        {"roll_trim_asymmetry", "rad"},
        {"thrust_ff.c0", "N"},
        {"thrust_ff.c1", "N/rad"},
        {"thrust_ff.c2", "N/rad^2"},
        {"thrust_ff.c3", "N/rad^3"},
        {"thrust_ff.c4", "N/rad^4"},
        {"thrust_ff.c5", "N/rad^5"},
        {"thrust_ff.c6", "N/rad^6"},
        {"thrust_ff.c7", "N/rad^7"},
    }};
    return slots;
}

AeroParams AeroParams::defaults() {
    AeroParams p;
    p.naca0012 = {5.5, 0.012, 0.055, deg2rad(22.0), 1.4, 0.85};
    p.naca0029 = {3.8, 0.035, 0.07, deg2rad(18.0), 1.25, 0.9};
    p.stall_blend_width = deg2rad(6.0);
    p.fuselage_drag_area = 0.06;
    p.tail_inflow_sensitivity = 0.002;
    p.prop_wash_efficiency = 1.0;
    p.tau_aero_scale = 200.0;
    p.roll_trim_asymmetry = deg2rad(0.5);
    p.thrust_ff = {5.0 * 9.81, 0, 0, 0, 0, 0, 0, 0};
    return p;
}

std::array<double, AeroParams::kCount> AeroParams::to_vector() const {
    std::array<double, kCount> v{};
    std::size_t i = 0;
    for (const ProfileCoefficients* pc : {&naca0012, &naca0029}) {
        v[i++] = pc->lift_slope;
        v[i++] = pc->zero_lift_drag;
        v[i++] = pc->induced_drag;
        v[i++] = pc->stall_angle;
        v[i++] = pc->flat_plate_lift;
        v[i++] = pc->flat_plate_drag;
    }
    v[i++] = stall_blend_width;
    v[i++] = fuselage_drag_area;
    v[i++] = tail_inflow_sensitivity;
    v[i++] = prop_wash_efficiency;
    v[i++] = tau_aero_scale;
    v[i++] = roll_trim_asymmetry;
    for (double c : thrust_ff) {
        v[i++] = c;
    }
    return v;
}

AeroParams AeroParams::from_vector(std::span<const double> v) {
    if (v.size() != kCount) {
        throw std::invalid_argument("aero parameter vector must have 26 entries");
    }
    AeroParams p;
    std::size_t i = 0;
    for (ProfileCoefficients* pc : {&p.naca0012, &p.naca0029}) {
        pc->lift_slope = v[i++];
        pc->zero_lift_drag = v[i++];
        pc->induced_drag = v[i++];
        pc->stall_angle = v[i++];
        pc->flat_plate_lift = v[i++];
        pc->flat_plate_drag = v[i++];
    }
    p.stall_blend_width = v[i++];
    p.fuselage_drag_area = v[i++];
    p.tail_inflow_sensitivity = v[i++];
    p.prop_wash_efficiency = v[i++];
    p.tau_aero_scale = v[i++];
    p.roll_trim_asymmetry = v[i++];
    for (double& c : p.thrust_ff) {
        c = v[i++];
    }
    return p;
}

void AeroParams::validate() const {
    const auto v = to_vector();
    const auto& names = schema();
    for (std::size_t i = 0; i < kCount; ++i) {
        if (!std::isfinite(v[i])) {
            throw std::invalid_argument("aero parameter " + std::string(names[i].key) +
                                        " is not finite");
        }
    }
    for (const ProfileCoefficients* pc : {&naca0012, &naca0029}) {
        if (!(pc->stall_angle > 0.0 && pc->stall_angle < deg2rad(45.0))) {
            throw std::invalid_argument("stall angle must lie in (0, 45 deg)");
        }
    }
    if (!(stall_blend_width > 0.0)) {
        throw std::invalid_argument("stall blend width must be positive");
    }
}

AeroParams read_params(std::istream& in, const AeroParams& base) {
    auto values = base.to_vector();
    const auto& names = AeroParams::schema();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::runtime_error("params line " + std::to_string(lineno) +
                                         ": expected key = value");
            }
            continue;
        }
        std::istringstream ks(line.substr(0, eq));
        std::string key;
        ks >> key;
        std::istringstream vs(line.substr(eq + 1));
        double value = 0.0;
        if (!(vs >> value)) {
            throw std::runtime_error("params line " + std::to_string(lineno) +
                                     ": bad value for " + key);
        }
        const auto it = std::find_if(names.begin(), names.end(),
                                     [&](const auto& s) { return s.key == key; });
        if (it == names.end()) {
            throw std::runtime_error("params line " + std::to_string(lineno) +
                                     ": unknown key " + key);
        }
        values[static_cast<std::size_t>(it - names.begin())] = value;
    }
    AeroParams p = AeroParams::from_vector(values);
    p.validate();
    return p;
}

AeroParams load_params(const std::string& path, const AeroParams& base) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open parameter file " + path);
    }
    return read_params(in, base);
}

void write_params(std::ostream& out, const AeroParams& params) {
    const auto v = params.to_vector();
    const auto& names = AeroParams::schema();
    out << "# grey-box aerodynamic parameters (" << AeroParams::kCount << " slots)\n";
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(17);
    for (std::size_t i = 0; i < AeroParams::kCount; ++i) {
        out << names[i].key << " = " << v[i] << "  # " << names[i].unit << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

void save_params(const std::string& path, const AeroParams& params) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write parameter file " + path);
    }
    write_params(out, params);
}

LocalFlow prop_wash_correction(double v_z_wing, double v_x_wing, double T,
                               const VehicleGeometry& geo, double efficiency) {
    if (T < 0.0) {
        throw std::invalid_argument("propeller thrust must be non-negative");
    }
    LocalFlow f;
    f.v_x_wing = v_x_wing;
    f.v_z_wing = v_z_wing;
    const double wash_sq = efficiency * 4.0 * T / (kPi * geo.rho * geo.D * geo.D);
    if (v_z_wing >= 0.0) {
        f.v_z_wing_tot = std::sqrt(v_z_wing * v_z_wing + wash_sq);
    } else {
        f.v_z_wing_tot = v_z_wing + std::sqrt(std::max(wash_sq, 0.0));
    }
    f.v_total_corrected = std::hypot(f.v_z_wing_tot, v_x_wing);
    f.alpha_effective = std::atan2(v_x_wing, f.v_z_wing_tot);
    return f;
}

AeroCoefficients segment_coefficients(double alpha, Profile profile,
                                      const AeroParams& params) {
    const ProfileCoefficients& pc = params.profile(profile);
    const double s = std::sin(alpha);
    const double c = std::cos(alpha);

    const double cl_att = pc.lift_slope * alpha;
    const double cd_att = pc.zero_lift_drag + pc.induced_drag * cl_att * cl_att;
    const double cl_fp = pc.flat_plate_lift * 2.0 * s * c;
    const double cd_fp = pc.flat_plate_drag * 2.0 * s * s;

    // Logistic in alpha^2: smooth through alpha = 0, ~ (|a| - a_s)/w near stall.
    const double a_s = pc.stall_angle;
    const double arg = (alpha * alpha - a_s * a_s) / (2.0 * a_s * params.stall_blend_width);
    const double sigma = 1.0 / (1.0 + std::exp(-std::clamp(arg, -700.0, 700.0)));

    return {(1.0 - sigma) * cl_att + sigma * cl_fp, (1.0 - sigma) * cd_att + sigma * cd_fp};
}

Vec3 local_air_velocity(const RigidBodyState& state, const Vec3& wind, const Vec3& r) {
    const Vec3 rel_world = wind - state.velocity;
    return rotate_vector_inverse(state.attitude, rel_world) - state.body_rates.cross(r);
}

Wrench wing_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                   const Vec3& wind, const AeroParams& params, const VehicleGeometry& geo,
                   std::span<const WingSegment> segments) {
    Wrench w;
    const Vec3 pivot = geo.pivot_from_cog();
    const double half_asym = 0.5 * params.roll_trim_asymmetry;

    for (const WingSegment& seg : segments) {
        const bool right = seg.side == Side::kRight;
        const double zeta = (right ? cmd.zeta_r() : cmd.zeta_l()) + (right ? half_asym : -half_asym);
        const double thrust = right ? cmd.T_r : cmd.T_l;
        const Vec3 chord(std::cos(zeta), 0.0, -std::sin(zeta));  // toward leading edge
        const Vec3 up(-std::sin(zeta), 0.0, -std::cos(zeta));    // wing normal
        const Vec3 r = pivot + Vec3(0.0, seg.y(), 0.0);
        const Vec3 air = local_air_velocity(state, wind, r);

        const double v_z = -air.dot(chord);
        const double v_x = air.dot(up);
        LocalFlow flow;
        if (seg.in_prop_wash) {
            flow = prop_wash_correction(v_z, v_x, std::max(thrust, 0.0), geo,
                                        params.prop_wash_efficiency);
        } else {
            flow.v_x_wing = v_x;
            flow.v_z_wing = v_z;
            flow.v_z_wing_tot = v_z;
            flow.v_total_corrected = std::hypot(v_z, v_x);
            flow.alpha_effective = std::atan2(v_x, v_z);
        }
        const double v = flow.v_total_corrected;
        if (v < 1e-9) {
            continue;
        }
        const AeroCoefficients co =
            segment_coefficients(flow.alpha_effective, seg.profile, params);
        // Unit vectors along the corrected flow and perpendicular to it.
        const Vec3 flow_dir = (-flow.v_z_wing_tot * chord + v_x * up) / v;
        const Vec3 lift_dir = (flow.v_z_wing_tot * up + v_x * chord) / v;
        const double q_area = 0.5 * geo.rho * v * v * seg.area;
        const Vec3 f = q_area * (co.C_l * lift_dir + co.C_d * flow_dir);
        w.force += f;
        w.torque += r.cross(f);
    }

    // Fuselage drag at the CoG, along the relative air velocity.
    const Vec3 air_cog = local_air_velocity(state, wind, Vec3::Zero());
    w.force += 0.5 * geo.rho * params.fuselage_drag_area * air_cog.norm() * air_cog;
    return w;
}

Wrench propulsion_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                         const Vec3& wind, const AeroParams& params,
                         const VehicleGeometry& geo) {
    const Vec3 pivot = geo.pivot_from_cog();
    const Vec3 r_right = pivot + Vec3(0.0, geo.b, 0.0);
    const Vec3 r_left = pivot + Vec3(0.0, -geo.b, 0.0);
    const Vec3 r_tail = pivot + Vec3(-geo.l, 0.0, 0.0);

    auto axis = [](double zeta) { return Vec3(std::cos(zeta), 0.0, -std::sin(zeta)); };
    const Vec3 F_r = cmd.T_r * axis(cmd.zeta_r());
    const Vec3 F_l = cmd.T_l * axis(cmd.zeta_l());

    const Vec3 air_tail = local_air_velocity(state, wind, r_tail);
    const double edge_sq = air_tail.x() * air_tail.x() + air_tail.y() * air_tail.y();
    const double T_t = cmd.T_t * (1.0 + params.tail_inflow_sensitivity * edge_sq);
    const Vec3 F_t(0.0, 0.0, -T_t);

    Wrench w;
    w.force = F_r + F_l + F_t;
    w.torque = r_right.cross(F_r) + r_left.cross(F_l) + r_tail.cross(F_t);
    return w;
}

Wrench vehicle_wrench(const RigidBodyState& state, const ActuatorCommand& cmd,
                      const Vec3& wind, const AeroParams& params, const VehicleGeometry& geo,
                      std::span<const WingSegment> segments) {
    Wrench w = wing_wrench(state, cmd, wind, params, geo, segments);
    w += propulsion_wrench(state, cmd, wind, params, geo);
    return w;
}

}  // namespace tiltwing

#include "tiltwing/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tiltwing {

namespace {

constexpr double kChiSlack = 1e-12;

void check_chi(double chi, const VehicleGeometry& geometry) {
    if (!std::isfinite(chi)) {
        throw std::invalid_argument("chi is not finite");
    }
    if (chi < geometry.chi_min - kChiSlack || chi > kHalfPi + kChiSlack) {
        throw std::domain_error("chi = " + std::to_string(chi) +
                                " rad outside [chi_min, pi/2]");
    }
}

}  // namespace

double tau_aero_model(double chi, const VehicleGeometry& geometry, double tau_scale) {
    check_chi(chi, geometry);
    const double num = chi - kHalfPi;
    const double den = geometry.chi_min - kHalfPi;
    return tau_scale * (num * num) / (den * den);
}

AllocationResult allocate(const ControlDemand& d, const VehicleGeometry& geo,
                          const AllocatorConfig& cfg) {
    if (!std::isfinite(d.tau_roll) || !std::isfinite(d.tau_pitch) ||
        !std::isfinite(d.tau_yaw) || !std::isfinite(d.T_col)) {
        throw std::invalid_argument("control demand contains non-finite values");
    }
    if (d.T_col < 0.0) {
        throw std::domain_error("collective thrust must be non-negative");
    }
    check_chi(d.chi, geo);
    const double chi = std::clamp(d.chi, geo.chi_min, kHalfPi);

    const double s = std::sin(chi);
    const double c = std::cos(chi);
    const double b = geo.b;
    const double weight_roll = geo.g * geo.m * geo.y_offset;

    AllocationResult out;
    ActuatorCommand& cmd = out.command;
    cmd.chi = chi;

    // Thrust difference shared by both splits.
    const double half_diff = ((weight_roll - d.tau_roll) * s - d.tau_yaw * c) / (2.0 * b);
    const double half_col =
        cfg.collective == CollectiveSplit::kAxis ? 0.5 * d.T_col : 0.5 * d.T_col * s;
    double T_r = half_col + half_diff;
    double T_l = half_col - half_diff;

    const double tau_aero = tau_aero_model(chi, geo, cfg.tau_aero_scale);
    double den = d.T_col * b + tau_aero;
    if (den < cfg.eps_denominator_floor) {
        den = cfg.eps_denominator_floor;
        out.flags.eps_denominator_floored = true;
    }
    out.eps_denominator = den;
    cmd.epsilon = ((weight_roll - d.tau_roll) * c + d.tau_yaw * s) / den;

    if (T_r < 0.0 || T_r > cfg.T_max_main) {
        T_r = std::clamp(T_r, 0.0, cfg.T_max_main);
        out.flags.T_r_clamped = true;
    }
    if (T_l < 0.0 || T_l > cfg.T_max_main) {
        T_l = std::clamp(T_l, 0.0, cfg.T_max_main);
        out.flags.T_l_clamped = true;
    }
    cmd.T_r = T_r;
    cmd.T_l = T_l;

    const double zr = cmd.zeta_r();
    const double zl = cmd.zeta_l();
    const double lever = geo.l + geo.x_offset;
    double T_t = (-T_r * geo.x_offset * std::sin(zr) + T_r * geo.z_offset * std::cos(zr) -
                  T_l * geo.x_offset * std::sin(zl) + T_l * geo.z_offset * std::cos(zl) -
                  d.tau_pitch) /
                 lever;
    if (std::abs(T_t) > cfg.T_max_tail) {
        T_t = std::clamp(T_t, -cfg.T_max_tail, cfg.T_max_tail);
        out.flags.T_t_clamped = true;
    }
    cmd.T_t = T_t;
    return out;
}

ReconstructedWrench reconstruct_wrench(const ActuatorCommand& cmd,
                                       const VehicleGeometry& geo, double chi,
                                       const AllocatorConfig& cfg) {
    const Vec3 pivot = geo.pivot_from_cog();
    const Vec3 r_right = pivot + Vec3(0.0, geo.b, 0.0);
    const Vec3 r_left = pivot + Vec3(0.0, -geo.b, 0.0);
    const Vec3 r_tail = pivot + Vec3(-geo.l, 0.0, 0.0);

    auto axis = [](double zeta) { return Vec3(std::cos(zeta), 0.0, -std::sin(zeta)); };
    const Vec3 F_r = cmd.T_r * axis(cmd.zeta_r());
    const Vec3 F_l = cmd.T_l * axis(cmd.zeta_l());
    const Vec3 F_t(0.0, 0.0, -cmd.T_t);

    ReconstructedWrench w;
    w.force = F_r + F_l + F_t;
    w.torque = r_right.cross(F_r) + r_left.cross(F_l) + r_tail.cross(F_t);
    // Differential tilt in airflow: a torque about the thrust axis that rolls
    // toward the wing with the larger tilt.
    w.torque -= tau_aero_model(chi, geo, cfg.tau_aero_scale) * cmd.epsilon * axis(chi);

    const double sum = cmd.T_r + cmd.T_l;
    w.collective = cfg.collective == CollectiveSplit::kAxis ? sum : sum / std::sin(chi);
    return w;
}

RoundTripReport allocation_round_trip(const RoundTripOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    AllocatorConfig cfg;
    cfg.collective = opt.collective;
    RoundTripReport rep;
    while (rep.tested < opt.samples) {
        VehicleGeometry geo;
        geo.b = uni(0.4, 1.0);
        geo.l = uni(0.3, 0.9);
        geo.x_offset = uni(-0.05, 0.05);
        geo.z_offset = uni(-0.05, 0.05);
        ControlDemand d;
        d.chi = uni(geo.chi_min, kHalfPi);
        d.T_col = uni(15.0, 50.0);
        d.tau_roll = uni(-3.0, 3.0);
        d.tau_pitch = uni(-3.0, 3.0);
        d.tau_yaw = uni(-3.0, 3.0);

        const AllocationResult a = allocate(d, geo, cfg);
        if (a.flags.any() || std::abs(a.command.epsilon) > opt.max_epsilon) {
            ++rep.redrawn;
            continue;
        }
        ++rep.tested;
        const ReconstructedWrench w = reconstruct_wrench(a.command, geo, d.chi, cfg);
        const Vec3 demand(d.tau_roll, d.tau_pitch, d.tau_yaw);
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            const double tol = std::max(opt.torque_rel_tol * std::abs(demand[i]), opt.torque_floor);
            const double ratio = std::abs(w.torque[i] - demand[i]) / tol;
            rep.worst_torque_ratio = std::max(rep.worst_torque_ratio, ratio);
            ok = ok && ratio <= 1.0;
        }
        const double col_rel = std::abs(w.collective - d.T_col) / d.T_col;
        rep.worst_collective_rel = std::max(rep.worst_collective_rel, col_rel);
        ok = ok && col_rel <= opt.collective_rel_tol;
        if (!ok) {
            if (rep.failures++ == 0) {
                std::ostringstream m;
                m << "chi=" << rad2deg(d.chi) << "deg T_col=" << d.T_col << " tau=("
                  << demand.transpose() << ") got (" << w.torque.transpose()
                  << ") collective " << w.collective;
                rep.first_failure = m.str();
            }
        }
    }
    return rep;
}

}  // namespace tiltwing

#pragma once

// Flight log CSV. Column order is fixed (SI units, radians, %.6g):
//   t, x, y, z, vx, vy, vz, qw, qx, qy, qz, p, q, r,
//   chi, epsilon, T_r, T_l, T_t, zeta_r, zeta_l, power_total, airspeed,
// followed by the controller columns
//   a_z, T_col, tau_roll, tau_pitch, tau_yaw, chi_cmd, epsilon_cmd, alloc_flags.
// Position/velocity are NED, the quaternion is q_IB (Hamilton), rates are
// body FRD. chi/epsilon/T/zeta are the actuator states, *_cmd the allocator
// output. alloc_flags is a bit mask: 1 eps floor, 2 T_r, 4 T_l, 8 T_t clamped.

#include <iosfwd>
#include <string>
#include <vector>

#include "tiltwing/sim.hpp"

namespace tiltwing {

const std::vector<std::string>& log_columns();

int flag_bits(const AllocationFlags& flags);

// Deterministic: identical logs give identical bytes.
void write_log_csv(std::ostream& out, const TimeSeriesLog& log);
void save_log_csv(const std::string& path, const TimeSeriesLog& log);

// Numeric CSV with a header row, used to read logs back.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // -1 when absent.
    int index(const std::string& name) const;
    // Throws std::out_of_range naming the missing column.
    std::vector<double> column(const std::string& name) const;
    bool has(const std::string& name) const { return index(name) >= 0; }
};

// Throws std::runtime_error with a line number on malformed input.
CsvTable read_csv_table(std::istream& in);
CsvTable load_csv_table(const std::string& path);

// %.6g in the C locale.
std::string format_g6(double v);

}  // namespace tiltwing

#include "tiltwing/csvlog.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tiltwing {

const std::vector<std::string>& log_columns() {
    static const std::vector<std::string> cols{
        "t",        "x",        "y",         "z",           "vx",          "vy",
        "vz",       "qw",       "qx",        "qy",          "qz",          "p",
        "q",        "r",        "chi",       "epsilon",     "T_r",         "T_l",
        "T_t",      "zeta_r",   "zeta_l",    "power_total", "airspeed",    "a_z",
        "T_col",    "tau_roll", "tau_pitch", "tau_yaw",     "chi_cmd",     "epsilon_cmd",
        "alloc_flags"};
    return cols;
}

int flag_bits(const AllocationFlags& f) {
    return (f.eps_denominator_floored ? 1 : 0) | (f.T_r_clamped ? 2 : 0) |
           (f.T_l_clamped ? 4 : 0) | (f.T_t_clamped ? 8 : 0);
}

std::string format_g6(double v) {
    // Collapse negative zero so sign noise does not leak into the bytes.
    if (v == 0.0) {
        v = 0.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_log_csv(std::ostream& out, const TimeSeriesLog& log) {
    const auto& cols = log_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
    std::string line;
    for (const LogRow& r : log.rows) {
        const ActuatorCommand act = r.actuators.as_command();
        const RigidBodyState& s = r.state;
        const double v[] = {r.t,
                            s.position.x(),
                            s.position.y(),
                            s.position.z(),
                            s.velocity.x(),
                            s.velocity.y(),
                            s.velocity.z(),
                            s.attitude.w,
                            s.attitude.x,
                            s.attitude.y,
                            s.attitude.z,
                            s.body_rates.x(),
                            s.body_rates.y(),
                            s.body_rates.z(),
                            act.chi,
                            act.epsilon,
                            r.actuators.T_r,
                            r.actuators.T_l,
                            r.actuators.T_t,
                            r.actuators.zeta_r,
                            r.actuators.zeta_l,
                            r.power,
                            r.airspeed,
                            r.a_z,
                            r.demand.T_col,
                            r.demand.tau_roll,
                            r.demand.tau_pitch,
                            r.demand.tau_yaw,
                            r.command.chi,
                            r.command.epsilon};
        line.clear();
        for (double x : v) {
            line += format_g6(x);
            line += ',';
        }
        line += std::to_string(flag_bits(r.flags));
        line += '\n';
        out << line;
    }
}

void save_log_csv(const std::string& path, const TimeSeriesLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    write_log_csv(out, log);
}

int CsvTable::index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const int i = index(name);
    if (i < 0) {
        throw std::out_of_range("CSV has no column '" + name + "'");
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r[static_cast<std::size_t>(i)]);
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        const auto b = cell.find_first_not_of(' ');
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

CsvTable read_csv_table(std::istream& in) {
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') {
            continue;
        }
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size() || c.empty()) {
                throw std::runtime_error("CSV line " + std::to_string(lineno) +
                                         ": not a number: '" + c + "'");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) {
        throw std::runtime_error("CSV is empty");
    }
    return t;
}

CsvTable load_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_csv_table(in);
}

}  // namespace tiltwing

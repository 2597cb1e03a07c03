#pragma once

// Post-processing of flight logs: altitude/airspeed statistics, power per
// airspeed bin and the hover vs cruise power comparison, plus SVG figures.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tiltwing/csvlog.hpp"
#include "tiltwing/sim.hpp"

namespace tiltwing {

struct ReportOptions {
    double bin_width = 1.0;       // airspeed bin [m/s]
    double hover_speed = 0.5;     // airspeed below this with chi near 90 deg is hover
    double hover_chi_min = deg2rad(80.0);
    double cruise_speed = 10.0;   // comparison point [m/s]
    double cruise_band = 0.5;     // +- around cruise_speed
    std::optional<double> altitude_ref;  // default: first logged altitude
};

struct PowerBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double mean_chi = 0.0;  // [rad]

    double center() const { return 0.5 * (lo + hi); }
};

struct LogSummary {
    std::size_t rows = 0;
    double duration = 0.0;
    double altitude_ref = 0.0;
    double altitude_initial = 0.0;
    double altitude_final = 0.0;
    double altitude_min = 0.0;
    double altitude_max = 0.0;
    double altitude_drift = 0.0;          // |final - initial| [m]
    double max_altitude_deviation = 0.0;  // max |alt - ref| [m]
    double airspeed_max = 0.0;
    double chi_min = 0.0;  // [rad]
    double power_mean = 0.0;
    std::size_t flagged_rows = 0;
    std::size_t hover_samples = 0;
    std::size_t cruise_samples = 0;
    std::optional<double> hover_power;       // [W]
    std::optional<double> cruise_power;      // [W]
    std::optional<double> power_reduction;   // 1 - cruise/hover
    std::vector<PowerBin> bins;
};

// The columns the summary needs, taken either from a live log or a CSV.
struct LogSeries {
    std::vector<double> t, altitude, airspeed, power, chi, flags;

    static LogSeries from_log(const TimeSeriesLog& log);
    // Throws std::out_of_range if a required column is missing.
    static LogSeries from_table(const CsvTable& table);
};

LogSummary summarize(const LogSeries& s, const ReportOptions& opt = {});

// JSON object (pretty-printed, trailing newline).
std::string summary_json(const LogSummary& sum, const ReportOptions& opt = {});

// Writes <stem>_power_airspeed.svg, <stem>_power_scatter.svg,
// <stem>_profile.svg and <stem>_report.json into out_dir and returns the
// paths written.
std::vector<std::filesystem::path> write_report(const LogSeries& s, const LogSummary& sum,
                                                const ReportOptions& opt,
                                                const std::filesystem::path& out_dir,
                                                const std::string& stem);

}  // namespace tiltwing

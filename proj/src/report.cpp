#include "tiltwing/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "tiltwing/svg.hpp"

namespace tiltwing {

LogSeries LogSeries::from_log(const TimeSeriesLog& log) {
    LogSeries s;
    for (const LogRow& r : log.rows) {
        s.t.push_back(r.t);
        s.altitude.push_back(r.state.altitude());
        s.airspeed.push_back(r.airspeed);
        s.power.push_back(r.power);
        s.chi.push_back(r.actuators.as_command().chi);
        s.flags.push_back(flag_bits(r.flags));
    }
    return s;
}

LogSeries LogSeries::from_table(const CsvTable& table) {
    LogSeries s;
    s.t = table.column("t");
    s.altitude = table.column("z");
    for (double& z : s.altitude) {
        z = -z;
    }
    s.airspeed = table.column("airspeed");
    s.power = table.column("power_total");
    s.chi = table.column("chi");
    s.flags = table.has("alloc_flags") ? table.column("alloc_flags")
                                       : std::vector<double>(s.t.size(), 0.0);
    return s;
}

LogSummary summarize(const LogSeries& s, const ReportOptions& opt) {
    LogSummary sum;
    sum.rows = s.t.size();
    if (sum.rows == 0) {
        return sum;
    }
    sum.duration = s.t.back() - s.t.front();
    sum.altitude_initial = s.altitude.front();
    sum.altitude_final = s.altitude.back();
    sum.altitude_ref = opt.altitude_ref.value_or(sum.altitude_initial);
    sum.altitude_drift = std::abs(sum.altitude_final - sum.altitude_initial);
    sum.altitude_min = *std::min_element(s.altitude.begin(), s.altitude.end());
    sum.altitude_max = *std::max_element(s.altitude.begin(), s.altitude.end());
    sum.max_altitude_deviation = std::max(std::abs(sum.altitude_max - sum.altitude_ref),
                                          std::abs(sum.altitude_min - sum.altitude_ref));
    sum.airspeed_max = *std::max_element(s.airspeed.begin(), s.airspeed.end());
    sum.chi_min = *std::min_element(s.chi.begin(), s.chi.end());

    double p_acc = 0.0;
    double hover_acc = 0.0;
    double cruise_acc = 0.0;
    const double vmax = sum.airspeed_max;
    const std::size_t nbins =
        static_cast<std::size_t>(std::floor(std::max(vmax, 0.0) / opt.bin_width)) + 1;
    sum.bins.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        sum.bins[b].lo = b * opt.bin_width;
        sum.bins[b].hi = (b + 1) * opt.bin_width;
    }
    std::vector<double> chi_acc(nbins, 0.0);
    for (std::size_t i = 0; i < sum.rows; ++i) {
        const double p = s.power[i];
        const double v = s.airspeed[i];
        p_acc += p;
        if (s.flags[i] != 0.0) {
            ++sum.flagged_rows;
        }
        if (v < opt.hover_speed && s.chi[i] >= opt.hover_chi_min) {
            hover_acc += p;
            ++sum.hover_samples;
        }
        if (std::abs(v - opt.cruise_speed) <= opt.cruise_band) {
            cruise_acc += p;
            ++sum.cruise_samples;
        }
        const std::size_t b =
            std::min(nbins - 1, static_cast<std::size_t>(std::max(v, 0.0) / opt.bin_width));
        PowerBin& bin = sum.bins[b];
        if (bin.count == 0) {
            bin.min = bin.max = p;
        }
        bin.min = std::min(bin.min, p);
        bin.max = std::max(bin.max, p);
        bin.mean += p;
        chi_acc[b] += s.chi[i];
        ++bin.count;
    }
    for (std::size_t b = 0; b < nbins; ++b) {
        if (sum.bins[b].count) {
            sum.bins[b].mean /= static_cast<double>(sum.bins[b].count);
            sum.bins[b].mean_chi = chi_acc[b] / static_cast<double>(sum.bins[b].count);
        }
    }
    std::erase_if(sum.bins, [](const PowerBin& b) { return b.count == 0; });
    sum.power_mean = p_acc / static_cast<double>(sum.rows);
    if (sum.hover_samples) {
        sum.hover_power = hover_acc / static_cast<double>(sum.hover_samples);
    }
    if (sum.cruise_samples) {
        sum.cruise_power = cruise_acc / static_cast<double>(sum.cruise_samples);
    }
    if (sum.hover_power && sum.cruise_power && *sum.hover_power > 0.0) {
        sum.power_reduction = 1.0 - *sum.cruise_power / *sum.hover_power;
    }
    return sum;
}

std::string summary_json(const LogSummary& sum, const ReportOptions& opt) {
    using nlohmann::ordered_json;
    auto opt_num = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    ordered_json j;
    j["rows"] = sum.rows;
    j["duration_s"] = sum.duration;
    j["altitude"] = {{"ref_m", sum.altitude_ref},
                     {"initial_m", sum.altitude_initial},
                     {"final_m", sum.altitude_final},
                     {"min_m", sum.altitude_min},
                     {"max_m", sum.altitude_max},
                     {"drift_m", sum.altitude_drift},
                     {"max_deviation_m", sum.max_altitude_deviation}};
    j["airspeed_max_m_s"] = sum.airspeed_max;
    j["chi_min_deg"] = rad2deg(sum.chi_min);
    j["power"] = {{"mean_W", sum.power_mean},
                  {"hover_W", opt_num(sum.hover_power)},
                  {"hover_samples", sum.hover_samples},
                  {"cruise_speed_m_s", opt.cruise_speed},
                  {"cruise_W", opt_num(sum.cruise_power)},
                  {"cruise_samples", sum.cruise_samples},
                  {"reduction_percent",
                   sum.power_reduction ? ordered_json(100.0 * *sum.power_reduction)
                                       : ordered_json(nullptr)}};
    j["allocation_flagged_rows"] = sum.flagged_rows;
    ordered_json bins = ordered_json::array();
    for (const PowerBin& b : sum.bins) {
        bins.push_back({{"airspeed_lo_m_s", b.lo},
                        {"airspeed_hi_m_s", b.hi},
                        {"count", b.count},
                        {"power_mean_W", b.mean},
                        {"power_min_W", b.min},
                        {"power_max_W", b.max},
                        {"chi_mean_deg", rad2deg(b.mean_chi)}});
    }
    j["power_bins"] = bins;
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_report(const LogSeries& s, const LogSummary& sum,
                                                const ReportOptions& opt,
                                                const std::filesystem::path& out_dir,
                                                const std::string& stem) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    const double chi_lo = 10.0;
    const double chi_hi = 90.0;

    // Power vs airspeed, binned (mean with min/max bars).
    {
        svg::Figure fig;
        fig.title = "Total power vs airspeed";
        svg::Panel p;
        p.x_label = "airspeed [m/s]";
        p.y_label = "power [W]";
        svg::Series bins;
        bins.label = "bin mean (min-max)";
        bins.style = svg::Style::kMarkers;
        bins.marker_radius = 4.0;
        for (const PowerBin& b : sum.bins) {
            bins.x.push_back(b.center());
            bins.y.push_back(b.mean);
            bins.y_low.push_back(b.min);
            bins.y_high.push_back(b.max);
            bins.point_colors.push_back(
                svg::colormap((rad2deg(b.mean_chi) - chi_lo) / (chi_hi - chi_lo)));
        }
        p.series.push_back(bins);
        if (sum.hover_power) {
            p.hlines.push_back({*sum.hover_power, "hover", "#d62728"});
        }
        if (sum.cruise_power) {
            char label[64];
            std::snprintf(label, sizeof label, "%.0f m/s", opt.cruise_speed);
            p.hlines.push_back({*sum.cruise_power, label, "#2ca02c"});
        }
        p.x_range = std::make_pair(0.0, std::max(1.0, std::ceil(sum.airspeed_max + 0.5)));
        fig.panels.push_back(p);
        fig.colorbar = std::make_pair(std::string("chi [deg]"), std::make_pair(chi_lo, chi_hi));
        const auto path = out_dir / (stem + "_power_airspeed.svg");
        svg::save(path.string(), fig);
        written.push_back(path);
    }

    // Every sample, coloured by wing tilt.
    {
        svg::Figure fig;
        fig.title = "Power vs airspeed by wing tilt";
        svg::Panel p;
        p.x_label = "airspeed [m/s]";
        p.y_label = "power [W]";
        svg::Series pts;
        pts.style = svg::Style::kMarkers;
        pts.marker_radius = 1.5;
        const std::size_t stride = std::max<std::size_t>(1, s.t.size() / 2000);
        for (std::size_t i = 0; i < s.t.size(); i += stride) {
            pts.x.push_back(s.airspeed[i]);
            pts.y.push_back(s.power[i]);
            pts.point_colors.push_back(
                svg::colormap((rad2deg(s.chi[i]) - chi_lo) / (chi_hi - chi_lo)));
        }
        p.series.push_back(pts);
        fig.panels.push_back(p);
        fig.colorbar = std::make_pair(std::string("chi [deg]"), std::make_pair(chi_lo, chi_hi));
        const auto path = out_dir / (stem + "_power_scatter.svg");
        svg::save(path.string(), fig);
        written.push_back(path);
    }

    // Time profile: altitude, airspeed, wing tilt, power.
    {
        svg::Figure fig;
        fig.title = "Flight profile";
        fig.panel_height = 200.0;
        const std::size_t stride = std::max<std::size_t>(1, s.t.size() / 3000);
        auto line = [&](const std::vector<double>& y, double scale, const std::string& color) {
            svg::Series ser;
            ser.color = color;
            for (std::size_t i = 0; i < s.t.size(); i += stride) {
                ser.x.push_back(s.t[i]);
                ser.y.push_back(scale * y[i]);
            }
            return ser;
        };
        svg::Panel alt;
        alt.y_label = "altitude [m]";
        alt.series.push_back(line(s.altitude, 1.0, "#1f77b4"));
        alt.hlines.push_back({sum.altitude_ref, "reference", "#888888"});
        alt.hlines.push_back({sum.altitude_ref + 1.0, "+-1 m", "#d62728"});
        alt.hlines.push_back({sum.altitude_ref - 1.0, "", "#d62728"});
        svg::Panel spd;
        spd.y_label = "airspeed [m/s]";
        spd.series.push_back(line(s.airspeed, 1.0, "#2ca02c"));
        svg::Panel chi;
        chi.y_label = "chi [deg]";
        chi.series.push_back(line(s.chi, 180.0 / kPi, "#9467bd"));
        svg::Panel pw;
        pw.y_label = "power [W]";
        pw.x_label = "time [s]";
        pw.series.push_back(line(s.power, 1.0, "#ff7f0e"));
        fig.panels = {alt, spd, chi, pw};
        const auto path = out_dir / (stem + "_profile.svg");
        svg::save(path.string(), fig);
        written.push_back(path);
    }

    const auto json_path = out_dir / (stem + "_report.json");
    std::ofstream out(json_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + json_path.string());
    }
    out << summary_json(sum, opt);
    written.push_back(json_path);
    return written;
}

}  // namespace tiltwing

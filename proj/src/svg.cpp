#include "tiltwing/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tiltwing::svg {

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;  // room for the legend
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v, double step) {
    if (std::abs(v) < 1e-12 * std::max(1.0, step)) {
        v = 0.0;
    }
    char buf[32];
    int decimals = 0;
    for (double scaled = step; decimals < 6; ++decimals, scaled *= 10.0) {
        if (std::abs(scaled - std::round(scaled)) < 1e-6 * std::max(1.0, scaled)) {
            break;
        }
    }
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::pair<double, double> data_range(const Panel& p, bool x_axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : p.series) {
        const auto& v = x_axis ? s.x : s.y;
        for (double d : v) {
            if (std::isfinite(d)) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        if (!x_axis) {
            for (const auto* extra : {&s.y_low, &s.y_high}) {
                for (double d : *extra) {
                    if (std::isfinite(d)) {
                        lo = std::min(lo, d);
                        hi = std::max(hi, d);
                    }
                }
            }
        }
    }
    if (!x_axis) {
        for (const auto& h : p.hlines) {
            lo = std::min(lo, h.y);
            hi = std::max(hi, h.y);
        }
    }
    if (!std::isfinite(lo)) {
        return {0.0, 1.0};
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double pad = std::max(1.0, std::abs(hi) * 0.1);
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo) || target < 1) {
        return {lo};
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) {
            break;
        }
    }
    std::vector<double> ticks;
    const double first = std::ceil(lo / step - 1e-9) * step;
    for (int i = 0;; ++i) {
        const double t = first + i * step;
        if (t > hi + 1e-9 * step) {
            break;
        }
        ticks.push_back(t);
    }
    return ticks;
}

std::string colormap(double t) {
    // Coarse viridis samples, linearly interpolated.
    static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                                 {59, 82, 139},
                                                                 {33, 145, 140},
                                                                 {94, 201, 98},
                                                                 {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const double pos = t * (stops.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), stops.size() - 2);
    const double f = pos - static_cast<double>(i);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

std::string render(const Figure& fig) {
    const double title_h = fig.title.empty() ? 0.0 : 30.0;
    const double total_h = title_h + fig.panel_height * static_cast<double>(fig.panels.size());
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(fig.width)
      << "\" height=\"" << num(total_h) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!fig.title.empty()) {
        o << "<text x=\"" << num(fig.width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
          << "font-size=\"15\">" << escape(fig.title) << "</text>\n";
    }

    for (std::size_t pi = 0; pi < fig.panels.size(); ++pi) {
        const Panel& p = fig.panels[pi];
        const double y0 = title_h + fig.panel_height * static_cast<double>(pi);
        const double px0 = kLeft;
        const double px1 = fig.width - kRight;
        const double py0 = y0 + kTop;
        const double py1 = y0 + fig.panel_height - kBottom;
        const auto xr = p.x_range.value_or(data_range(p, true));
        const auto yr = p.y_range.value_or(data_range(p, false));
        const double xlo = xr.first;
        const double xhi = xr.second;
        double ylo = yr.first;
        double yhi = yr.second;
        if (!p.y_range) {
            const double pad = 0.05 * (yhi - ylo);
            ylo -= pad;
            yhi += pad;
        }
        auto sx = [&](double x) { return px0 + (x - xlo) / (xhi - xlo) * (px1 - px0); };
        auto sy = [&](double y) { return py1 - (y - ylo) / (yhi - ylo) * (py1 - py0); };

        o << "<g>\n";
        if (!p.title.empty()) {
            o << "<text x=\"" << num(0.5 * (px0 + px1)) << "\" y=\"" << num(py0 - 8)
              << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.title) << "</text>\n";
        }
        // Grid and ticks.
        const auto xt = nice_ticks(xlo, xhi);
        const auto yt = nice_ticks(ylo, yhi, 5);
        const double xstep = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
        const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
        for (double t : xt) {
            o << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(py0) << "\" x2=\"" << num(sx(t))
              << "\" y2=\"" << num(py1) << "\" stroke=\"#e5e5e5\"/>\n";
            o << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(py1 + 15)
              << "\" text-anchor=\"middle\">" << tick_label(t, xstep) << "</text>\n";
        }
        for (double t : yt) {
            o << "<line x1=\"" << num(px0) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(px1)
              << "\" y2=\"" << num(sy(t)) << "\" stroke=\"#e5e5e5\"/>\n";
            o << "<text x=\"" << num(px0 - 6) << "\" y=\"" << num(sy(t) + 4)
              << "\" text-anchor=\"end\">" << tick_label(t, ystep) << "</text>\n";
        }
        o << "<rect x=\"" << num(px0) << "\" y=\"" << num(py0) << "\" width=\"" << num(px1 - px0)
          << "\" height=\"" << num(py1 - py0) << "\" fill=\"none\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(0.5 * (px0 + px1)) << "\" y=\"" << num(py1 + 32)
          << "\" text-anchor=\"middle\">" << escape(p.x_label) << "</text>\n";
        o << "<text transform=\"translate(" << num(px0 - 50) << "," << num(0.5 * (py0 + py1))
          << ") rotate(-90)\" text-anchor=\"middle\">" << escape(p.y_label) << "</text>\n";

        o << "<clipPath id=\"clip" << pi << "\"><rect x=\"" << num(px0) << "\" y=\"" << num(py0)
          << "\" width=\"" << num(px1 - px0) << "\" height=\"" << num(py1 - py0)
          << "\"/></clipPath>\n";
        o << "<g clip-path=\"url(#clip" << pi << ")\">\n";
        for (const auto& h : p.hlines) {
            o << "<line x1=\"" << num(px0) << "\" y1=\"" << num(sy(h.y)) << "\" x2=\"" << num(px1)
              << "\" y2=\"" << num(sy(h.y)) << "\" stroke=\"" << h.color
              << "\" stroke-dasharray=\"5,4\"/>\n";
        }
        for (const auto& s : p.series) {
            const std::size_t n = std::min(s.x.size(), s.y.size());
            if (s.y_low.size() == n && s.y_high.size() == n) {
                for (std::size_t i = 0; i < n; ++i) {
                    o << "<line x1=\"" << num(sx(s.x[i])) << "\" y1=\"" << num(sy(s.y_low[i]))
                      << "\" x2=\"" << num(sx(s.x[i])) << "\" y2=\"" << num(sy(s.y_high[i]))
                      << "\" stroke=\"" << s.color << "\"/>\n";
                }
            }
            if (s.style == Style::kLine) {
                o << "<polyline fill=\"none\" stroke=\"" << s.color
                  << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < n; ++i) {
                    if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                        o << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
                    }
                }
                o << "\"/>\n";
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                        continue;
                    }
                    const std::string& c = s.point_colors.size() == n ? s.point_colors[i] : s.color;
                    o << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i]))
                      << "\" r=\"" << num(s.marker_radius) << "\" fill=\"" << c << "\"/>\n";
                }
            }
        }
        o << "</g>\n";

        // Legend.
        double ly = py0 + 12;
        for (const auto& s : p.series) {
            if (s.label.empty()) {
                continue;
            }
            o << "<rect x=\"" << num(px1 + 12) << "\" y=\"" << num(ly - 8)
              << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
            o << "<text x=\"" << num(px1 + 27) << "\" y=\"" << num(ly + 1) << "\">"
              << escape(s.label) << "</text>\n";
            ly += 16;
        }
        for (const auto& h : p.hlines) {
            if (h.label.empty()) {
                continue;
            }
            o << "<line x1=\"" << num(px1 + 12) << "\" y1=\"" << num(ly - 3) << "\" x2=\""
              << num(px1 + 22) << "\" y2=\"" << num(ly - 3) << "\" stroke=\"" << h.color
              << "\" stroke-dasharray=\"3,2\"/>\n";
            o << "<text x=\"" << num(px1 + 27) << "\" y=\"" << num(ly + 1) << "\">"
              << escape(h.label) << "</text>\n";
            ly += 16;
        }
        if (pi == 0 && fig.colorbar) {
            const auto& [label, range] = *fig.colorbar;
            const double bx = px1 + 12;
            const double by = ly + 10;
            const int steps = 20;
            for (int i = 0; i < steps; ++i) {
                o << "<rect x=\"" << num(bx) << "\" y=\"" << num(by + 6.0 * (steps - 1 - i))
                  << "\" width=\"12\" height=\"6\" fill=\"" << colormap((i + 0.5) / steps)
                  << "\"/>\n";
            }
            o << "<text x=\"" << num(bx + 16) << "\" y=\"" << num(by + 8) << "\">"
              << tick_label(range.second, 1.0) << "</text>\n";
            o << "<text x=\"" << num(bx + 16) << "\" y=\"" << num(by + 6.0 * steps) << "\">"
              << tick_label(range.first, 1.0) << "</text>\n";
            o << "<text x=\"" << num(bx) << "\" y=\"" << num(by + 6.0 * steps + 16) << "\">"
              << escape(label) << "</text>\n";
        }
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void save(const std::string& path, const Figure& fig) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << render(fig);
}

}  // namespace tiltwing::svg

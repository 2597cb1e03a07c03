#pragma once

// Minimal headless plotting: stacked x-y panels rendered straight to SVG.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tiltwing::svg {

enum class Style { kLine, kMarkers };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    Style style = Style::kLine;
    double marker_radius = 2.5;
    // Optional per-point colours (markers) and vertical range bars.
    std::vector<std::string> point_colors;
    std::vector<double> y_low;
    std::vector<double> y_high;
};

struct ReferenceLine {
    double y = 0.0;
    std::string label;
    std::string color = "#888888";
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<ReferenceLine> hlines;
    std::optional<std::pair<double, double>> x_range;
    std::optional<std::pair<double, double>> y_range;
};

struct Figure {
    std::string title;
    std::vector<Panel> panels;
    double width = 800.0;
    double panel_height = 260.0;
    // Colour bar legend for point_colors, e.g. {"chi [deg]", lo, hi}.
    std::optional<std::pair<std::string, std::pair<double, double>>> colorbar;
};

// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

// Perceptually ordered blue-to-yellow map, t in [0, 1].
std::string colormap(double t);

std::string render(const Figure& fig);
// Throws std::runtime_error when the file cannot be written.
void save(const std::string& path, const Figure& fig);

}  // namespace tiltwing::svg

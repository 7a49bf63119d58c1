#pragma once

// Minimal static SVG line charts for sweep results.

#include <optional>
#include <string>
#include <vector>

namespace desn {

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    /// Half-height of the error bar at each point; empty for none.
    std::vector<double> error;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 480;
};

/// Renders one polyline with markers per series, optional error bars, axes
/// with ticks, and a legend. Output is deterministic for equal input.
std::string line_chart_svg(const ChartSpec& spec, const std::vector<ChartSeries>& series);

}  // namespace desn

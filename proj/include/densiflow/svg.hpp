#pragma once

#include <string>
#include <vector>

namespace densiflow {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Log-scaled y axis; nonpositive samples are dropped.
    bool log_y = false;
};

/// Static line chart with axes, tick labels and a legend.
std::string render_svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

void write_svg_plot(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace densiflow

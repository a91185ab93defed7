#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dirsim {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

/// Minimal SVG line plot; CSV stays the canonical output, this is a quick look.
void write_svg_plot(const PlotSpec& spec, std::ostream& os);

}  // namespace dirsim

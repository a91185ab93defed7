#include "dirsim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dirsim {

namespace {

constexpr double kW = 640, kH = 440;
constexpr double kL = 70, kR = 150, kT = 40, kB = 50;  // margins (legend on the right)

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg_plot(const PlotSpec& spec, std::ostream& os) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = spec.log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;

    auto px = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR); };
    auto py = [&](double yv) {
        const double y = spec.log_y ? std::log10(std::max(yv, 1e-300)) : yv;
        return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
       << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\">" << spec.title << "</text>\n";

    // axes
    os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
       << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\""
       << kH - kB << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << kH - kB + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << fx << "</text>\n";
        os << "<text x=\"" << kL - 8 << "\" y=\""
           << kH - kB - (kH - kT - kB) * i / 4.0 + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << (spec.log_y ? "1e" + std::to_string(static_cast<int>(std::round(fy)))
                          : std::to_string(fy))
           << "</text>\n";
    }
    os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
       << spec.xlabel << "</text>\n"
       << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "transform=\"rotate(-90 16 " << (kT + kH - kB) / 2 << ")\">"
       << spec.ylabel << "</text>\n";

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        const char* color = kColors[si % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
               << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        const double ly = kT + 16.0 * si;
        os << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << ly + 6 << "\" x2=\""
           << kW - kR + 30 << "\" y2=\"" << ly + 6 << "\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n"
           << "<text x=\"" << kW - kR + 35 << "\" y=\"" << ly + 10
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace dirsim

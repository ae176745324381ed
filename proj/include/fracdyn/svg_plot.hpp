#pragma once

// Minimal SVG line chart: axes, two overlaid series and a legend.

#include <string>
#include <string_view>
#include <vector>

namespace fracdyn {

struct PlotSeries {
  std::string label;
  std::vector<double> values;  // plotted against their index
};

std::string overlay_svg(std::string_view title, const PlotSeries& first,
                        const PlotSeries& second);

}  // namespace fracdyn

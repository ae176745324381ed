#include "fracdyn/svg_plot.hpp"

#include <algorithm>
#include <cstdio>

namespace fracdyn {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 360.0;
constexpr double kMargin = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string overlay_svg(std::string_view title, const PlotSeries& first,
                        const PlotSeries& second) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  std::size_t count = 1;
  for (const PlotSeries* s : {&first, &second}) {
    count = std::max(count, s->values.size());
    for (double v : s->values) {
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto px = [&](std::size_t i) {
    return kMargin + (count > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(count - 1)
                                : plot_w / 2);
  };
  auto py = [&](double v) { return kMargin + plot_h * (hi - v) / (hi - lo); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"14\">" + escape(title) + "</text>\n";
  // Axes
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" +
         num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(kMargin + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(hi) +
         "</text>\n";
  svg += "<text x=\"" + num(kMargin - 4) + "\" y=\"" + num(kHeight - kMargin) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(lo) +
         "</text>\n";

  const char* colors[] = {"#1f77b4", "#d62728"};
  const PlotSeries* series[] = {&first, &second};
  for (int s = 0; s < 2; ++s) {
    const auto& values = series[s]->values;
    std::string points;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) points += ' ';
      points += num(px(i)) + "," + num(py(values[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colors[s]) +
           "\" stroke-width=\"1.5\"" + (s ? " stroke-dasharray=\"5,3\"" : "") +
           " points=\"" + points + "\"/>\n";
    const double ly = kMargin + 14.0 * s;
    svg += "<line x1=\"" + num(kWidth - kMargin - 110) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kMargin - 90) + "\" y2=\"" + num(ly) + "\" stroke=\"" + colors[s] +
           "\"/>\n";
    svg += "<text x=\"" + num(kWidth - kMargin - 86) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + escape(series[s]->label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace fracdyn

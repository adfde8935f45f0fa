#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "commands.hpp"
#include "tdisagg/error.hpp"

namespace tdcli {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 930.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 430.0;

std::string fixed(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

}  // namespace

std::string render_svg(const PlotSeries& series) {
  const std::size_t n = series.y_hat.size();
  if (n == 0) tdisagg::raise(tdisagg::ErrorCode::EmptyInput, "nothing to plot");

  double lo = series.y_hat[0], hi = series.y_hat[0];
  for (double v : series.y_hat) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& v : series.y_rows) {
    if (!v) continue;
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  auto sx = [&](double row) {
    return kLeft + (kRight - kLeft) * (n == 1 ? 0.5 : row / static_cast<double>(n - 1));
  };
  auto sy = [&](double v) { return kBottom - (kBottom - kTop) * (v - lo) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"480\" "
         "viewBox=\"0 0 960 480\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"480\" fill=\"#ffffff\"/>\n";

  // axes
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kBottom) << "\" x2=\""
      << fixed(kRight) << "\" y2=\"" << fixed(kBottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\""
      << fixed(kLeft) << "\" y2=\"" << fixed(kBottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = sy(v);
    svg << "<line x1=\"" << fixed(kLeft - 4) << "\" y1=\"" << fixed(y) << "\" x2=\""
        << fixed(kLeft) << "\" y2=\"" << fixed(y) << "\" stroke=\"#333333\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">" << fixed(v)
        << "</text>\n";
    const double row = static_cast<double>(n - 1) * t / 4.0;
    svg << "<text x=\"" << fixed(sx(row)) << "\" y=\"" << fixed(kBottom + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">"
        << static_cast<long long>(row) << "</text>\n";
  }

  // stepped low-frequency target: horizontal segment across each group
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t g = 0; g < series.group_start.size(); ++g) {
    const std::size_t start = series.group_start[g];
    const std::size_t end =
        (g + 1 < series.group_start.size()) ? series.group_start[g + 1] : n;
    if (start >= n || !series.y_rows[start]) continue;
    const double v = *series.y_rows[start];
    svg << fixed(sx(static_cast<double>(start))) << ',' << fixed(sy(v)) << ' ';
    svg << fixed(sx(static_cast<double>(end - 1))) << ',' << fixed(sy(v)) << ' ';
  }
  svg << "\"/>\n";

  // high-frequency prediction
  svg << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i)
    svg << fixed(sx(static_cast<double>(i))) << ',' << fixed(sy(series.y_hat[i])) << ' ';
  svg << "\"/>\n";

  // legend
  svg << "<line x1=\"740\" y1=\"20\" x2=\"770\" y2=\"20\" stroke=\"#1f77b4\" "
         "stroke-width=\"1.5\"/>\n";
  svg << "<text x=\"776\" y=\"24\" font-size=\"12\" fill=\"#333333\">y (low frequency)</text>\n";
  svg << "<line x1=\"740\" y1=\"38\" x2=\"770\" y2=\"38\" stroke=\"#d62728\" "
         "stroke-width=\"1.5\"/>\n";
  svg << "<text x=\"776\" y=\"42\" font-size=\"12\" fill=\"#333333\">y_hat</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tdcli

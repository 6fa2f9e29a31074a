#include "lwrnet/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lwrnet/errors.hpp"

namespace lwrnet {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series) {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  // A little headroom on the value axis, and keep 0 visible when close.
  if (ymin > 0.0 && ymin < 0.25 * ymax) ymin = 0.0;
  ymax += 0.05 * (ymax - ymin);

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kMarginTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
         "text-anchor=\"middle\">"
      << title << "</text>\n";

  // Axes with five ticks each.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int t = 0; t <= 4; ++t) {
    double fx = xmin + (xmax - xmin) * t / 4.0;
    double fy = ymin + (ymax - ymin) * t / 4.0;
    double gx = px(fx);
    double gy = py(fy);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << kMarginTop << "\" x2=\"" << num(gx)
        << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"#ddd\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << num(gy) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << num(gy) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\"" << kMarginTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << num(gy + 4)
        << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    double ly = kMarginTop + 14.0 + 16.0 * static_cast<double>(k);
    out << "<line x1=\"" << kMarginLeft + plot_w - 120 << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << kMarginLeft + plot_w - 100 << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w - 94 << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lwrnet

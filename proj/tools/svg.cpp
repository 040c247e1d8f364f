#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rankdyn/io.hpp"

namespace rankdyn::cli {

std::string line_chart(const std::string& title, const Eigen::VectorXd& x, const Eigen::MatrixXd& series) {
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double margin = 40.0;
  const double x0 = x.size() ? x.minCoeff() : 0.0;
  const double x1 = x.size() ? x.maxCoeff() : 1.0;
  double y0 = series.size() ? series.minCoeff() : 0.0;
  double y1 = series.size() ? series.maxCoeff() : 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const auto px = [&](double v) { return margin + (v - x0) / (x1 - x0) * (width - 2 * margin); };
  const auto py = [&](double v) { return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin); };
  const auto fmt = [](double v) { return io::format_double(std::round(v * 100.0) / 100.0); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 15 << "\" font-size=\"10\">" << fmt(x0)
      << "</text>\n";
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 15
      << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(x1) << "</text>\n";
  out << "<text x=\"2\" y=\"" << height - margin << "\" font-size=\"10\">" << fmt(y0) << "</text>\n";
  out << "<text x=\"2\" y=\"" << margin << "\" font-size=\"10\">" << fmt(y1) << "</text>\n";
  for (Eigen::Index r = 0; r < series.rows(); ++r) {
    const int hue = static_cast<int>((r * 137) % 360);
    out << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"hsl(" << hue << ",60%,45%)\" points=\"";
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!std::isfinite(series(r, k))) continue;
      out << fmt(px(x(k))) << ',' << fmt(py(series(r, k))) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace rankdyn::cli

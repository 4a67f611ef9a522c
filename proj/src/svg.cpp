#include "effscreen/svg.hpp"

#include <cmath>
#include <fstream>

#include "effscreen/csvutil.hpp"
#include "effscreen/errors.hpp"

namespace effscreen {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kLeft = 56;
constexpr int kRight = 600;
constexpr int kTop = 40;
constexpr int kBottom = 370;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_rate_chart(const std::string& path, const std::string& title,
                      const std::string& y_label, const std::vector<std::string>& x_labels,
                      const std::vector<ChartSeries>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open for writing: " + path);
  const std::size_t nx = x_labels.size();
  auto x_at = [&](std::size_t i) {
    if (nx <= 1) return (kLeft + kRight) / 2.0;
    return kLeft + (kRight - kLeft) * static_cast<double>(i) / (nx - 1);
  };
  auto y_at = [&](double v) { return kBottom - (kBottom - kTop) * v; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"22\" font-family=\"sans-serif\" "
         "font-size=\"15\" text-anchor=\"middle\">" << xml_escape(title) << "</text>\n";

  // Axes and grid.
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    const double y = y_at(v);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kRight << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
        << "</text>\n";
  }
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < nx; ++i) {
    out << "<text x=\"" << x_at(i) << "\" y=\"" << kBottom + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(x_labels[i])
        << "</text>\n";
  }
  out << "<text x=\"16\" y=\"" << (kTop + kBottom) / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 " << (kTop + kBottom) / 2 << ")\">" << xml_escape(y_label)
      << "</text>\n";

  // Series: polyline segments broken at gaps, plus point markers.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const ChartSeries& s = series[si];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
            << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < s.values.size() && i < nx; ++i) {
      if (std::isnan(s.values[i])) {
        flush();
        continue;
      }
      points += format_double(x_at(i)) + "," + format_double(y_at(s.values[i])) + " ";
      out << "<circle cx=\"" << format_double(x_at(i)) << "\" cy=\""
          << format_double(y_at(s.values[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    flush();
    const double ly = kTop + 16.0 * static_cast<double>(si);
    out << "<line x1=\"" << kRight - 120 << "\" y1=\"" << ly << "\" x2=\"" << kRight - 96
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kRight - 90 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace effscreen

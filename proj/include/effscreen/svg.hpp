#pragma once

#include <string>
#include <vector>

namespace effscreen {

// One polyline on a rate chart; NaN entries are gaps.
struct ChartSeries {
  std::string name;
  std::vector<double> values;
};

// Static SVG line chart for rates in [0,1]: x positions are the category
// indices (equally spaced, labeled with x_labels), one line per series.
void write_rate_chart(const std::string& path, const std::string& title,
                      const std::string& y_label, const std::vector<std::string>& x_labels,
                      const std::vector<ChartSeries>& series);

}  // namespace effscreen

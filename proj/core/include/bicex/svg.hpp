#pragma once

#include <string>
#include <vector>

namespace bicex {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line chart. The provenance string is embedded as a comment so every
/// rendering names the config that produced it.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           const std::string& provenance);

/// Static heatmap over row-major values; negative cells shade red, positive
/// cells shade blue, each cell annotated with its value.
std::string svg_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<double>& values, const std::string& provenance);

}  // namespace bicex

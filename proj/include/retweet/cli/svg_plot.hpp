#pragma once

#include <optional>
#include <string>
#include <vector>

namespace retweet::cli {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::optional<double>> values;  // one per x position; nullopt leaves a gap
};

struct ChartOptions {
  std::string title;
  std::string x_label = "tweet";
  std::string y_label = "retweets";
  int width = 960;
  int height = 480;
};

// Standalone SVG line chart with one marker per defined value. Markers carry
// class "point <series name>".
std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options);

}  // namespace retweet::cli

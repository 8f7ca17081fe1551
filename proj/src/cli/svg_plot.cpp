#include "retweet/cli/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace retweet::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  constexpr double left = 70, right = 160, top = 40, bottom = 50;
  const double plot_w = opt.width - left - right;
  const double plot_h = opt.height - top - bottom;

  std::size_t n = 0;
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (const auto& v : s.values) {
      if (!v) continue;
      lo = any ? std::min(lo, *v) : *v;
      hi = any ? std::max(hi, *v) : *v;
      any = true;
    }
  }
  lo = std::min(lo, 0.0);
  if (hi <= lo) hi = lo + 1.0;
  const double step = nice_step(hi - lo, 5);
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;

  auto x_of = [&](std::size_t i) {
    return left + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2);
  };
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(opt.title) << "</text>\n";

  svg << "<g class=\"grid\" stroke=\"#dddddd\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v = lo; v <= hi + step / 2; v += step) {
    const double y = y_of(v);
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w)
        << "\" y2=\"" << num(y) << "\"/>";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333333\">" << label(v) << "</text>\n";
  }
  const std::size_t x_step = std::max<std::size_t>(1, n / 10);
  for (std::size_t i = 0; i < n; i += x_step) {
    svg << "<text x=\"" << num(x_of(i)) << "\" y=\"" << num(top + plot_h + 16)
        << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333333\">" << i << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">"
      << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(top + plot_h) << "\"/>"
      << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
      << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\"/></g>\n";
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(opt.height - 10.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(opt.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16 " << num(top + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(opt.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const std::string name = xml_escape(sr.name);
    svg << "<g class=\"series " << name << "\">\n";
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < sr.values.size(); ++i) {
      if (!sr.values[i]) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L " : " M ") + num(x_of(i)) + ' ' + num(y_of(*sr.values[i]));
      pen_down = true;
    }
    if (!path.empty())
      svg << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << sr.color
          << "\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < sr.values.size(); ++i) {
      if (!sr.values[i]) continue;
      svg << "<circle class=\"point " << name << "\" cx=\"" << num(x_of(i)) << "\" cy=\""
          << num(y_of(*sr.values[i])) << "\" r=\"3\" fill=\"" << sr.color << "\"/>\n";
    }
    svg << "</g>\n";

    const double ly = top + 10 + 20.0 * static_cast<double>(s);
    svg << "<line x1=\"" << num(left + plot_w + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + plot_w + 35) << "\" y2=\"" << num(ly) << "\" stroke=\"" << sr.color
        << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << num(left + plot_w + 40) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace retweet::cli

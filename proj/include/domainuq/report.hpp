#pragma once

// Result files of an experiment run: CSV with a config header line and a
// self-contained log-log SVG plot.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/format.hpp"
#include "domainuq/harness.hpp"

namespace domainuq::harness {

inline std::string results_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "# config: " << r.metadata.dump() << '\n';
  os << "# fitted_rate: " << (r.fitted_rate ? format_double(*r.fitted_rate) : "none") << '\n';
  if (r.zero_reference) os << "# zero_reference: errors are absolute\n";
  os << r.axis_name << ",error";
  for (const auto& c : r.extra) os << ',' << c.name;
  os << '\n';
  for (std::size_t i = 0; i < r.axis_values.size(); ++i) {
    os << format_double(r.axis_values[i]) << ',' << format_double(r.errors[i]);
    for (const auto& c : r.extra) os << ',' << format_double(c.values[i]);
    os << '\n';
  }
  return os.str();
}

namespace detail {

struct LogAxis {
  double lo, hi;  // decades
  double px_lo, px_hi;
  double map(double v) const { return px_lo + (std::log10(v) - lo) / (hi - lo) * (px_hi - px_lo); }
};

inline LogAxis log_axis(const std::vector<double>& values, double px_lo, double px_hi) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (v > 0.0) {
      lo = std::min(lo, std::log10(v));
      hi = std::max(hi, std::log10(v));
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, px_lo, px_hi};
}

inline std::string px(double v) { return format_double(std::round(v * 100.0) / 100.0); }

}  // namespace detail

/// Log-log plot of error against the axis, with a reference slope line
/// through the first point and the fitted rate in the legend.
inline std::string results_svg(const ConvergenceReport& r) {
  constexpr double width = 640, height = 480, left = 80, right = 30, top = 40, bottom = 60;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    if (r.errors[i] > 0.0 && r.axis_values[i] > 0.0) {
      xs.push_back(r.axis_values[i]);
      ys.push_back(r.errors[i]);
    }
  }
  const double slope = r.expected_rate ? *r.expected_rate : (r.fitted_rate ? *r.fitted_rate : 0.0);
  const bool draw_reference = !xs.empty() && (r.expected_rate || r.fitted_rate);
  std::vector<double> y_range = ys;
  if (draw_reference) y_range.push_back(ys.front() * std::pow(xs.back() / xs.front(), -slope));
  const auto ax = detail::log_axis(xs, left, width - right);
  const auto ay = detail::log_axis(y_range, height - bottom, top);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << to_string(r.experiment)
     << "</text>\n";

  // frame, decade grid and labels
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
     << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(ax.lo); d <= static_cast<int>(ax.hi); ++d) {
    const double x = ax.map(std::pow(10.0, d));
    os << "<line x1=\"" << detail::px(x) << "\" y1=\"" << top << "\" x2=\"" << detail::px(x) << "\" y2=\""
       << height - bottom << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << detail::px(x) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">1e" << d
       << "</text>\n";
  }
  for (int d = static_cast<int>(ay.lo); d <= static_cast<int>(ay.hi); ++d) {
    const double y = ay.map(std::pow(10.0, d));
    os << "<line x1=\"" << left << "\" y1=\"" << detail::px(y) << "\" x2=\"" << width - right << "\" y2=\""
       << detail::px(y) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << detail::px(y + 4) << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
     << r.axis_name << "</text>\n";
  os << "<text x=\"20\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (top + height - bottom) / 2 << ")\">error</text>\n";

  if (draw_reference) {
    const double y_end = ys.front() * std::pow(xs.back() / xs.front(), -slope);
    os << "<line x1=\"" << detail::px(ax.map(xs.front())) << "\" y1=\"" << detail::px(ay.map(ys.front()))
       << "\" x2=\"" << detail::px(ax.map(xs.back())) << "\" y2=\"" << detail::px(ay.map(y_end))
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  if (!xs.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) os << ' ';
      os << detail::px(ax.map(xs[i])) << ',' << detail::px(ay.map(ys[i]));
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      os << "<circle cx=\"" << detail::px(ax.map(xs[i])) << "\" cy=\"" << detail::px(ay.map(ys[i]))
         << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    }
  }

  const double lx = width - right - 190;
  os << "<text x=\"" << lx << "\" y=\"" << top + 20 << "\" fill=\"#1f77b4\">fitted rate: "
     << (r.fitted_rate ? format_double(*r.fitted_rate, 4) : std::string("n/a")) << "</text>\n";
  if (draw_reference) {
    os << "<text x=\"" << lx << "\" y=\"" << top + 38 << "\" fill=\"gray\">reference slope: -"
       << format_double(slope, 4) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace domainuq::harness

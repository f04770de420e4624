#include "sgais_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgais/errors.hpp"

namespace sgais::cli {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 190;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - map(lo)) / (map(hi) - map(lo)); }
};

Axis make_axis(std::vector<double> values, std::optional<bool> log_request) {
  Axis a;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  a.lo = *mn;
  a.hi = *mx;
  const bool positive = a.lo > 0.0;
  a.log = log_request.value_or(positive && a.hi / a.lo >= 100.0) && positive;
  if (a.log) {
    a.lo = std::pow(10.0, std::floor(std::log10(a.lo)));
    a.hi = std::pow(10.0, std::ceil(std::log10(a.hi)));
    if (a.hi <= a.lo) a.hi = a.lo * 10.0;
  } else {
    if (a.hi == a.lo) {
      const double pad = a.lo == 0.0 ? 1.0 : std::abs(a.lo) * 0.05;
      a.lo -= pad;
      a.hi += pad;
    } else {
      const double pad = (a.hi - a.lo) * 0.05;
      a.lo -= pad;
      a.hi += pad;
    }
  }
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    for (double v = a.lo; v <= a.hi * 1.0000001; v *= 10.0) t.push_back(v);
    return t;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi; v += step) t.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return t;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string render_svg(const Chart& chart) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw UsageError("plot: series '" + s.label + "' has mismatched x/y");
    if (!s.lo.empty() && (s.lo.size() != s.x.size() || s.hi.size() != s.x.size())) {
      throw UsageError("plot: series '" + s.label + "' has a band of the wrong length");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
      if (!s.lo.empty()) {
        ys.push_back(s.lo[i]);
        ys.push_back(s.hi[i]);
      }
    }
  }
  if (xs.empty()) throw UsageError("plot: nothing to draw (no finite points)");
  const Axis ax = make_axis(xs, chart.log_x);
  const Axis ay = make_axis(ys, chart.log_y);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
  const auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(chart.title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    const double x = px(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(kTop) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
        << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 18) << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << (ax.log ? " (log)" : "") << "</text>\n";
  svg << "<text transform=\"translate(18," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(chart.y_label) << (ay.log ? " (log)" : "") << "</text>\n";

  std::size_t color = 0;
  for (const auto& s : chart.series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (usable(s.x[i], ax.log) && usable(s.y[i], ay.log)) idx.push_back(i);
    }
    if (idx.empty()) continue;
    if (!s.lo.empty() && idx.size() > 1) {
      svg << "<polygon fill=\"" << c << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i : idx) svg << num(px(s.x[i])) << ',' << num(py(s.hi[i])) << ' ';
      for (auto it = idx.rbegin(); it != idx.rend(); ++it) svg << num(px(s.x[*it])) << ',' << num(py(s.lo[*it])) << ' ';
      svg << "\"/>\n";
    }
    if (idx.size() == 1) {
      const std::size_t i = idx.front();
      svg << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"4\" fill=\"" << c
          << "\"/>\n";
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i : idx) svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
      svg << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(color - 1);
    svg << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(kLeft + pw + 32)
        << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << c << "\" stroke-width=\"3\"/>\n";
    svg << "<text x=\"" << num(kLeft + pw + 38) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::filesystem::path& path, const Chart& chart) {
  const std::string text = render_svg(chart);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

}  // namespace sgais::cli

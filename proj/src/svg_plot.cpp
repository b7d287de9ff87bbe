#include "sgdlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sgdlab {

namespace {

constexpr const char* kHeader = "step,f,grad_norm_sq,gamma_k,gamma_l,inner,alpha";

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (step, value), value > 0
};

Series read_series(const std::filesystem::path& path, const std::string& column) {
  std::size_t col;
  if (column == "f") {
    col = 1;
  } else if (column == "grad_norm_sq") {
    col = 2;
  } else {
    throw std::invalid_argument("plot: unknown column '" + column + "'");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("plot: cannot open " + path.string());
  Series s;
  s.label = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kHeader) {
        throw std::runtime_error(path.string() + ":1: unexpected CSV header '" + line +
                                 "'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma
                                                                     : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 7 fields, got " +
                               std::to_string(fields.size()));
    }
    try {
      const double step = std::stod(fields[0]);
      const double value = std::stod(fields[col]);
      if (value > 0.0 && std::isfinite(value)) s.points.emplace_back(step, value);
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": cannot parse numeric field");
    }
  }
  if (s.points.empty()) {
    throw std::runtime_error(path.string() +
                             ": no positive values to draw on a log axis");
  }
  return s;
}

}  // namespace

std::string render_plot(const std::vector<std::filesystem::path>& inputs,
                        const PlotOptions& opts) {
  if (inputs.empty()) throw std::invalid_argument("plot: no input files");
  std::vector<Series> series;
  series.reserve(inputs.size());
  for (const auto& p : inputs) series.push_back(read_series(p, opts.column));

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  double lo = std::log10(ymin), hi = std::log10(ymax);
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }

  const double W = 960, H = 600;
  const double ml = 80, mr = 180, mt = 48, mb = 56;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (hi - std::log10(y)) / (hi - lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    svg << "<text x=\"" << ml << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\">"
        << opts.title << "</text>\n";
  }

  // y grid at decades
  for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= static_cast<int>(std::floor(hi + 1e-9));
       ++e) {
    const double y = py(std::pow(10.0, e));
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << e
        << "</text>\n";
  }
  // x ticks: 6 evenly spaced
  for (int i = 0; i <= 5; ++i) {
    const double x = xmin + (xmax - xmin) * i / 5.0;
    svg << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
        << fmt(px(x)) << "\" y2=\"" << fmt(mt + ph + 5)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(mt + ph + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << fmt(x) << "</text>\n";
  }
  // axes
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
      << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
      << fmt(ml + pw) << "\" y2=\"" << fmt(mt + ph)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(H - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">step"
      << "</text>\n";
  svg << "<text x=\"20\" y=\"" << fmt(mt + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
      << fmt(mt + ph / 2) << ")\" text-anchor=\"middle\">" << opts.column << "</text>\n";

  // series
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points) {
      svg << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = mt + 16 + 20 * static_cast<double>(i);
    svg << "<line x1=\"" << fmt(ml + pw + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(ml + pw + 36) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(ml + pw + 42) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[i].label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<std::filesystem::path>& inputs,
               const std::filesystem::path& out_svg, const PlotOptions& opts) {
  const std::string svg = render_plot(inputs, opts);
  if (out_svg.has_parent_path()) std::filesystem::create_directories(out_svg.parent_path());
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw std::runtime_error("plot: cannot write " + out_svg.string());
  out << svg;
}

}  // namespace sgdlab

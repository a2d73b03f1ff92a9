#include "qlqg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "qlqg/errors.hpp"

namespace qlqg::svg {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 440;
constexpr int kMargin = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Blue -> white -> red map over [0, 1].
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(33 + u * (255 - 33));
    g = static_cast<int>(102 + u * (255 - 102));
    b = static_cast<int>(172 + u * (255 - 172));
  } else {
    const double u = (t - 0.5) / 0.5;
    r = static_cast<int>(255 - u * (255 - 178));
    g = static_cast<int>(255 - u * (255 - 24));
    b = static_cast<int>(255 - u * (255 - 43));
  }
  char buf[10];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series, bool log_y) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");

  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = std::numeric_limits<double>::max(), ymax = -ymin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      double y = s.ys[i];
      if (log_y) {
        if (y <= 0) continue;
        y = std::log10(y);
      }
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;

  auto px = [&](double x) {
    return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
  };
  auto py = [&](double y) {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  out << "<rect x='" << kMargin << "' y='" << kMargin << "' width='"
      << kWidth - 2 * kMargin << "' height='" << kHeight - 2 * kMargin
      << "' fill='none' stroke='#444'/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double fy = ymin + tick * (ymax - ymin) / 4;
    const double fx = xmin + tick * (xmax - xmin) / 4;
    out << "<text x='" << kMargin - 6 << "' y='" << py(fy) + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << (log_y ? "1e" + fmt(fy) : fmt(fy)) << "</text>\n";
    out << "<text x='" << px(fx) << "' y='" << kHeight - kMargin + 16
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << fmt(fx) << "</text>\n";
  }
  int color = 0;
  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='"
        << kPalette[color % (sizeof kPalette / sizeof *kPalette)]
        << "' stroke-width='1.4' points='";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      double y = s.ys[i];
      if (log_y) {
        if (y <= 0) continue;
        y = std::log10(y);
      }
      out << fmt(px(s.xs[i])) << "," << fmt(py(y)) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << kWidth - kMargin + 4 << "' y='"
        << kMargin + 16 * (color + 1)
        << "' font-family='sans-serif' font-size='11' fill='"
        << kPalette[color % (sizeof kPalette / sizeof *kPalette)] << "'>"
        << s.name << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::string& title, int rows,
                   int cols, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw dimension_error("heatmap: value count does not match rows x cols");
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path + " for writing");

  double vmin = std::numeric_limits<double>::max(), vmax = -vmin;
  for (double v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (vmax <= vmin) vmax = vmin + 1;

  // Cap the rendered resolution; cells are sampled, not averaged.
  const int max_cells = 240;
  const int rstep = std::max(1, rows / max_cells);
  const int cstep = std::max(1, cols / max_cells);
  const int rshow = (rows + rstep - 1) / rstep;
  const int cshow = (cols + cstep - 1) / cstep;
  const double cw = static_cast<double>(kWidth - 2 * kMargin) / cshow;
  const double ch = static_cast<double>(kHeight - 2 * kMargin) / rshow;

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  for (int r = 0; r < rshow; ++r) {
    for (int c = 0; c < cshow; ++c) {
      const double v =
          values[static_cast<std::size_t>(std::min(rows - 1, r * rstep)) * cols +
                 std::min(cols - 1, c * cstep)];
      out << "<rect x='" << fmt(kMargin + c * cw) << "' y='"
          << fmt(kHeight - kMargin - (r + 1) * ch) << "' width='" << fmt(cw + 0.5)
          << "' height='" << fmt(ch + 0.5) << "' fill='"
          << heat_color((v - vmin) / (vmax - vmin)) << "'/>\n";
    }
  }
  out << "<text x='" << kMargin << "' y='" << kHeight - kMargin + 28
      << "' font-family='sans-serif' font-size='11'>min " << fmt(vmin)
      << " / max " << fmt(vmax) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace qlqg::svg

#include "sgdstab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sgdstab/io_util.hpp"

namespace sgdstab {

namespace {

constexpr int kCellW = 34;
constexpr int kCellH = 22;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 230;
constexpr int kMarginBottom = 50;

const char* kColorDiverged = "#d0392e";
const char* kColorConverged = "#4878a8";
const char* kColorInconclusive = "#ffffff";

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt_px(double v) {
  // one decimal is plenty for pixel coordinates and keeps files small
  const double rounded = std::round(v * 10.0) / 10.0;
  return format_double(rounded);
}

double transform_x(double v, SvgStyle::XTransform t) {
  switch (t) {
    case SvgStyle::XTransform::kLog: return std::log(v);
    case SvgStyle::XTransform::kSquare: return v * v;
    default: return v;
  }
}

// Piecewise-linear map from axis value to pixel through the cell centers.
// Handles non-uniform grids; extrapolates with the edge segments.
class AxisMap {
 public:
  AxisMap(const std::vector<double>& ticks, double first_center_px,
          double step_px)
      : ticks_(ticks), first_px_(first_center_px), step_px_(step_px) {}

  double to_px(double value) const {
    const std::size_t m = ticks_.size();
    if (m == 1) return first_px_;
    std::size_t seg = 0;
    while (seg + 2 < m && value > ticks_[seg + 1]) ++seg;
    const double lo = ticks_[seg];
    const double hi = ticks_[seg + 1];
    const double frac = (value - lo) / (hi - lo);
    return first_px_ + (static_cast<double>(seg) + frac) * step_px_;
  }

 private:
  std::vector<double> ticks_;
  double first_px_;
  double step_px_;
};

double divergence_boundary(double x_value, double fixed, double lambda1,
                           int n) {
  // Solves lambda1 = (sigma/eta) * (n/B - 1)^{-1/2} for B. For the sigma
  // sweep x is sigma and `fixed` is eta; for the eta sweep the roles swap.
  const double ratio = x_value / (fixed * lambda1);
  return n / (1.0 + ratio * ratio);
}

double divergence_boundary_sigma_axis(double sigma, double eta, double lambda1,
                                      int n) {
  return divergence_boundary(sigma, eta, lambda1, n);
}

double divergence_boundary_eta_axis(double eta, double sigma, double lambda1,
                                    int n) {
  return divergence_boundary(sigma, eta, lambda1, n);
}

double stable_boundary(double sigma, double eta, double lambda1, int n) {
  // Solves lambda1 = (2 sigma / eta) / (sigma + n/B - 1) for B.
  const double denom = 2.0 * sigma / (eta * lambda1) - sigma + 1.0;
  if (!(denom > 0.0)) return std::nan("");
  return n / denom;
}

double stable_boundary_sigma_axis(double sigma, double eta, double lambda1,
                                  int n) {
  return stable_boundary(sigma, eta, lambda1, n);
}

double stable_boundary_eta_axis(double eta, double sigma, double lambda1,
                                int n) {
  return stable_boundary(sigma, eta, lambda1, n);
}

}  // namespace

std::string emit_svg_heatmap(const PhaseDiagramGrid& grid,
                             const SvgStyle& style) {
  const std::size_t nx = grid.x_values.size();
  const std::size_t ny = grid.y_values.size();
  const int margin_top = style.title.empty() ? 24 : 44;
  const int plot_w = static_cast<int>(nx) * kCellW;
  const int plot_h = static_cast<int>(ny) * kCellH;
  const int width = kMarginLeft + plot_w + kMarginRight;
  const int height = margin_top + plot_h + kMarginBottom;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  if (!style.title.empty()) {
    svg += "<text x=\"" + std::to_string(kMarginLeft + plot_w / 2) +
           "\" y=\"26\" font-family=\"sans-serif\" font-size=\"15\" "
           "text-anchor=\"middle\">" +
           xml_escape(style.title) + "</text>\n";
  }

  // Cells; y axis points up, so row iy = 0 is drawn at the bottom.
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const GridCell& cell = grid.at(ix, iy);
      const char* fill = kColorInconclusive;
      if (cell.verdict == Verdict::kDiverged) fill = kColorDiverged;
      if (cell.verdict == Verdict::kConverged) fill = kColorConverged;
      const int x = kMarginLeft + static_cast<int>(ix) * kCellW;
      const int y =
          margin_top + static_cast<int>(ny - 1 - iy) * kCellH;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(kCellW) + "\" height=\"" +
             std::to_string(kCellH) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  svg += "<rect x=\"" + std::to_string(kMarginLeft) + "\" y=\"" +
         std::to_string(margin_top) + "\" width=\"" + std::to_string(plot_w) +
         "\" height=\"" + std::to_string(plot_h) +
         "\" fill=\"none\" stroke=\"#222222\"/>\n";

  // Axis maps for the overlay curves.
  std::vector<double> x_ticks_transformed;
  x_ticks_transformed.reserve(nx);
  for (const double v : grid.x_values) {
    x_ticks_transformed.push_back(transform_x(v, style.x_transform));
  }
  const AxisMap x_map(x_ticks_transformed, kMarginLeft + kCellW / 2.0, kCellW);
  std::vector<double> y_ticks_reversed = grid.y_values;
  const AxisMap y_map_value(y_ticks_reversed,
                            margin_top + plot_h - kCellH / 2.0, -kCellH);

  // Axis tick labels.
  const std::size_t x_stride = nx > 16 ? (nx + 15) / 16 : 1;
  for (std::size_t ix = 0; ix < nx; ix += x_stride) {
    const double cx = kMarginLeft + (ix + 0.5) * kCellW;
    svg += "<text x=\"" + fmt_px(cx) + "\" y=\"" +
           std::to_string(margin_top + plot_h + 16) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           xml_escape(format_double(grid.x_values[ix])) + "</text>\n";
  }
  const std::size_t y_stride = ny > 14 ? (ny + 13) / 14 : 1;
  for (std::size_t iy = 0; iy < ny; iy += y_stride) {
    const double cy = margin_top + (ny - 1 - iy + 0.5) * kCellH;
    svg += "<text x=\"" + std::to_string(kMarginLeft - 8) + "\" y=\"" +
           fmt_px(cy + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">" +
           xml_escape(format_double(grid.y_values[iy])) + "</text>\n";
  }
  std::string x_label = grid.x_name;
  if (style.x_transform == SvgStyle::XTransform::kLog) x_label += " (log scale)";
  if (style.x_transform == SvgStyle::XTransform::kSquare) {
    x_label += " (squared scale)";
  }
  svg += "<text x=\"" + std::to_string(kMarginLeft + plot_w / 2) + "\" y=\"" +
         std::to_string(margin_top + plot_h + 38) +
         "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">" +
         xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + std::to_string(margin_top + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         std::to_string(margin_top + plot_h / 2) + ")\">" +
         xml_escape(grid.y_name) + "</text>\n";

  // Theory boundary overlays, sampled from the closed-form equality curves.
  const bool sigma_axis = grid.x_name == "sigma";
  double fixed_other = 0.0;
  for (const auto& [name, value] : grid.fixed_params) {
    if (sigma_axis && name == "eta") fixed_other = value;
    if (!sigma_axis && name == "sigma") fixed_other = value;
  }
  const double lambda1 = grid.cells.empty() ? 0.0 : grid.cells[0].lambda1_h;

  struct Overlay {
    double (*fn)(double, double, double, int);
    bool dashed;
  };
  const Overlay overlays[2] = {
      {sigma_axis ? divergence_boundary_sigma_axis : divergence_boundary_eta_axis,
       false},
      {sigma_axis ? stable_boundary_sigma_axis : stable_boundary_eta_axis,
       true}};

  if (lambda1 > 0.0 && fixed_other > 0.0 && nx > 1) {
    const double t_lo = x_ticks_transformed.front();
    const double t_hi = x_ticks_transformed.back();
    const double y_top = margin_top;
    const double y_bot = margin_top + plot_h;
    for (const Overlay& overlay : overlays) {
      std::vector<std::string> segments;
      std::string current;
      int points_in_current = 0;
      const int samples = 400;
      for (int s = 0; s <= samples; ++s) {
        const double t = t_lo + (t_hi - t_lo) * s / samples;
        double x_value = t;
        if (style.x_transform == SvgStyle::XTransform::kLog) {
          x_value = std::exp(t);
        } else if (style.x_transform == SvgStyle::XTransform::kSquare) {
          x_value = std::sqrt(t);
        }
        const double b = overlay.fn(x_value, fixed_other, lambda1, grid.n);
        bool ok = std::isfinite(b) && b > 0.0;
        double py = 0.0;
        if (ok) {
          py = y_map_value.to_px(b);
          ok = py >= y_top - kCellH && py <= y_bot + kCellH;
        }
        if (ok) {
          const double clipped = std::clamp(py, y_top, y_bot);
          current += fmt_px(x_map.to_px(t)) + "," + fmt_px(clipped) + " ";
          ++points_in_current;
        } else if (points_in_current > 0) {
          if (points_in_current > 1) segments.push_back(current);
          current.clear();
          points_in_current = 0;
        }
      }
      if (points_in_current > 1) segments.push_back(current);
      for (const std::string& points : segments) {
        svg += "<polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"";
        if (overlay.dashed) svg += " stroke-dasharray=\"7 5\"";
        svg += " points=\"" + points + "\"/>\n";
      }
    }
  }

  // Legend.
  const int lx = kMarginLeft + plot_w + 18;
  int ly = margin_top + 6;
  auto swatch = [&](const char* color, const std::string& label) {
    svg += "<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(ly) +
           "\" width=\"14\" height=\"14\" fill=\"" + std::string(color) +
           "\" stroke=\"#222222\"/>\n";
    svg += "<text x=\"" + std::to_string(lx + 20) + "\" y=\"" +
           std::to_string(ly + 12) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(label) + "</text>\n";
    ly += 20;
  };
  swatch(kColorDiverged, "Diverged");
  swatch(kColorConverged, "Converged");
  swatch(kColorInconclusive, "Inconclusive");
  ly += 6;
  auto line_sample = [&](bool dashed, const std::string& label) {
    svg += "<line x1=\"" + std::to_string(lx) + "\" y1=\"" +
           std::to_string(ly + 7) + "\" x2=\"" + std::to_string(lx + 14) +
           "\" y2=\"" + std::to_string(ly + 7) +
           "\" stroke=\"#000000\" stroke-width=\"2\"" +
           (dashed ? std::string(" stroke-dasharray=\"5 4\"") : std::string()) +
           "/>\n";
    svg += "<text x=\"" + std::to_string(lx + 20) + "\" y=\"" +
           std::to_string(ly + 12) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(label) + "</text>\n";
    ly += 20;
  };
  line_sample(false, "divergence certificate = equality");
  line_sample(true, "stability bound = equality");
  ly += 6;
  auto text_line = [&](const std::string& label) {
    svg += "<text x=\"" + std::to_string(lx) + "\" y=\"" +
           std::to_string(ly + 11) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(label) + "</text>\n";
    ly += 18;
  };
  for (const auto& [name, value] : grid.fixed_params) {
    text_line(name + " = " + format_double(value));
  }
  text_line("reps = " + std::to_string(grid.reps));
  text_line("seed = " + std::to_string(grid.seed));

  svg += "</svg>\n";
  return svg;
}

}  // namespace sgdstab

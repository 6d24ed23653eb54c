#pragma once

#include <string>

#include "sgdstab/phase_diagram.hpp"

namespace sgdstab {

struct SvgStyle {
  // Placement of x positions: by value, by log(value), or by value^2 (the
  // squared scale exposes the linear boundary in the (eta^2, B) plane).
  enum class XTransform { kLinear, kLog, kSquare };
  XTransform x_transform = XTransform::kLinear;
  std::string title;
};

/// Self-contained SVG heatmap: cells colored by verdict (red Diverged, blue
/// Converged, white Inconclusive), a solid polyline where the divergence
/// certificate attains equality, a dashed polyline where the stable-sharpness
/// bound attains equality, axis labels, and a legend of fixed parameters.
std::string emit_svg_heatmap(const PhaseDiagramGrid& grid,
                             const SvgStyle& style = {});

}  // namespace sgdstab

#pragma once

#include "cyclic/dynamics.hpp"
#include "cyclic/mechanical_system.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cyclic {

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotSet {
  std::vector<std::filesystem::path> files;
  /// Start and end markers of the cyclic-plane plot, in SVG pixel coordinates.
  std::optional<PixelPoint> plane_start;
  std::optional<PixelPoint> plane_end;
};

/// Writes SVG figures into `dir`:
///   <prefix><A>_time.svg   actuated coordinates against time
///   <prefix><C>_time.svg   cyclic coordinates against time
///   <prefix>joints_time.svg  stacked panels, actuated first then cyclic
///   <prefix><C>_plane.svg  x^1 against x^2 with start/end markers (r == 2 only)
/// where A/C are "theta"/"xy" for the planar pendulum and "actuated"/"cyclic" otherwise.
/// Throws std::runtime_error if a file cannot be written.
PlotSet emit_plots(const MechanicalSystem& system, const Trajectory& trajectory,
                   const std::filesystem::path& dir, const std::string& prefix = "");

}  // namespace cyclic

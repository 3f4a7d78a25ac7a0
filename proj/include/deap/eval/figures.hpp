#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deap/core/grid.hpp"
#include "deap/eval/compare.hpp"
#include "deap/phase/isochrone.hpp"

namespace deap::eval {

/// Colour for v in [0, 1] on a perceptually ordered blue-green-yellow ramp.
std::string ramp_color(double v);

/// Learned vs baseline pvi-SSIM per episode, with the identity line.
std::string scatter_svg(const ComparisonReport& report);

/// Kernel-density outlines with quartile boxes for both SSIM columns.
std::string violin_svg(const ComparisonReport& report);

/// Cell map scaled to [lo, hi]; NaN cells are grey.
std::string heatmap_svg(const Map2D& map, double lo, double hi, const std::string& title, int cell_px = 8);

/// Contour bands coloured by band index over the window.
std::string isochrone_svg(const phase::IsochroneMap& iso, const std::string& title, int cell_px = 8);

/// Row of frames with captions, each scaled to [0, 1].
std::string frame_strip_svg(const std::vector<Map2D>& frames, const std::vector<std::string>& captions,
                            int cell_px = 4);

/// 8-bit binary greymap of a map scaled to [lo, hi]; NaN is written as 0.
void write_pgm(const std::filesystem::path& path, const Map2D& map, double lo, double hi);

}  // namespace deap::eval

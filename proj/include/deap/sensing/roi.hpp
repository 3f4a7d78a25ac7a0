#pragma once

#include "deap/core/grid.hpp"
#include "deap/sensing/array.hpp"

namespace deap::sensing {

inline constexpr int kRoiSize = 32;
inline constexpr double kRoiPad = 0.10;

/// Square analysis window over the catheter: the footprint bounding square
/// (side 2 * max radius) enlarged by `pad`, sampled G x G in the array-local
/// frame and carried into the tissue by the array pose.
struct Roi {
    GridGeometry local;
    Pose pose;

    Vec2 tissue_point(int r, int c) const { return pose.apply(local.cell_center(r, c)); }
};

Roi make_roi(const ElectrodeArray& array, int size = kRoiSize, double pad = kRoiPad);

/// Bilinear sample of one tissue-grid frame at a tissue-frame point; the grid
/// edge is clamped.
double sample_bilinear(std::span<const float> frame, const GridGeometry& grid, Vec2 p);

/// Resamples every frame of a tissue movie onto the ROI grid.
Movie resample_to_roi(const Movie& tissue_movie, const Roi& roi);

/// Maps ROI frames back onto a tissue grid inside `mask`; other cells are NaN.
Movie roi_to_tissue(const Movie& roi_movie, const Roi& roi, const GridGeometry& tissue, const Mask& mask);

/// Footprint disc expressed on the ROI grid (array-local frame).
Mask roi_footprint_mask(const Roi& roi, const ElectrodeArray& array);

}  // namespace deap::sensing

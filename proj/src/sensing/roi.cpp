#include "deap/sensing/roi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deap/core/parallel.hpp"

namespace deap::sensing {

Roi make_roi(const ElectrodeArray& array, int size, double pad) {
    const double side = 2.0 * array.max_radius_mm() * (1.0 + pad);
    return {GridGeometry::centered(size, size, side / size), array.pose};
}

double sample_bilinear(std::span<const float> frame, const GridGeometry& grid, Vec2 p) {
    const GridIndex g = grid.to_index(p);
    const double row = std::clamp(g.row, 0.0, static_cast<double>(grid.rows - 1));
    const double col = std::clamp(g.col, 0.0, static_cast<double>(grid.cols - 1));
    const int r0 = std::min(static_cast<int>(row), grid.rows - 2);
    const int c0 = std::min(static_cast<int>(col), grid.cols - 2);
    const double fr = row - r0, fc = col - c0;
    const double v00 = frame[grid.index(r0, c0)], v01 = frame[grid.index(r0, c0 + 1)];
    const double v10 = frame[grid.index(r0 + 1, c0)], v11 = frame[grid.index(r0 + 1, c0 + 1)];
    return (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11);
}

Movie resample_to_roi(const Movie& tissue_movie, const Roi& roi) {
    Movie out(roi.local, tissue_movie.n_frames, tissue_movie.dt_ms);
    std::vector<Vec2> pts;
    for (int r = 0; r < roi.local.rows; ++r)
        for (int c = 0; c < roi.local.cols; ++c) pts.push_back(roi.tissue_point(r, c));
    parallel_for(static_cast<std::size_t>(tissue_movie.n_frames), [&](std::size_t t) {
        const auto src = tissue_movie.frame(static_cast<int>(t));
        auto dst = out.frame(static_cast<int>(t));
        for (std::size_t i = 0; i < pts.size(); ++i)
            dst[i] = static_cast<float>(sample_bilinear(src, tissue_movie.geom, pts[i]));
    });
    return out;
}

Movie roi_to_tissue(const Movie& roi_movie, const Roi& roi, const GridGeometry& tissue, const Mask& mask) {
    Movie out(tissue, roi_movie.n_frames, roi_movie.dt_ms, std::numeric_limits<float>::quiet_NaN());
    std::vector<std::pair<std::size_t, Vec2>> targets;
    for (int r = 0; r < tissue.rows; ++r)
        for (int c = 0; c < tissue.cols; ++c)
            if (mask.at(r, c)) targets.emplace_back(tissue.index(r, c), roi.pose.invert(tissue.cell_center(r, c)));
    parallel_for(static_cast<std::size_t>(roi_movie.n_frames), [&](std::size_t t) {
        const auto src = roi_movie.frame(static_cast<int>(t));
        auto dst = out.frame(static_cast<int>(t));
        for (const auto& [idx, local] : targets) dst[idx] = static_cast<float>(sample_bilinear(src, roi.local, local));
    });
    return out;
}

Mask roi_footprint_mask(const Roi& roi, const ElectrodeArray& array) {
    return footprint_mask(roi.local, Footprint{{0.0, 0.0}, array.max_radius_mm() + kFootprintMarginMm});
}

}  // namespace deap::sensing

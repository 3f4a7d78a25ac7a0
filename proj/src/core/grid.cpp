#include "deap/core/grid.hpp"

#include <cmath>
#include <algorithm>

namespace deap {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

GridGeometry GridGeometry::centered(int rows, int cols, double pitch_mm) {
    GridGeometry g;
    g.rows = rows;
    g.cols = cols;
    g.pitch_mm = pitch_mm;
    g.x0_mm = -0.5 * (cols - 1) * pitch_mm;
    g.y0_mm = -0.5 * (rows - 1) * pitch_mm;
    return g;
}

Vec2 GridGeometry::cell_center(int r, int c) const {
    return {x0_mm + c * pitch_mm, y0_mm + r * pitch_mm};
}

GridIndex GridGeometry::to_index(Vec2 p) const {
    return {(p.y - y0_mm) / pitch_mm, (p.x - x0_mm) / pitch_mm};
}

Vec2 GridGeometry::to_mm(GridIndex g) const {
    return {x0_mm + g.col * pitch_mm, y0_mm + g.row * pitch_mm};
}

Mask::Mask(int rows_, int cols_, bool value)
    : rows(rows_), cols(cols_), on(static_cast<std::size_t>(rows_) * cols_, value ? 1 : 0) {}

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(on.begin(), on.end(), std::uint8_t{1}));
}

Mask mask_and(const Mask& a, const Mask& b) {
    Mask m(a.rows, a.cols, false);
    for (std::size_t i = 0; i < m.on.size(); ++i) m.on[i] = (a.on[i] && b.on[i]) ? 1 : 0;
    return m;
}

Mask Map2D::defined() const {
    Mask m(geom.rows, geom.cols, false);
    for (std::size_t i = 0; i < v.size(); ++i) m.on[i] = std::isfinite(v[i]) ? 1 : 0;
    return m;
}

std::vector<double> Movie::trace(std::size_t cell) const {
    std::vector<double> out(static_cast<std::size_t>(n_frames));
    const std::size_t stride = cells();
    for (int t = 0; t < n_frames; ++t) out[t] = data[stride * t + cell];
    return out;
}

}  // namespace deap

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace deap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);

/// Continuous (row, col) index into a grid.
struct GridIndex {
    double row = 0.0;
    double col = 0.0;
};

/// Regular square-cell grid placed in the tissue frame (mm).
///
/// Cell (r, c) has its centre at (x0 + c*pitch, y0 + r*pitch); x runs along
/// columns and y along rows.
struct GridGeometry {
    int rows = 0;
    int cols = 0;
    double pitch_mm = 1.0;
    double x0_mm = 0.0;
    double y0_mm = 0.0;

    /// Grid whose geometric centre sits at the tissue-frame origin.
    static GridGeometry centered(int rows, int cols, double pitch_mm);

    std::size_t cells() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
    Vec2 cell_center(int r, int c) const;
    GridIndex to_index(Vec2 p) const;
    Vec2 to_mm(GridIndex g) const;
    bool same_shape(const GridGeometry& o) const { return rows == o.rows && cols == o.cols; }
};

/// Per-cell boolean mask, row-major.
struct Mask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> on;

    Mask() = default;
    Mask(int rows_, int cols_, bool value);
    bool at(int r, int c) const { return on[static_cast<std::size_t>(r) * cols + c] != 0; }
    void set(int r, int c, bool v) { on[static_cast<std::size_t>(r) * cols + c] = v ? 1 : 0; }
    std::size_t count() const;
};

Mask mask_and(const Mask& a, const Mask& b);

/// Scalar field on a grid; NaN marks undefined cells.
struct Map2D {
    GridGeometry geom;
    std::vector<double> v;

    Map2D() = default;
    explicit Map2D(const GridGeometry& g, double fill = 0.0) : geom(g), v(g.cells(), fill) {}
    double& at(int r, int c) { return v[geom.index(r, c)]; }
    double at(int r, int c) const { return v[geom.index(r, c)]; }
    /// Cells with a finite value.
    Mask defined() const;
};

/// A stack of frames sampled every dt_ms. Used for Vm, phase and elapsed-time
/// movies alike. Storage is frame-major, row-major within a frame.
struct Movie {
    GridGeometry geom;
    int n_frames = 0;
    double dt_ms = 1.0;
    std::vector<float> data;

    Movie() = default;
    Movie(const GridGeometry& g, int frames, double dt = 1.0, float fill = 0.0f)
        : geom(g), n_frames(frames), dt_ms(dt), data(g.cells() * static_cast<std::size_t>(frames), fill) {}

    std::size_t cells() const { return geom.cells(); }
    std::span<const float> frame(int t) const { return {data.data() + cells() * t, cells()}; }
    std::span<float> frame(int t) { return {data.data() + cells() * t, cells()}; }
    float at(int t, int r, int c) const { return data[cells() * t + geom.index(r, c)]; }
    float& at(int t, int r, int c) { return data[cells() * t + geom.index(r, c)]; }

    /// Time course of one cell, widened to double.
    std::vector<double> trace(std::size_t cell) const;
};

}  // namespace deap

#pragma once

#include <span>
#include <vector>

#include "deap/core/grid.hpp"

namespace deap::phase {

/// Frames at each end of a phase movie whose Hilbert phase is unreliable.
inline constexpr double kEdgeInvalidMs = 50.0;
inline constexpr double kMinPhaseDurationMs = 512.0;

/// Per-cell instantaneous phase in (-pi, pi], kept in double so that phase
/// arithmetic is exact to rounding.
struct PhaseMovie {
    GridGeometry geom;
    int n_frames = 0;
    double dt_ms = 1.0;
    std::vector<double> theta;
    Mask mask;
    int valid_begin = 0;  ///< first frame outside the leading edge band
    int valid_end = 0;    ///< one past the last frame outside the trailing band

    std::size_t cells() const { return geom.cells(); }
    double at(int t, int r, int c) const { return theta[cells() * t + geom.index(r, c)]; }
    double& at(int t, int r, int c) { return theta[cells() * t + geom.index(r, c)]; }
    std::span<const double> frame(int t) const { return {theta.data() + cells() * t, cells()}; }
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Imaginary part of the analytic signal of x, computed by FFT. The input is
/// used as given (no mean removal).
std::vector<double> hilbert_transform(std::span<const double> x);

/// atan2(H[x - mean], x - mean) for a single trace.
std::vector<double> analytic_phase(std::span<const double> x);

/// Phase movie of every cell in `mask` whose trace is finite and non-constant;
/// other cells are dropped from the output mask. Requires >= 512 ms of frames.
PhaseMovie compute_phase(const Movie& vm, const Mask& mask);
PhaseMovie compute_phase(const Movie& vm);

}  // namespace deap::phase

#pragma once

#include "deap/core/grid.hpp"

namespace deap::phase {

inline constexpr double kIsochroneThreshold = 0.5;
inline constexpr double kMinIsochroneWindowMs = 50.0;

/// First upward threshold crossing per cell inside [t0, t1], in ms from the
/// movie start, and the contour band index floor((t - t0) / step).
struct IsochroneMap {
    Map2D activation_ms;
    Map2D band;
    double t0_ms = 0.0;
    double t1_ms = 0.0;
    double step_ms = 10.0;
    double threshold = kIsochroneThreshold;
};

IsochroneMap isochronal_map(const Movie& vm, double t0_ms, double t1_ms, double step_ms = 10.0);
IsochroneMap isochronal_map(const Movie& vm, const Mask& mask, double t0_ms, double t1_ms,
                            double step_ms = 10.0);

}  // namespace deap::phase

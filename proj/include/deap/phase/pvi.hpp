#pragma once

#include <span>
#include <vector>

#include "deap/phase/phase.hpp"

namespace deap::phase {

struct CellOffset {
    int dr = 0;
    int dc = 0;
};

/// Integer offsets with dr^2 + dc^2 <= radius^2 (29 cells for radius 3).
std::vector<CellOffset> disc_offsets(int radius_cells);

/// 1 - |mean(exp(i*theta))|.
double circular_variance(std::span<const double> angles);

struct PviOptions {
    int radius_cells = 3;
    /// Frame window [begin, end); negative values select the valid span.
    int window_begin = -1;
    int window_end = -1;
};

/// Time-averaged local circular variance of phase. Undefined cells are NaN.
struct PviMap {
    Map2D values;
    int radius_cells = 3;
    int window_begin = 0;
    int window_end = 0;

    Mask mask() const { return values.defined(); }
};

PviMap phase_variance_index(const PhaseMovie& phase, const PviOptions& options = {});

}  // namespace deap::phase

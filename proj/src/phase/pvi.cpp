#include "deap/phase/pvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deap/core/error.hpp"
#include "deap/core/parallel.hpp"

namespace deap::phase {

std::vector<CellOffset> disc_offsets(int radius_cells) {
    std::vector<CellOffset> out;
    const int r2 = radius_cells * radius_cells;
    for (int dr = -radius_cells; dr <= radius_cells; ++dr)
        for (int dc = -radius_cells; dc <= radius_cells; ++dc)
            if (dr * dr + dc * dc <= r2) out.push_back({dr, dc});
    return out;
}

double circular_variance(std::span<const double> angles) {
    if (angles.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0, c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    const double n = static_cast<double>(angles.size());
    return 1.0 - std::hypot(c / n, s / n);
}

PviMap phase_variance_index(const PhaseMovie& phase, const PviOptions& options) {
    require(options.radius_cells >= 1, "phase_variance_index: radius must be >= 1 cell");
    int begin = options.window_begin < 0 ? phase.valid_begin : options.window_begin;
    int end = options.window_end < 0 ? phase.valid_end : options.window_end;
    require(begin >= 0 && end <= phase.n_frames && begin < end,
            "phase_variance_index: empty or out-of-range window");

    const auto& g = phase.geom;
    const std::size_t cells = g.cells();
    const int frames = end - begin;

    // Unit phasors for the window, reused by every neighbourhood.
    std::vector<double> cs(cells * frames), sn(cells * frames);
    parallel_for(static_cast<std::size_t>(frames), [&](std::size_t f) {
        const auto th = phase.frame(begin + static_cast<int>(f));
        for (std::size_t i = 0; i < cells; ++i) {
            cs[f * cells + i] = std::cos(th[i]);
            sn[f * cells + i] = std::sin(th[i]);
        }
    });

    const auto offsets = disc_offsets(options.radius_cells);
    PviMap out;
    out.values = Map2D(g, std::numeric_limits<double>::quiet_NaN());
    out.radius_cells = options.radius_cells;
    out.window_begin = begin;
    out.window_end = end;

    parallel_for(cells, [&](std::size_t cell) {
        if (!phase.mask.on[cell]) return;
        const int r = static_cast<int>(cell) / g.cols;
        const int c = static_cast<int>(cell) % g.cols;
        std::vector<std::size_t> nbrs;
        nbrs.reserve(offsets.size());
        for (const auto& o : offsets) {
            const int rr = r + o.dr, cc = c + o.dc;
            if (rr < 0 || rr >= g.rows || cc < 0 || cc >= g.cols) continue;
            if (!phase.mask.at(rr, cc)) continue;
            nbrs.push_back(g.index(rr, cc));
        }
        if (nbrs.empty()) return;
        const double inv_n = 1.0 / static_cast<double>(nbrs.size());
        double acc = 0.0;
        for (int f = 0; f < frames; ++f) {
            const double* cf = cs.data() + static_cast<std::size_t>(f) * cells;
            const double* sf = sn.data() + static_cast<std::size_t>(f) * cells;
            double sc = 0.0, ss = 0.0;
            for (std::size_t q : nbrs) {
                sc += cf[q];
                ss += sf[q];
            }
            acc += 1.0 - std::hypot(sc * inv_n, ss * inv_n);
        }
        out.values.v[cell] = std::clamp(acc / frames, 0.0, 1.0);
    });
    return out;
}

}  // namespace deap::phase

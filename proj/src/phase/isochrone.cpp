#include "deap/phase/isochrone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deap/core/error.hpp"

namespace deap::phase {

IsochroneMap isochronal_map(const Movie& vm, double t0_ms, double t1_ms, double step_ms) {
    return isochronal_map(vm, Mask(vm.geom.rows, vm.geom.cols, true), t0_ms, t1_ms, step_ms);
}

IsochroneMap isochronal_map(const Movie& vm, const Mask& mask, double t0_ms, double t1_ms, double step_ms) {
    if (t1_ms - t0_ms < kMinIsochroneWindowMs)
        throw PreconditionError("isochronal_map: window shorter than 50 ms");
    require(step_ms > 0.0, "isochronal_map: step must be positive");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    IsochroneMap out;
    out.activation_ms = Map2D(vm.geom, nan);
    out.band = Map2D(vm.geom, nan);
    out.t0_ms = t0_ms;
    out.t1_ms = t1_ms;
    out.step_ms = step_ms;

    const int f0 = std::max(0, static_cast<int>(std::ceil(t0_ms / vm.dt_ms)));
    const int f1 = std::min(vm.n_frames - 1, static_cast<int>(std::floor(t1_ms / vm.dt_ms)));
    const std::size_t cells = vm.cells();
    const double thr = out.threshold;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (!mask.on[cell]) continue;
        for (int f = f0 + 1; f <= f1; ++f) {
            const double prev = vm.data[cells * (f - 1) + cell];
            const double cur = vm.data[cells * f + cell];
            if (prev < thr && cur >= thr) {
                const double frac = (thr - prev) / (cur - prev);
                const double t = (f - 1 + frac) * vm.dt_ms;
                out.activation_ms.v[cell] = t;
                out.band.v[cell] = std::floor((t - t0_ms) / step_ms);
                break;
            }
        }
    }
    return out;
}

}  // namespace deap::phase

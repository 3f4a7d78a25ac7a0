#include "deap/phase/cycle_length.hpp"

#include <algorithm>
#include <cmath>

#include "deap/core/error.hpp"

namespace deap::phase {

std::string to_string(RhythmClass c) {
    switch (c) {
        case RhythmClass::Fibrillation: return "fibrillation";
        case RhythmClass::Tachycardia: return "tachycardia";
        case RhythmClass::Unclassifiable: return "unclassifiable";
    }
    return "unclassifiable";
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
    const std::size_t n = series.size();
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = series[i] - mean;
        energy += x[i] * x[i];
    }
    if (!(energy > 1e-24 * static_cast<double>(n))) return {};
    std::vector<double> r(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) s += x[i] * x[i + k];
        r[k] = s / energy;
    }
    return r;
}

CycleLengthResult cycle_length_filter(const Movie& vm) {
    require(vm.n_frames * vm.dt_ms >= kMinCycleDurationMs, "cycle_length_filter: need at least 1 s of frames");
    const std::size_t cells = vm.cells();
    std::vector<double> mean(static_cast<std::size_t>(vm.n_frames), 0.0);
    for (int t = 0; t < vm.n_frames; ++t) {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < cells; ++i) {
            const double v = vm.data[cells * t + i];
            if (std::isfinite(v)) {
                s += v;
                ++n;
            }
        }
        mean[t] = n ? s / static_cast<double>(n) : 0.0;
    }

    CycleLengthResult res;
    const int max_lag = vm.n_frames / 2;
    const auto r = autocorrelation(mean, max_lag);
    if (r.empty()) return res;

    // First local maximum that clears the absolute floor and rises at least
    // 0.1 above the trough before it.
    double trough = r[0];
    for (int k = 1; k < max_lag; ++k) {
        trough = std::min(trough, r[k]);
        const bool local_max = r[k] >= r[k - 1] && r[k] > r[k + 1];
        if (!local_max || r[k] < kMinAutocorrPeak || r[k] - trough < 0.1) continue;
        // Parabolic refinement of the peak lag.
        const double denom = r[k - 1] - 2.0 * r[k] + r[k + 1];
        const double shift = denom != 0.0 ? 0.5 * (r[k - 1] - r[k + 1]) / denom : 0.0;
        res.cycle_length_ms = (k + std::clamp(shift, -0.5, 0.5)) * vm.dt_ms;
        res.peak = r[k];
        res.rhythm = res.cycle_length_ms > kTachycardiaCycleMs ? RhythmClass::Tachycardia
                                                               : RhythmClass::Fibrillation;
        return res;
    }
    return res;
}

}  // namespace deap::phase

#include "deap/phase/phase.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "deap/core/error.hpp"
#include "deap/core/parallel.hpp"

namespace deap::phase {

double wrap_angle(double a) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(a, 2.0 * pi);  // [-pi, pi]
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

std::vector<double> hilbert_transform(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    Eigen::FFT<double> fft;
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, in);
    // One-sided spectrum weights of the analytic signal.
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k < n) {
            spectrum[k] *= 2.0;
        } else if (2 * k > n) {
            spectrum[k] = 0.0;
        }
    }
    std::vector<std::complex<double>> analytic;
    fft.inv(analytic, spectrum);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = analytic[i].imag();
    return h;
}

std::vector<double> analytic_phase(std::span<const double> x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centred(n);
    for (std::size_t i = 0; i < n; ++i) centred[i] = x[i] - mean;
    const auto h = hilbert_transform(centred);
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = wrap_angle(std::atan2(h[i], centred[i]));
    return theta;
}

PhaseMovie compute_phase(const Movie& vm, const Mask& mask) {
    require(mask.rows == vm.geom.rows && mask.cols == vm.geom.cols, "compute_phase: mask shape mismatch");
    require(vm.n_frames * vm.dt_ms >= kMinPhaseDurationMs,
            "compute_phase: need at least 512 ms of frames, got " + std::to_string(vm.n_frames * vm.dt_ms));

    PhaseMovie out;
    out.geom = vm.geom;
    out.n_frames = vm.n_frames;
    out.dt_ms = vm.dt_ms;
    out.theta.assign(vm.data.size(), 0.0);
    out.mask = mask;
    const int edge = static_cast<int>(std::ceil(kEdgeInvalidMs / vm.dt_ms));
    out.valid_begin = edge;
    out.valid_end = vm.n_frames - edge;

    const std::size_t cells = vm.cells();
    parallel_for(cells, [&](std::size_t cell) {
        if (!mask.on[cell]) return;
        const auto trace = vm.trace(cell);
        bool finite = true;
        double lo = trace.front(), hi = trace.front();
        for (double v : trace) {
            if (!std::isfinite(v)) {
                finite = false;
                break;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!finite || hi - lo <= 0.0) {
            out.mask.on[cell] = 0;
            return;
        }
        const auto theta = analytic_phase(trace);
        for (int t = 0; t < vm.n_frames; ++t) out.theta[cells * t + cell] = theta[t];
    });
    return out;
}

PhaseMovie compute_phase(const Movie& vm) {
    return compute_phase(vm, Mask(vm.geom.rows, vm.geom.cols, true));
}

}  // namespace deap::phase

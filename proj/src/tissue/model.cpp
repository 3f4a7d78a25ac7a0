#include "deap/tissue/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"

namespace deap::tissue {

void ModelParams::validate() const {
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string("ModelParams.") + name + " must be > 0");
    };
    positive("k", k);
    positive("a", a);
    positive("eps0", eps0);
    positive("mu1", mu1);
    positive("mu2", mu2);
    positive("D0", D0);
    positive("time_scale_ms", time_scale_ms);
    positive("length_scale_mm", length_scale_mm);
    if (a >= 0.5) throw PreconditionError("ModelParams.a must lie in (0, 0.5)");
}

void to_json(nlohmann::json& j, const ModelParams& p) {
    j = nlohmann::json{{"k", p.k},       {"a", p.a},   {"eps0", p.eps0},
                       {"mu1", p.mu1},   {"mu2", p.mu2}, {"D0", p.D0},
                       {"time_scale_ms", p.time_scale_ms}, {"length_scale_mm", p.length_scale_mm}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
    ModelParams d;
    p.k = j.value("k", d.k);
    p.a = j.value("a", d.a);
    p.eps0 = j.value("eps0", d.eps0);
    p.mu1 = j.value("mu1", d.mu1);
    p.mu2 = j.value("mu2", d.mu2);
    p.D0 = j.value("D0", d.D0);
    p.time_scale_ms = j.value("time_scale_ms", d.time_scale_ms);
    p.length_scale_mm = j.value("length_scale_mm", d.length_scale_mm);
}

TissueGrid TissueGrid::resting(int nx, int ny, double dx_mm) {
    TissueGrid g;
    g.nx = nx;
    g.ny = ny;
    g.dx_mm = dx_mm;
    g.u.assign(g.cells(), 0.0);
    g.w.assign(g.cells(), 0.0);
    g.diffusion.assign(g.cells(), 1.0);
    return g;
}

void TissueGrid::validate() const {
    if (nx < 16 || ny < 16) throw PreconditionError("TissueGrid: nx and ny must be >= 16");
    if (!(dx_mm > 0.0)) throw PreconditionError("TissueGrid: dx_mm must be > 0");
    if (u.size() != cells() || w.size() != cells() || diffusion.size() != cells())
        throw PreconditionError("TissueGrid: field sizes do not match nx*ny");
    for (double d : diffusion)
        if (!(d >= 0.0 && d <= 1.0)) throw PreconditionError("TissueGrid: diffusion_map values must lie in [0, 1]");
}

double max_stable_dt(const TissueGrid& grid, const ModelParams& params) {
    const double h = grid.dx_mm / params.length_scale_mm;
    return 0.5 * h * h / (4.0 * params.D0);
}

namespace {

// Series (harmonic) combination, so a zero-diffusivity cell blocks its faces.
double face(double a, double b) { return (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

}  // namespace

Stepper::Stepper(const TissueGrid& grid, const ModelParams& params, double dt)
    : params_(params), dt_(dt), nx_(grid.nx), ny_(grid.ny) {
    params.validate();
    grid.validate();
    const double bound = max_stable_dt(grid, params);
    if (!(dt > 0.0) || dt > bound) {
        std::ostringstream msg;
        msg << "step: dt=" << dt << " violates explicit-Euler bound 0.5*dx^2/(4*D0)=" << bound;
        throw PreconditionError(msg.str());
    }
    const double h = grid.dx_mm / params.length_scale_mm;
    const double scale = params.D0 / (h * h);
    const std::size_t n = grid.cells();
    east_.assign(n, 0.0);
    south_.assign(n, 0.0);
    for (int r = 0; r < ny_; ++r) {
        for (int c = 0; c < nx_; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * nx_ + c;
            if (c + 1 < nx_) east_[i] = scale * face(grid.diffusion[i], grid.diffusion[i + 1]);
            if (r + 1 < ny_) south_[i] = scale * face(grid.diffusion[i], grid.diffusion[i + nx_]);
        }
    }
    u_next_.resize(n);
    w_next_.resize(n);
}

void Stepper::advance(TissueGrid& grid, std::span<const double> stimulus) {
    const double k = params_.k, a = params_.a, eps0 = params_.eps0, mu1 = params_.mu1, mu2 = params_.mu2;
    const double* u = grid.u.data();
    const double* w = grid.w.data();
    const bool stim = !stimulus.empty();
    for (int r = 0; r < ny_; ++r) {
        for (int c = 0; c < nx_; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * nx_ + c;
            const double ui = u[i];
            // No-flux boundaries: missing faces carry zero conductance.
            double diff = 0.0;
            if (c + 1 < nx_) diff += east_[i] * (u[i + 1] - ui);
            if (c > 0) diff += east_[i - 1] * (u[i - 1] - ui);
            if (r + 1 < ny_) diff += south_[i] * (u[i + nx_] - ui);
            if (r > 0) diff += south_[i - nx_] * (u[i - nx_] - ui);
            const double wi = w[i];
            double du = diff - k * ui * (ui - a) * (ui - 1.0) - ui * wi;
            if (stim) du += stimulus[i];
            const double dw = (eps0 + mu1 * wi / (ui + mu2)) * (-wi - k * ui * (ui - a - 1.0));
            const double un = ui + dt_ * du;
            const double wn = wi + dt_ * dw;
            if (!std::isfinite(un) || !std::isfinite(wn)) {
                std::ostringstream msg;
                msg << "non-finite tissue state at step " << steps_ << ", cell (row " << r << ", col " << c
                    << "): u=" << un << " w=" << wn;
                throw NumericalError(msg.str());
            }
            u_next_[i] = un;
            w_next_[i] = wn;
        }
    }
    grid.u.swap(u_next_);
    grid.w.swap(w_next_);
    ++steps_;
}

TissueGrid step(const TissueGrid& grid, const ModelParams& params, double dt) {
    TissueGrid next = grid;
    Stepper stepper(grid, params, dt);
    stepper.advance(next);
    return next;
}

std::vector<double> make_heterogeneity(std::uint64_t seed, int n_patches, double severity, int nx, int ny,
                                       double dx_mm) {
    if (!(severity >= 0.0 && severity <= 1.0))
        throw PreconditionError("make_heterogeneity: severity must lie in [0, 1]");
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    std::vector<double> map(n, 1.0);
    if (severity == 0.0 || n_patches <= 0) return map;

    struct Patch {
        double cx, cy, sigma;
    };
    Rng rng(Rng::derive(seed, 0x4845u));
    const double width = nx * dx_mm, height = ny * dx_mm;
    std::vector<Patch> patches;
    for (int p = 0; p < n_patches; ++p) {
        Patch q;
        q.cx = rng.uniform(0.1, 0.9) * width;
        q.cy = rng.uniform(0.1, 0.9) * height;
        q.sigma = rng.uniform(1.5, 4.0);
        patches.push_back(q);
    }
    for (int r = 0; r < ny; ++r) {
        for (int c = 0; c < nx; ++c) {
            const double x = (c + 0.5) * dx_mm, y = (r + 0.5) * dx_mm;
            double g = 0.0;
            for (const auto& q : patches) {
                const double d2 = (x - q.cx) * (x - q.cx) + (y - q.cy) * (y - q.cy);
                g = std::max(g, std::exp(-0.5 * d2 / (q.sigma * q.sigma)));
            }
            map[static_cast<std::size_t>(r) * nx + c] = std::clamp(1.0 - severity * g, 0.0, 1.0);
        }
    }
    return map;
}

}  // namespace deap::tissue

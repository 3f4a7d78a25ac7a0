#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deap/core/grid.hpp"
#include "json.hpp"

namespace deap::tissue {

/// Two-variable Aliev-Panfilov kinetics. Time is in dimensionless units of
/// time_scale_ms; length in units of length_scale_mm.
struct ModelParams {
    double k = 8.0;
    double a = 0.15;
    double eps0 = 0.002;
    double mu1 = 0.2;
    double mu2 = 0.3;
    double D0 = 0.1;
    double time_scale_ms = 4.0;
    double length_scale_mm = 1.0;

    void validate() const;
};

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

/// Excitation field u, recovery field w and per-cell diffusivity scale on an
/// nx-by-ny sheet (row-major, ny rows).
struct TissueGrid {
    int nx = 0;
    int ny = 0;
    double dx_mm = 0.25;
    std::vector<double> u;
    std::vector<double> w;
    std::vector<double> diffusion;

    static TissueGrid resting(int nx, int ny, double dx_mm);
    GridGeometry geometry() const { return GridGeometry::centered(ny, nx, dx_mm); }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    void validate() const;
};

/// Largest admissible explicit-Euler step: 0.5 * h^2 / (4 * D0) with h the
/// cell pitch in dimensionless length.
double max_stable_dt(const TissueGrid& grid, const ModelParams& params);

/// In-place forward-Euler integrator with no-flux boundaries. Holds the face
/// conductances and scratch buffers so repeated steps do not allocate.
class Stepper {
public:
    Stepper(const TissueGrid& grid, const ModelParams& params, double dt);

    /// One step; `stimulus` is an optional per-cell current added to du/dt.
    void advance(TissueGrid& grid, std::span<const double> stimulus = {});

    double dt() const { return dt_; }
    std::int64_t steps_taken() const { return steps_; }

private:
    ModelParams params_;
    double dt_;
    int nx_, ny_;
    std::vector<double> east_;   ///< conductance of the face to (r, c+1)
    std::vector<double> south_;  ///< conductance of the face to (r+1, c)
    std::vector<double> u_next_, w_next_;
    std::int64_t steps_ = 0;
};

/// Functional form of a single step. Throws PreconditionError when dt exceeds
/// max_stable_dt and NumericalError on non-finite state.
TissueGrid step(const TissueGrid& grid, const ModelParams& params, double dt);

/// Smooth random patches with the diffusivity scale reduced toward
/// 1 - severity. severity = 0 yields exactly 1 everywhere.
std::vector<double> make_heterogeneity(std::uint64_t seed, int n_patches, double severity, int nx, int ny,
                                       double dx_mm);

}  // namespace deap::tissue

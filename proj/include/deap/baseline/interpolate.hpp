#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deap/baseline/activation.hpp"
#include "deap/core/error.hpp"
#include "deap/core/grid.hpp"

namespace deap::baseline {

inline constexpr int kMinSupport = 4;

class InsufficientSupport : public PreconditionError {
public:
    explicit InsufficientSupport(int valid)
        : PreconditionError("insufficient support: " + std::to_string(valid) + " valid electrodes, need " +
                            std::to_string(kMinSupport)),
          valid_(valid) {}
    int valid() const { return valid_; }

private:
    int valid_;
};

/// Interpolating thin-plate spline f(p) = sum_i w_i U(|p - s_i|) + a0 + a1 x + a2 y
/// with U(r) = r^2 log r.
class ThinPlateSpline {
public:
    explicit ThinPlateSpline(std::vector<Vec2> sites);
    /// Linear map from site values to the coefficients [w; a].
    const Eigen::MatrixXd& solver() const { return solve_; }
    /// Row of evaluation weights for a point: f(p) = row . values.
    Eigen::RowVectorXd weights_at(Vec2 p) const;
    double evaluate(Vec2 p, std::span<const double> values) const;
    std::size_t size() const { return sites_.size(); }

private:
    std::vector<Vec2> sites_;
    Eigen::MatrixXd solve_;  // (n + 3) x n
};

double tps_kernel(double r);

/// Convex hull (counter-clockwise, collinear points dropped) by monotone chain.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);
bool inside_hull(const std::vector<Vec2>& hull, Vec2 p, double tol = 1e-9);

/// Spreads per-electrode elapsed times over the footprint: TPS inside the
/// convex hull of the valid electrodes, nearest valid electrode outside it,
/// NaN outside `mask`. Results are clamped to >= 0. Interpolation matrices
/// are cached per set of valid electrodes.
class ElapsedInterpolator {
public:
    ElapsedInterpolator(std::vector<Vec2> sites_mm, const GridGeometry& grid, const Mask& mask);

    /// values[i] is NaN for electrodes without support.
    Map2D interpolate(std::span<const double> values) const;
    /// Pre-builds the matrix for a support set; not thread-safe.
    void prepare(std::uint32_t valid_bits) const;
    const GridGeometry& grid() const { return grid_; }
    const Mask& mask() const { return mask_; }

private:
    const Eigen::MatrixXd& matrix_for(std::uint32_t bits) const;

    std::vector<Vec2> sites_;
    GridGeometry grid_;
    Mask mask_;
    std::vector<std::size_t> cells_;  // in-mask cell indices
    mutable std::map<std::uint32_t, Eigen::MatrixXd> cache_;
};

/// Elapsed time since the last activation at or before t_ms; NaN if none.
std::vector<double> elapsed_at(const ActivationTable& table, double t_ms);

/// Single-frame interpolation; throws InsufficientSupport below 4 electrodes.
Map2D interpolate_elapsed(const ActivationTable& table, const ElapsedInterpolator& interp, double t_ms);

/// Elapsed-time map per frame (1 ms); frames without support are all-NaN.
struct ActivationField {
    ActivationTable table;
    Movie elapsed;
    int unsupported_frames = 0;
};

ActivationField build_activation_field(const ActivationTable& table, const ElapsedInterpolator& interp);

}  // namespace deap::baseline

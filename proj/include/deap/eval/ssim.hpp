#pragma once

#include "deap/core/grid.hpp"

namespace deap::eval {

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
    std::size_t min_cells = 100;
};

/// Mean local SSIM over window centres inside `mask`. Each local window is the
/// Gaussian kernel restricted to in-mask cells and renormalised, so cells
/// outside the mask never contribute statistics.
double ssim(const Map2D& a, const Map2D& b, const Mask& mask, const SsimOptions& opt = {});

/// Per-centre SSIM map (NaN outside the mask).
Map2D ssim_map(const Map2D& a, const Map2D& b, const Mask& mask, const SsimOptions& opt = {});

/// Root-mean-square difference and Pearson correlation over in-mask cells.
double masked_rmse(const Map2D& a, const Map2D& b, const Mask& mask);
double masked_correlation(const Map2D& a, const Map2D& b, const Mask& mask);

}  // namespace deap::eval

#include "deap/eval/ssim.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "deap/core/error.hpp"

namespace deap::eval {

namespace {

void check_inputs(const Map2D& a, const Map2D& b, const Mask& mask, std::size_t min_cells) {
    if (!a.geom.same_shape(b.geom)) throw PreconditionError("ssim: maps differ in shape");
    if (mask.rows != a.geom.rows || mask.cols != a.geom.cols) throw PreconditionError("ssim: mask shape differs");
    const std::size_t n = mask.count();
    if (n < min_cells)
        throw PreconditionError("ssim: degenerate mask (" + std::to_string(n) + " cells, need " +
                                std::to_string(min_cells) + ")");
    for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
            if (mask.at(r, c) && !(std::isfinite(a.at(r, c)) && std::isfinite(b.at(r, c))))
                throw PreconditionError("ssim: non-finite value inside mask at (" + std::to_string(r) + ", " +
                                        std::to_string(c) + ")");
}

}  // namespace

Map2D ssim_map(const Map2D& a, const Map2D& b, const Mask& mask, const SsimOptions& opt) {
    check_inputs(a, b, mask, opt.min_cells);
    require(opt.window % 2 == 1 && opt.window > 0, "ssim: window must be odd");
    const int half = opt.window / 2;
    std::vector<double> kernel(static_cast<std::size_t>(opt.window) * opt.window);
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx)
            kernel[(dy + half) * opt.window + dx + half] = std::exp(-(dx * dx + dy * dy) / (2.0 * opt.sigma * opt.sigma));

    const double c1 = std::pow(opt.k1 * opt.dynamic_range, 2);
    const double c2 = std::pow(opt.k2 * opt.dynamic_range, 2);
    Map2D out(a.geom, std::numeric_limits<double>::quiet_NaN());
    const int rows = mask.rows, cols = mask.cols;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (!mask.at(r, c)) continue;
            double wsum = 0.0, ma = 0.0, mb = 0.0;
            for (int dy = -half; dy <= half; ++dy)
                for (int dx = -half; dx <= half; ++dx) {
                    const int rr = r + dy, cc = c + dx;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols || !mask.at(rr, cc)) continue;
                    const double w = kernel[(dy + half) * opt.window + dx + half];
                    wsum += w;
                    ma += w * a.at(rr, cc);
                    mb += w * b.at(rr, cc);
                }
            ma /= wsum;
            mb /= wsum;
            double va = 0.0, vb = 0.0, cab = 0.0;
            for (int dy = -half; dy <= half; ++dy)
                for (int dx = -half; dx <= half; ++dx) {
                    const int rr = r + dy, cc = c + dx;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols || !mask.at(rr, cc)) continue;
                    const double w = kernel[(dy + half) * opt.window + dx + half] / wsum;
                    const double da = a.at(rr, cc) - ma, db = b.at(rr, cc) - mb;
                    va += w * da * da;
                    vb += w * db * db;
                    cab += w * da * db;
                }
            out.at(r, c) = ((2.0 * ma * mb + c1) * (2.0 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    return out;
}

double ssim(const Map2D& a, const Map2D& b, const Mask& mask, const SsimOptions& opt) {
    const Map2D m = ssim_map(a, b, mask, opt);
    double s = 0.0;
    std::size_t n = 0;
    for (double v : m.v)
        if (std::isfinite(v)) {
            s += v;
            ++n;
        }
    return s / static_cast<double>(n);
}

double masked_rmse(const Map2D& a, const Map2D& b, const Mask& mask) {
    check_inputs(a, b, mask, 1);
    double s = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
            if (mask.at(r, c)) {
                const double d = a.at(r, c) - b.at(r, c);
                s += d * d;
                ++n;
            }
    return std::sqrt(s / static_cast<double>(n));
}

double masked_correlation(const Map2D& a, const Map2D& b, const Mask& mask) {
    check_inputs(a, b, mask, 2);
    double ma = 0.0, mb = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
            if (mask.at(r, c)) {
                ma += a.at(r, c);
                mb += b.at(r, c);
                ++n;
            }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
            if (mask.at(r, c)) {
                const double da = a.at(r, c) - ma, db = b.at(r, c) - mb;
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace deap::eval

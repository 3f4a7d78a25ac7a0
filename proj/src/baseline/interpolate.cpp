#include "deap/baseline/interpolate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

#include "deap/core/parallel.hpp"

namespace deap::baseline {

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

ThinPlateSpline::ThinPlateSpline(std::vector<Vec2> sites) : sites_(std::move(sites)) {
    const int n = static_cast<int>(sites_.size());
    if (n < kMinSupport) throw InsufficientSupport(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 3, n + 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = tps_kernel(norm(sites_[i] - sites_[j]));
        a(i, n) = a(n, i) = 1.0;
        a(i, n + 1) = a(n + 1, i) = sites_[i].x;
        a(i, n + 2) = a(n + 2, i) = sites_[i].y;
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, n);
    rhs.topRows(n).setIdentity();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw NumericalError("thin-plate spline: degenerate electrode layout");
    solve_ = lu.solve(rhs);
}

Eigen::RowVectorXd ThinPlateSpline::weights_at(Vec2 p) const {
    const int n = static_cast<int>(sites_.size());
    Eigen::RowVectorXd e(n + 3);
    for (int i = 0; i < n; ++i) e[i] = tps_kernel(norm(p - sites_[i]));
    e[n] = 1.0;
    e[n + 1] = p.x;
    e[n + 2] = p.y;
    return e * solve_;
}

double ThinPlateSpline::evaluate(Vec2 p, std::span<const double> values) const {
    const Eigen::RowVectorXd w = weights_at(p);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * values[i];
    return s;
}

namespace {
double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }
}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (pts.size() < 3) return pts;
    double scale = 0.0;
    for (const auto& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    // Turns this close to straight are rounding noise on collinear input.
    const double eps = 1e-9 * std::max(scale * scale, 1.0);
    std::vector<Vec2> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= eps) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= eps) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

bool inside_hull(const std::vector<Vec2>& hull, Vec2 p, double tol) {
    if (hull.size() < 3) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
        const double len = norm(b - a);
        if (cross(a, b, p) < -tol * std::max(len, 1.0)) return false;
    }
    return true;
}

ElapsedInterpolator::ElapsedInterpolator(std::vector<Vec2> sites_mm, const GridGeometry& grid, const Mask& mask)
    : sites_(std::move(sites_mm)), grid_(grid), mask_(mask) {
    require(sites_.size() <= 32, "ElapsedInterpolator: at most 32 electrodes");
    require(mask.rows == grid.rows && mask.cols == grid.cols, "ElapsedInterpolator: mask/grid shape mismatch");
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c)
            if (mask.at(r, c)) cells_.push_back(grid.index(r, c));
}

void ElapsedInterpolator::prepare(std::uint32_t bits) const { (void)matrix_for(bits); }

const Eigen::MatrixXd& ElapsedInterpolator::matrix_for(std::uint32_t bits) const {
    if (auto it = cache_.find(bits); it != cache_.end()) return it->second;
    std::vector<int> idx;
    std::vector<Vec2> pts;
    for (int i = 0; i < static_cast<int>(sites_.size()); ++i)
        if (bits & (1u << i)) {
            idx.push_back(i);
            pts.push_back(sites_[i]);
        }
    const auto hull = convex_hull(pts);
    // Collinear support has an empty interior: every cell takes the nearest
    // electrode and no spline is fitted.
    std::optional<ThinPlateSpline> tps;
    if (hull.size() >= 3) tps.emplace(pts);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells_.size()),
                                              static_cast<Eigen::Index>(sites_.size()));
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        const int r = static_cast<int>(cells_[k] / grid_.cols), c = static_cast<int>(cells_[k] % grid_.cols);
        const Vec2 p = grid_.cell_center(r, c);
        if (tps && inside_hull(hull, p)) {
            const Eigen::RowVectorXd w = tps->weights_at(p);
            for (std::size_t j = 0; j < idx.size(); ++j) m(static_cast<Eigen::Index>(k), idx[j]) = w[j];
        } else {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < pts.size(); ++j)
                if (const double dd = norm(p - pts[j]); dd < best_d) {
                    best_d = dd;
                    best = j;
                }
            m(static_cast<Eigen::Index>(k), idx[best]) = 1.0;
        }
    }
    return cache_.emplace(bits, std::move(m)).first->second;
}

namespace {
std::uint32_t valid_bits(std::span<const double> values) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isfinite(values[i])) bits |= 1u << i;
    return bits;
}
}  // namespace

Map2D ElapsedInterpolator::interpolate(std::span<const double> values) const {
    require(values.size() == sites_.size(), "ElapsedInterpolator: value count differs from electrode count");
    const std::uint32_t bits = valid_bits(values);
    const int n_valid = std::popcount(bits);
    if (n_valid < kMinSupport) throw InsufficientSupport(n_valid);
    const Eigen::MatrixXd& m = matrix_for(bits);
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = std::isfinite(values[i]) ? values[i] : 0.0;
    const Eigen::VectorXd out = m * v;
    Map2D map(grid_, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < cells_.size(); ++k) map.v[cells_[k]] = std::max(0.0, out[static_cast<Eigen::Index>(k)]);
    return map;
}

std::vector<double> elapsed_at(const ActivationTable& table, double t_ms) {
    std::vector<double> e(table.channels.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t ch = 0; ch < table.channels.size(); ++ch) {
        const auto& ts = table.channels[ch].times_ms;
        auto it = std::upper_bound(ts.begin(), ts.end(), t_ms);
        if (it != ts.begin()) e[ch] = t_ms - *std::prev(it);
    }
    return e;
}

Map2D interpolate_elapsed(const ActivationTable& table, const ElapsedInterpolator& interp, double t_ms) {
    return interp.interpolate(elapsed_at(table, t_ms));
}

ActivationField build_activation_field(const ActivationTable& table, const ElapsedInterpolator& interp) {
    ActivationField field;
    field.table = table;
    const double dt_ms = 1000.0 / table.fs_hz;
    field.elapsed = Movie(interp.grid(), table.n_samples, dt_ms, std::numeric_limits<float>::quiet_NaN());

    // Build every interpolation matrix up front so the frame loop only reads
    // the cache.
    std::vector<std::uint32_t> bits(table.n_samples);
    for (int t = 0; t < table.n_samples; ++t) {
        const auto e = elapsed_at(table, t * dt_ms);
        bits[t] = valid_bits(e);
        if (std::popcount(bits[t]) >= kMinSupport)
            interp.prepare(bits[t]);
        else
            ++field.unsupported_frames;
    }
    parallel_for(static_cast<std::size_t>(table.n_samples), [&](std::size_t t) {
        if (std::popcount(bits[t]) < kMinSupport) return;
        const Map2D m = interp.interpolate(elapsed_at(table, t * dt_ms));
        auto f = field.elapsed.frame(static_cast<int>(t));
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(m.v[i]);
    });
    return field;
}

}  // namespace deap::baseline

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

#include "deap/baseline/activation.hpp"
#include "deap/baseline/interpolate.hpp"
#include "deap/baseline/template.hpp"
#include "deap/core/rng.hpp"
#include "deap/sensing/array.hpp"
#include "deap/sensing/forward.hpp"
#include "deap/tissue/episode.hpp"

using namespace deap;
using namespace deap::baseline;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Positive lobe then negative lobe; the analytic steepest downslope is at c.
double deflection(double t, double c, double s = 4.0) {
    const double z = (t - c) / s;
    return -z * std::exp(-0.5 * z * z);
}

std::vector<double> train(int n, const std::vector<double>& centres, double noise = 0.0, std::uint64_t seed = 1) {
    std::vector<double> x(n, 0.0);
    Rng rng(seed);
    for (int t = 0; t < n; ++t) {
        for (double c : centres) x[t] += deflection(t, c);
        if (noise > 0.0) x[t] += noise * rng.normal();
    }
    return x;
}

const tissue::Episode& plane_wave() {
    static const tissue::Episode ep = tissue::run_episode(tissue::plane_wave_protocol(tissue::Side::Left, 5.0),
                                                          tissue::ModelParams{}, tissue::TissueSpec{}, 1, 500.0, "pw");
    return ep;
}

}  // namespace

TEST_CASE("slope estimator matches a brute-force least-squares fit") {
    std::vector<double> x(40);
    Rng rng(3);
    for (auto& v : x) v = rng.normal();
    const auto d = derivative(x, 1000.0, 3);
    for (int t = 3; t < 37; ++t) {
        // Slope of the ordinary least-squares line through (k, x[t+k]), k = -3..3.
        double sk = 0, sx = 0, skx = 0, skk = 0;
        for (int k = -3; k <= 3; ++k) {
            sk += k;
            sx += x[t + k];
            skx += k * x[t + k];
            skk += k * k;
        }
        const double slope = (7 * skx - sk * sx) / (7 * skk - sk * sk);
        CHECK(d[t] == doctest::Approx(slope).epsilon(1e-12));
    }
    CHECK(d[0] == 0.0);
    CHECK(d[39] == 0.0);
    const auto c = derivative(x, 1000.0, 1);
    CHECK(c[5] == doctest::Approx((x[6] - x[4]) / 2.0));
}

TEST_CASE("single biphasic deflection is detected at its steepest downslope") {
    for (double centre : {100.0, 100.4, 237.0}) {
        const auto x = train(400, {centre});
        const auto ch = detect_channel(x, 1000.0);
        REQUIRE(ch.times_ms.size() == 1);
        CHECK(std::abs(ch.times_ms[0] - centre) <= 2.0);
        CHECK_FALSE(ch.silent);
    }
    const auto noisy = train(400, {150.0}, 0.01, 9);
    const auto ch = detect_channel(noisy, 1000.0);
    REQUIRE(ch.times_ms.size() == 1);
    CHECK(std::abs(ch.times_ms[0] - 150.0) <= 2.0);
}

TEST_CASE("flat and pure-noise traces are silent") {
    const std::vector<double> flat(1000, 0.0);
    const auto ch = detect_channel(flat, 1000.0);
    CHECK(ch.times_ms.empty());
    CHECK(ch.silent);
    // Short traces are not flagged.
    CHECK_FALSE(detect_channel(std::vector<double>(400, 0.0), 1000.0).silent);
    CHECK_THROWS_AS(detect_channel(std::vector<double>(150, 0.0), 1000.0), PreconditionError);

    const auto noise = train(1000, {}, 0.05, 4);
    CHECK(detect_channel(noise, 1000.0).times_ms.empty());
}

TEST_CASE("periodic train every 150 ms over one second") {
    std::vector<double> centres;
    for (double c = 50.0; c < 1000.0; c += 150.0) centres.push_back(c);
    const auto x = train(1000, centres, 0.01, 2);
    const auto ch = detect_channel(x, 1000.0);
    CHECK(ch.times_ms.size() >= 6);
    CHECK(ch.times_ms.size() <= 7);
    for (std::size_t i = 1; i < ch.times_ms.size(); ++i)
        CHECK(std::abs(ch.times_ms[i] - ch.times_ms[i - 1] - 150.0) <= 2.0);
}

TEST_CASE("blanking suppresses the weaker of two close deflections") {
    auto x = train(600, {200.0});
    const auto weak = train(600, {230.0});
    for (std::size_t t = 0; t < x.size(); ++t) x[t] += 0.8 * weak[t];
    const auto ch = detect_channel(x, 1000.0);
    REQUIRE(ch.times_ms.size() == 1);
    CHECK(std::abs(ch.times_ms[0] - 200.0) <= 2.0);

    DetectionOptions loose;
    loose.blanking_ms = 20.0;
    CHECK(detect_channel(x, 1000.0, loose).times_ms.size() == 2);

    // Invariant on a dense noisy train.
    std::vector<double> centres;
    for (double c = 40.0; c < 2000.0; c += 61.0) centres.push_back(c);
    const auto dense = detect_channel(train(2000, centres, 0.05, 5), 1000.0);
    for (std::size_t i = 1; i < dense.times_ms.size(); ++i)
        CHECK(dense.times_ms[i] - dense.times_ms[i - 1] >= 50.0);
}

TEST_CASE("shifting a trace shifts detections by the same number of samples") {
    const auto x = train(1200, {300.0, 520.0, 760.0, 900.0}, 0.01, 8);
    const auto base = detect_channel(x, 1000.0);
    REQUIRE(base.times_ms.size() == 4);
    for (int shift : {1, 7, 33}) {
        std::vector<double> y(x.size());
        for (std::size_t t = 0; t < x.size(); ++t) y[(t + shift) % x.size()] = x[t];
        const auto moved = detect_channel(y, 1000.0);
        REQUIRE(moved.times_ms.size() == base.times_ms.size());
        for (std::size_t i = 0; i < base.times_ms.size(); ++i)
            CHECK(moved.times_ms[i] == base.times_ms[i] + shift);
    }
}

TEST_CASE("activation table CSV round trip and metadata") {
    sensing::EgmRecording rec;
    rec.n_channels = 3;
    rec.n_samples = 800;
    rec.traces.resize(3 * 800);
    const auto a = train(800, {100.0, 400.0});
    const auto b = train(800, {250.0});
    std::copy(a.begin(), a.end(), rec.traces.begin());
    std::copy(b.begin(), b.end(), rec.traces.begin() + 800);
    const auto table = detect_activations(rec);
    CHECK(table.channels[0].times_ms.size() == 2);
    CHECK(table.channels[2].silent);
    CHECK(table.silent_count() == 1);
    CHECK(table.summary()["method"] == "max_negative_slope");

    test_support::TempDir tmp("act");
    write_activation_csv(tmp.path() / "a.csv", table);
    const auto back = read_activation_csv(tmp.path() / "a.csv", 3, 800);
    for (int ch = 0; ch < 3; ++ch) {
        CHECK(back.channels[ch].times_ms == table.channels[ch].times_ms);
        CHECK(back.channels[ch].silent == table.channels[ch].silent);
    }
}

TEST_CASE("thin-plate spline interpolates sites and reproduces affine fields") {
    const auto arr = sensing::build_pentagon_array();
    const ThinPlateSpline tps(arr.positions);
    std::vector<double> v(20);
    Rng rng(6);
    for (auto& x : v) x = 100.0 * rng.uniform();
    for (int i = 0; i < 20; ++i) CHECK(std::abs(tps.evaluate(arr.positions[i], v) - v[i]) <= 1e-6);

    std::vector<double> lin(20);
    for (int i = 0; i < 20; ++i) lin[i] = 3.0 + 2.0 * arr.positions[i].x - 0.5 * arr.positions[i].y;
    for (Vec2 p : {Vec2{0.3, 0.7}, Vec2{-5.0, 2.0}, Vec2{7.1, -8.2}})
        CHECK(tps.evaluate(p, lin) == doctest::Approx(3.0 + 2.0 * p.x - 0.5 * p.y).epsilon(1e-9));

    CHECK(tps_kernel(0.0) == 0.0);
    CHECK(tps_kernel(std::exp(1.0)) == doctest::Approx(std::exp(2.0)));
    CHECK_THROWS_AS(ThinPlateSpline({{0, 0}, {1, 0}, {0, 1}}), InsufficientSupport);
}

TEST_CASE("convex hull by monotone chain") {
    const auto h = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 0}});
    CHECK(h.size() == 4);
    CHECK(inside_hull(h, {1.0, 1.5}));
    CHECK_FALSE(inside_hull(h, {2.5, 1.0}));
    CHECK(inside_hull(h, {2.0, 1.0}));
    CHECK(convex_hull({{0, 0}, {1, 1}, {2, 2}, {3, 3}}).size() == 2);
}

TEST_CASE("elapsed-time interpolation over the footprint") {
    const auto arr = sensing::build_pentagon_array();
    const auto grid = GridGeometry::centered(64, 64, 0.5);
    const Mask mask = sensing::footprint_mask(grid, sensing::Footprint{{0.0, 0.0}, 14.0});
    const ElapsedInterpolator interp(arr.positions, grid, mask);

    SUBCASE("constant values give a constant map") {
        const std::vector<double> v(20, 37.5);
        const Map2D m = interp.interpolate(v);
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c) {
                if (mask.at(r, c))
                    CHECK(m.at(r, c) == doctest::Approx(37.5).epsilon(1e-9));
                else
                    CHECK(std::isnan(m.at(r, c)));
            }
    }

    SUBCASE("outside the hull takes the nearest valid electrode") {
        std::vector<double> v(20);
        for (int i = 0; i < 20; ++i) v[i] = 10.0 * i;
        v[3] = kNaN;  // the outermost electrode of one spine drops out
        const Map2D m = interp.interpolate(v);
        std::vector<Vec2> valid;
        for (int i = 0; i < 20; ++i)
            if (!std::isnan(v[i])) valid.push_back(arr.positions[i]);
        const auto hull = convex_hull(valid);
        int outside = 0;
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c) {
                const Vec2 p = grid.cell_center(r, c);
                if (!mask.at(r, c) || inside_hull(hull, p, 1e-6)) continue;
                int best = -1;
                double bd = 1e300;
                for (int i = 0; i < 20; ++i) {
                    if (std::isnan(v[i])) continue;
                    const double d = std::hypot(p.x - arr.positions[i].x, p.y - arr.positions[i].y);
                    if (d < bd - 1e-12) {
                        bd = d;
                        best = i;
                    }
                }
                ++outside;
                CHECK(m.at(r, c) == doctest::Approx(v[best]));
            }
        CHECK(outside > 50);
    }

    SUBCASE("fewer than four valid electrodes") {
        std::vector<double> v(20, kNaN);
        v[0] = v[5] = v[10] = 1.0;
        CHECK_THROWS_AS(interp.interpolate(v), InsufficientSupport);
        v[15] = 2.0;
        CHECK_NOTHROW(interp.interpolate(v));
    }

    SUBCASE("elapsed time since the last activation") {
        ActivationTable t;
        t.channels.resize(20);
        for (int i = 0; i < 20; ++i) t.channels[i].times_ms = {10.0 + i, 200.0 + i};
        t.channels[7].times_ms = {300.0};
        const auto e = elapsed_at(t, 250.0);
        CHECK(e[0] == doctest::Approx(50.0));
        CHECK(e[19] == doctest::Approx(31.0));
        CHECK(std::isnan(e[7]));
        const Map2D m = interpolate_elapsed(t, interp, 250.0);
        CHECK(m.defined().count() == mask.count());
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c)
                if (mask.at(r, c)) CHECK(m.at(r, c) >= 0.0);
    }
}

TEST_CASE("plane wave: iso-elapsed contours are normal to the propagation") {
    const auto& ep = plane_wave();
    for (double rot : {0.0, 35.0}) {
        auto arr = sensing::build_pentagon_array();
        arr.pose = sensing::Pose{rot, 0.5, -1.0};
        sensing::NoiseSpec noise;
        noise.snr_db = 20.0;
        const auto rec = sensing::forward_egm(ep, arr, noise, 3);
        const auto table = detect_activations(rec);
        double last = 0.0;
        // First detection per channel is the activation; a late repolarisation
        // deflection can cross threshold on edge electrodes.
        for (const auto& ch : table.channels) {
            REQUIRE_FALSE(ch.times_ms.empty());
            last = std::max(last, ch.times_ms[0]);
        }
        const auto reg = sensing::register_array(arr, ep.vm.geom);
        const Mask mask = sensing::footprint_mask(ep.vm.geom, sensing::footprint(arr));
        const ElapsedInterpolator interp(reg.tissue_mm, ep.vm.geom, mask);
        const Map2D m = interpolate_elapsed(table, interp, last + 5.0);

        // Least-squares plane e = a + bx x + by y over the defined cells.
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (int r = 0; r < ep.vm.geom.rows; ++r)
            for (int c = 0; c < ep.vm.geom.cols; ++c) {
                if (!mask.at(r, c)) continue;
                const Vec2 p = ep.vm.geom.cell_center(r, c);
                const Eigen::Vector3d row(1.0, p.x, p.y);
                ata += row * row.transpose();
                atb += row * m.at(r, c);
            }
        const Eigen::Vector3d coef = ata.ldlt().solve(atb);
        // Elapsed time falls along the direction of travel (+x here).
        const double angle = std::atan2(-coef[2], -coef[1]) * 180.0 / std::numbers::pi;
        CHECK(std::abs(angle) < 15.0);
    }
}

TEST_CASE("action potential template") {
    const ApTemplate ap;
    CHECK(ap(0.0) == doctest::Approx(1.0));
    CHECK(ap(120.0) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(ap(600.0) <= 0.01);
    CHECK(ap(5000.0) <= 0.01);
    for (double e = 0.0; e < 600.0; e += 7.0) CHECK(ap(e + 7.0) < ap(e));
    // Upstroke before activation.
    CHECK(ap(-0.5) > 0.0);
    CHECK(ap(-0.5) < 1.0);
    CHECK(ap(-2.0) == doctest::Approx(0.0));

    Movie elapsed(GridGeometry::centered(4, 4, 1.0), 3, 1.0, 0.0f);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            elapsed.at(1, r, c) = 600.0f + r * 100.0f + c;
            elapsed.at(2, r, c) = std::numeric_limits<float>::quiet_NaN();
        }
    const Movie v = activation_movie(elapsed, ap);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(v.at(0, r, c) == doctest::Approx(1.0));
            CHECK(v.at(1, r, c) <= 0.01f);
            CHECK(v.at(2, r, c) == 0.0f);
        }
}

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "support.hpp"

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"
#include "deap/sensing/array.hpp"
#include "deap/sensing/forward.hpp"
#include "deap/sensing/roi.hpp"
#include "deap/tissue/episode.hpp"

using namespace deap;
using namespace deap::sensing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

const tissue::Episode& plane_wave() {
    static const tissue::Episode ep = tissue::run_episode(tissue::plane_wave_protocol(tissue::Side::Left, 5.0),
                                                          tissue::ModelParams{}, tissue::TissueSpec{}, 1, 500.0, "pw");
    return ep;
}

double peak_to_peak(std::span<const double> x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

}  // namespace

TEST_CASE("pentagon array geometry") {
    const auto a = build_pentagon_array();
    REQUIRE(a.size() == 20);
    CHECK(a.max_radius_mm() == doctest::Approx(12.0));
    // 72 degree rotation maps the set onto itself.
    const double th = 72.0 * std::numbers::pi / 180.0;
    for (const Vec2 p : a.positions) {
        const Vec2 q{std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y};
        double best = 1e9;
        for (const Vec2 s : a.positions) best = std::min(best, dist(q, s));
        CHECK(best < 1e-9);
    }
    // Radii 3, 6, 9, 12 appear five times each.
    for (double r : {3.0, 6.0, 9.0, 12.0}) {
        int n = 0;
        for (const Vec2 p : a.positions) n += std::abs(std::hypot(p.x, p.y) - r) < 1e-9;
        CHECK(n == 5);
    }
    // Footprint fits the default 32 mm sheet.
    const auto fp = footprint(a);
    CHECK(fp.radius_mm == doctest::Approx(14.0));
    CHECK(fp.radius_mm < 16.0);
    CHECK_NOTHROW(register_array(a, GridGeometry::centered(128, 128, 0.25)));
}

TEST_CASE("spiral array geometry") {
    const auto a = build_spiral_array();
    REQUIRE(a.size() == 20);
    double prev = 0.0;
    for (const Vec2 p : a.positions) {
        const double r = std::hypot(p.x, p.y);
        CHECK(r > prev);
        prev = r;
    }
    CHECK(std::hypot(a.positions.front().x, a.positions.front().y) == doctest::Approx(2.0));
    CHECK(prev == doctest::Approx(12.0));

    double min_d = 1e9;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) min_d = std::min(min_d, dist(a.positions[i], a.positions[j]));
    CHECK(min_d >= 1.5);
    // Frozen regression value of the minimum pairwise distance.
    CHECK(min_d == doctest::Approx(2.925).epsilon(1e-3));

    // Equal arc-length spacing: integrate |dr/dphi| independently with a fine
    // trapezoid rule between consecutive electrode angles.
    auto arc = [](double phi0, double phi1) {
        const int n = 20000;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p0 = phi0 + (phi1 - phi0) * i / n, p1 = phi0 + (phi1 - phi0) * (i + 1) / n;
            auto f = [](double p) { return std::hypot(1.2, 2.0 + 1.2 * p); };
            s += 0.5 * (f(p0) + f(p1)) * (p1 - p0);
        }
        return s;
    };
    std::vector<double> phis;
    for (const Vec2 p : a.positions) phis.push_back((std::hypot(p.x, p.y) - 2.0) / 1.2);
    const double first = arc(phis[0], phis[1]);
    for (std::size_t i = 1; i + 1 < phis.size(); ++i) CHECK(arc(phis[i], phis[i + 1]) == doctest::Approx(first).epsilon(1e-4));
    // Electrode angle follows the spiral parameter.
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec2 p = a.positions[i];
        const double r = std::hypot(p.x, p.y);
        CHECK(p.x == doctest::Approx(r * std::cos(phis[i])).epsilon(1e-9));
        CHECK(p.y == doctest::Approx(r * std::sin(phis[i])).epsilon(1e-9));
    }
}

TEST_CASE("array_by_name") {
    CHECK(array_by_name("pentagon").size() == 20);
    CHECK(array_by_name("spiral").name == "spiral");
    CHECK_THROWS_AS(array_by_name("hexagon"), PreconditionError);
}

TEST_CASE("registration and pose") {
    const auto grid = GridGeometry::centered(128, 128, 0.25);
    ElectrodeArray custom;
    custom.name = "custom";
    custom.positions = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}};
    const auto reg = register_array(custom, grid);
    CHECK(reg.grid_coords[0].row == doctest::Approx(63.5));
    CHECK(reg.grid_coords[0].col == doctest::Approx(63.5));
    CHECK(reg.grid_coords[1].col == doctest::Approx(67.5));
    CHECK(reg.grid_coords[2].row == doctest::Approx(71.5));

    const Pose pose{33.0, 1.25, -0.75};
    for (const Vec2 p : build_spiral_array().positions) {
        const Vec2 back = pose.invert(pose.apply(p));
        CHECK(std::abs(back.x - p.x) < 1e-9);
        CHECK(std::abs(back.y - p.y) < 1e-9);
    }

    auto a = build_pentagon_array();
    const auto before = a.positions;
    a.pose = Pose{10.0, 0.0, 0.0};
    const auto after = a.posed_positions();
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = i + 1; j < before.size(); ++j)
            CHECK(std::abs(dist(before[i], before[j]) - dist(after[i], after[j])) < 1e-9);

    // Shifted off the sheet: the first electrode past the 2 mm margin is named.
    a.pose = Pose{0.0, 5.0, 0.0};
    int expected = -1;
    for (std::size_t i = 0; i < a.size() && expected < 0; ++i) {
        const Vec2 p = a.pose.apply(a.positions[i]);
        if (std::abs(p.x) > 14.0 || std::abs(p.y) > 14.0) expected = static_cast<int>(i);
    }
    REQUIRE(expected >= 0);
    try {
        register_array(a, grid);
        FAIL("expected RegistrationError");
    } catch (const RegistrationError& e) {
        CHECK(e.electrode() == expected);
        CHECK(std::string(e.what()).find("electrode " + std::to_string(expected)) != std::string::npos);
    }
}

TEST_CASE("uniform field produces exactly zero potential") {
    Movie vm(GridGeometry::centered(64, 64, 0.25), 20, 1.0);
    for (int t = 0; t < 20; ++t)
        for (auto& v : vm.frame(t)) v = 0.05f * t;
    const auto arr = build_pentagon_array();
    std::vector<Vec2> sites(arr.positions.begin(), arr.positions.begin() + 4);
    for (auto& s : sites) s = 0.5 * s;
    const auto phi = clean_potentials(vm, sites, 1.0);
    for (double p : phi) CHECK(p == 0.0);
}

TEST_CASE("forward model matches a direct summation") {
    const auto g = GridGeometry::centered(12, 10, 0.5);
    Movie vm(g, 3, 1.0);
    Rng rng(3);
    for (auto& v : vm.data) v = static_cast<float>(rng.uniform());
    const std::vector<Vec2> sites{{0.3, -0.2}, {1.7, 1.1}};
    const double h = 1.3, gain = 0.7;
    const auto phi = clean_potentials(vm, sites, h, gain);
    for (std::size_t e = 0; e < sites.size(); ++e)
        for (int t = 0; t < 3; ++t) {
            double s = 0.0;
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c) {
                    // dx^2 * Laplacian with mirrored (no-flux) neighbours.
                    auto u = [&](int rr, int cc) {
                        rr = std::clamp(rr, 0, g.rows - 1);
                        cc = std::clamp(cc, 0, g.cols - 1);
                        return static_cast<double>(vm.at(t, rr, cc));
                    };
                    const double lap = u(r - 1, c) + u(r + 1, c) + u(r, c - 1) + u(r, c + 1) - 4 * u(r, c);
                    const double x = g.x0_mm + c * g.pitch_mm - sites[e].x;
                    const double y = g.y0_mm + r * g.pitch_mm - sites[e].y;
                    s += -gain * lap / std::sqrt(x * x + y * y + h * h);
                }
            CHECK(phi[e * 3 + t] == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("forward model is linear in the source field") {
    const auto g = GridGeometry::centered(64, 64, 0.25);
    Movie a(g, 4, 1.0), b(g, 4, 1.0), sum(g, 4, 1.0);
    for (int t = 0; t < 4; ++t)
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c) {
                const float va = (c < 28) ? static_cast<float>(std::exp(-0.02 * ((r - 30) * (r - 30) + (c - 12 - t) * (c - 12 - t)))) : 0.0f;
                const float vb = (c > 36) ? static_cast<float>(0.5 * std::sin(0.2 * r + 0.1 * t) * (c - 36) / 28.0) : 0.0f;
                a.at(t, r, c) = va;
                b.at(t, r, c) = vb;
                sum.at(t, r, c) = va + vb;
            }
    const std::vector<Vec2> sites{{0.0, 0.0}, {-3.0, 2.0}, {4.0, -5.0}};
    const auto pa = clean_potentials(a, sites, 1.0), pb = clean_potentials(b, sites, 1.0),
               ps = clean_potentials(sum, sites, 1.0);
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(std::abs(ps[i] - (pa[i] + pb[i])) < 1e-9);
}

TEST_CASE("calibrated gain gives a unit plane-wave deflection") {
    CHECK(calibrate_forward_gain() * std::abs(kForwardGain) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(kForwardGain < 0.0);
}

TEST_CASE("plane wave: deflection order follows the wavefront") {
    const auto& ep = plane_wave();
    const auto arr = build_pentagon_array();
    NoiseSpec clean;
    clean.snr_db = kInf;
    const auto rec = forward_egm(ep, arr, clean, 1);
    const auto reg = register_array(arr, ep.vm.geom);
    std::vector<double> marker(20), truth(20);
    for (int e = 0; e < 20; ++e) {
        const auto x = rec.channel(e);
        // Steepest downslope by central difference.
        int best = 1;
        for (int t = 1; t + 1 < rec.n_samples; ++t)
            if (x[t + 1] - x[t - 1] < x[best + 1] - x[best - 1]) best = t;
        marker[e] = best;
        // Truth: 0.5 crossing at the nearest cell.
        const int r = static_cast<int>(std::lround(reg.grid_coords[e].row));
        const int c = static_cast<int>(std::lround(reg.grid_coords[e].col));
        for (int t = 1; t < ep.vm.n_frames; ++t)
            if (ep.vm.at(t - 1, r, c) < 0.5 && ep.vm.at(t, r, c) >= 0.5) {
                truth[e] = t;
                break;
            }
        // Biphasic: clear positive and negative lobes.
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        CHECK(*hi > 0.1 * (*hi - *lo));
        CHECK(*lo < -0.1 * (*hi - *lo));
    }
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            if (truth[i] + 2 < truth[j]) CHECK(marker[i] < marker[j]);
}

TEST_CASE("noise: SNR, determinism and height falloff") {
    const auto& ep = plane_wave();
    const auto arr = build_pentagon_array();
    NoiseSpec clean;
    clean.snr_db = kInf;
    NoiseSpec noisy;
    noisy.snr_db = 20.0;
    const auto c = forward_egm(ep, arr, clean, 1);
    const auto n = forward_egm(ep, arr, noisy, 1);
    const auto n2 = forward_egm(ep, arr, noisy, 1);
    CHECK(c.traces != n.traces);
    CHECK(n.traces == n2.traces);
    CHECK(forward_egm(ep, arr, noisy, 2).traces != n.traces);

    double ps = 0.0, pn = 0.0;
    for (int ch = 0; ch < 20; ++ch) {
        const auto x = c.channel(ch);
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= x.size();
        for (double v : x) ps += (v - mean) * (v - mean);
        const auto y = n.channel(ch);
        for (std::size_t t = 0; t < x.size(); ++t) pn += (y[t] - x[t]) * (y[t] - x[t]);
    }
    const double snr = 10.0 * std::log10(ps / pn);
    CHECK(std::abs(snr - 20.0) <= 1.0);
    CHECK(std::abs(n.measured_snr_db - snr) < 1e-6);

    auto high = arr;
    high.height_mm = 2.0;
    const auto h = forward_egm(ep, high, clean, 1);
    for (int ch = 0; ch < 20; ++ch) CHECK(peak_to_peak(h.channel(ch)) < peak_to_peak(c.channel(ch)));

    NoiseSpec line = clean;
    line.line_amplitude = 0.2;
    const auto l = forward_egm(ep, arr, line, 1);
    CHECK(l.traces[5] - c.traces[5] == doctest::Approx(0.2 * std::sin(2 * std::numbers::pi * 50.0 * 5 / 1000.0)));
}

TEST_CASE("recordings round-trip and export") {
    test_support::TempDir tmp("egm");
    auto arr = build_spiral_array();
    arr.pose = Pose{15.0, 0.5, -0.5};
    const auto rec = forward_egm(plane_wave(), arr, NoiseSpec{}, 4);
    save_recording(tmp.path(), "r0", rec);
    const auto back = load_recording(tmp.path(), "r0");
    REQUIRE(back.traces.size() == rec.traces.size());
    for (std::size_t i = 0; i < rec.traces.size(); ++i)
        CHECK(back.traces[i] == doctest::Approx(rec.traces[i]).epsilon(1e-6));
    CHECK(back.array.name == "spiral");
    CHECK(back.array.pose.rotation_deg == doctest::Approx(15.0));
    CHECK(back.noise.snr_db == doctest::Approx(20.0));
    CHECK(back.episode_id == "pw");

    export_recording_csv(tmp.path() / "r0.csv", rec);
    std::ifstream in(tmp.path() / "r0.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("t_ms,e0,e1,", 0) == 0);
    CHECK(header.find("e19") != std::string::npos);
    int lines = 0;
    for (std::string s; std::getline(in, s);) ++lines;
    CHECK(lines == rec.n_samples);
}

TEST_CASE("region of interest sampling") {
    auto arr = build_pentagon_array();
    arr.pose = Pose{30.0, 1.0, -0.5};
    const Roi roi = make_roi(arr);
    CHECK(roi.local.rows == 32);
    CHECK(roi.local.pitch_mm * 32 == doctest::Approx(2 * 12.0 * 1.1));

    // Bilinear sampling reproduces a linear field.
    const auto g = GridGeometry::centered(128, 128, 0.25);
    Movie m(g, 2, 1.0);
    for (int t = 0; t < 2; ++t)
        for (int r = 0; r < 128; ++r)
            for (int c = 0; c < 128; ++c) {
                const Vec2 p = g.cell_center(r, c);
                m.at(t, r, c) = static_cast<float>(0.3 + 0.01 * p.x + 0.02 * p.y + 0.1 * t);
            }
    const Movie s = resample_to_roi(m, roi);
    for (int t = 0; t < 2; ++t)
        for (int r = 0; r < 32; r += 5)
            for (int c = 0; c < 32; c += 5) {
                const Vec2 p = roi.tissue_point(r, c);
                // Points off the tissue grid are edge-clamped.
                const GridIndex gi = g.to_index(p);
                if (gi.row < 0 || gi.col < 0 || gi.row > 127 || gi.col > 127) continue;
                CHECK(s.at(t, r, c) == doctest::Approx(0.3 + 0.01 * p.x + 0.02 * p.y + 0.1 * t).epsilon(1e-5));
            }

    const Mask fp = roi_footprint_mask(roi, arr);
    CHECK(fp.count() > 0);
    CHECK(fp.count() < 32u * 32u);

    // Back-projection of an exact ROI field, away from the ROI edge clamp.
    Movie exact(roi.local, 1, 1.0);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            const Vec2 p = roi.tissue_point(r, c);
            exact.at(0, r, c) = static_cast<float>(0.3 + 0.01 * p.x + 0.02 * p.y);
        }
    const Mask tfp = footprint_mask(g, footprint(arr));
    const Movie back = roi_to_tissue(exact, roi, g, tfp);
    const double half = (roi.local.rows - 1) * roi.local.pitch_mm / 2.0;
    int checked = 0;
    for (int r = 0; r < 128; r += 3)
        for (int c = 0; c < 128; c += 3) {
            if (!tfp.at(r, c)) {
                CHECK(std::isnan(back.at(0, r, c)));
                continue;
            }
            const Vec2 p = g.cell_center(r, c);
            const Vec2 q = roi.pose.invert(p);
            if (std::abs(q.x) > half || std::abs(q.y) > half) continue;
            ++checked;
            CHECK(back.at(0, r, c) == doctest::Approx(0.3 + 0.01 * p.x + 0.02 * p.y).epsilon(1e-4));
        }
    CHECK(checked > 100);
}

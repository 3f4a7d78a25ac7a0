#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"
#include "deap/phase/cycle_length.hpp"
#include "deap/phase/isochrone.hpp"
#include "deap/phase/phase.hpp"
#include "deap/phase/pvi.hpp"
#include "deap/phase/singularity.hpp"
#include "deap/tissue/episode.hpp"

using namespace deap;
using namespace deap::phase;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseMovie synthetic_phase(int rows, int cols, int frames, auto&& theta) {
    PhaseMovie p;
    p.geom = GridGeometry::centered(rows, cols, 0.25);
    p.n_frames = frames;
    p.theta.resize(p.cells() * frames);
    p.mask = Mask(rows, cols, true);
    p.valid_begin = 0;
    p.valid_end = frames;
    for (int t = 0; t < frames; ++t)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) p.at(t, r, c) = wrap_angle(theta(t, r, c));
    return p;
}

// Periodic synthetic movie: a travelling pulse with the given period.
Movie pulse_movie(double period_ms, int frames, int size = 8) {
    Movie m(GridGeometry::centered(size, size, 0.25), frames, 1.0);
    for (int t = 0; t < frames; ++t)
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                const double ph = std::fmod(t - 2.0 * c, period_ms) / period_ms;
                const double p = ph < 0 ? ph + 1.0 : ph;
                m.at(t, r, c) = static_cast<float>(std::exp(-p * 8.0));
            }
    return m;
}

double first_crossing(const Movie& vm, int r, int c, int t0 = 1) {
    for (int t = std::max(t0, 1); t < vm.n_frames; ++t)
        if (vm.at(t - 1, r, c) < 0.5f && vm.at(t, r, c) >= 0.5f) return t;
    return std::nan("");
}

const tissue::Episode& spiral() {
    static const tissue::Episode ep = tissue::run_episode(tissue::s1s2_protocol(), tissue::ModelParams{},
                                                          tissue::TissueSpec{}, 1, 1000.0, "s1s2", 400.0);
    return ep;
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_angle(0.25 + 8 * kPi) == doctest::Approx(0.25));
}

TEST_CASE("hilbert transform of a cosine is a sine") {
    const int n = 1024;
    std::vector<double> x(n);
    for (int t = 0; t < n; ++t) x[t] = std::cos(2 * kPi * 16 * t / n);
    const auto h = hilbert_transform(x);
    for (int t = 0; t < n; ++t) CHECK(h[t] == doctest::Approx(std::sin(2 * kPi * 16 * t / n)).epsilon(1e-9));
}

TEST_CASE("sinusoid phase advances at 2 pi f") {
    const double f_hz = 7.0;
    Movie m(GridGeometry::centered(2, 2, 0.25), 1000, 1.0);
    for (int t = 0; t < 1000; ++t)
        for (int i = 0; i < 4; ++i) m.data[4 * t + i] = static_cast<float>(0.5 + 0.4 * std::sin(2 * kPi * f_hz * t / 1000.0 + i));
    const PhaseMovie ph = compute_phase(m);
    CHECK(ph.valid_begin == 50);
    CHECK(ph.valid_end == 950);
    double unwrapped = 0.0;
    for (int t = ph.valid_begin + 1; t < ph.valid_end; ++t)
        unwrapped += wrap_angle(ph.at(t, 1, 1) - ph.at(t - 1, 1, 1));
    const double slope = unwrapped / (ph.valid_end - 1 - ph.valid_begin);
    CHECK(slope == doctest::Approx(2 * kPi * f_hz / 1000.0).epsilon(0.01));
}

TEST_CASE("constant and non-finite traces are masked out") {
    Movie m(GridGeometry::centered(3, 3, 0.25), 600, 1.0);
    for (int t = 0; t < 600; ++t)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m.at(t, r, c) = static_cast<float>(std::sin(0.05 * t + r + c));
    for (int t = 0; t < 600; ++t) m.at(t, 1, 1) = 0.3f;
    m.at(17, 2, 2) = std::nanf("");
    const PhaseMovie ph = compute_phase(m);
    CHECK_FALSE(ph.mask.at(1, 1));
    CHECK_FALSE(ph.mask.at(2, 2));
    CHECK(ph.mask.count() == 7);
    CHECK_THROWS_AS(compute_phase(Movie(GridGeometry::centered(3, 3, 0.25), 400, 1.0)), PreconditionError);
}

TEST_CASE("paced tissue: one phase cycle per activation") {
    const auto ep = tissue::run_episode(tissue::periodic_pacing_protocol(200.0, 1200.0), tissue::ModelParams{},
                                        tissue::TissueSpec{}, 2, 1200.0, "paced");
    const PhaseMovie ph = compute_phase(ep.vm);
    for (auto [r, c] : {std::pair{64, 20}, std::pair{30, 64}, std::pair{100, 110}}) {
        int wraps = 0, beats = 0;
        for (int t = ph.valid_begin + 1; t < ph.valid_end; ++t) {
            if (ph.at(t - 1, r, c) > 2.0 && ph.at(t, r, c) < -2.0) ++wraps;
            if (ep.vm.at(t - 1, r, c) < 0.5f && ep.vm.at(t, r, c) >= 0.5f) ++beats;
        }
        CHECK(beats >= 4);
        CHECK(std::abs(wraps - beats) <= 1);
    }
}

TEST_CASE("circular variance and disc neighbourhoods") {
    CHECK(disc_offsets(3).size() == 29);
    CHECK(disc_offsets(0).size() == 1);
    const std::vector<double> same(10, 1.2);
    CHECK(circular_variance(same) == doctest::Approx(0.0).epsilon(1e-12));
    const std::vector<double> opposite{0.0, kPi};
    CHECK(circular_variance(opposite) == doctest::Approx(1.0));
}

TEST_CASE("phase variance of uniform, random and offset fields") {
    SUBCASE("uniform phase gives zero everywhere") {
        const auto p = synthetic_phase(20, 20, 30, [](int t, int, int) { return 0.1 * t; });
        const PviMap m = phase_variance_index(p);
        for (double v : m.values.v) CHECK(std::abs(v) < 1e-12);
    }

    SUBCASE("i.i.d. uniform phases match a Monte-Carlo oracle") {
        Rng rng(12);
        const auto p = synthetic_phase(40, 40, 40, [&](int, int, int) { return 2 * kPi * rng.uniform(); });
        // Only interior cells have full 29-cell neighbourhoods.
        PviMap m = phase_variance_index(p);
        double mean = 0.0;
        int n = 0;
        for (int r = 3; r < 37; ++r)
            for (int c = 3; c < 37; ++c) {
                mean += m.values.at(r, c);
                ++n;
            }
        mean /= n;
        Rng mc(99);
        double oracle = 0.0;
        const int trials = 20000;
        for (int k = 0; k < trials; ++k) {
            double sx = 0, sy = 0;
            for (int j = 0; j < 29; ++j) {
                const double a = 2 * kPi * mc.uniform();
                sx += std::cos(a);
                sy += std::sin(a);
            }
            oracle += 1.0 - std::hypot(sx, sy) / 29.0;
        }
        oracle /= trials;
        CHECK(mean > 0.75);
        CHECK(mean < 0.95);
        CHECK(mean == doctest::Approx(oracle).epsilon(0.01));
        for (double v : m.values.v)
            if (!std::isnan(v)) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
    }

    SUBCASE("global phase offset leaves PV unchanged") {
        Rng rng(5);
        std::vector<double> base(30 * 16 * 16);
        for (auto& v : base) v = 2 * kPi * rng.uniform();
        auto at = [&](int t, int r, int c) { return base[(t * 16 + r) * 16 + c]; };
        const auto a = phase_variance_index(synthetic_phase(16, 16, 30, at));
        const auto b = phase_variance_index(synthetic_phase(16, 16, 30, [&](int t, int r, int c) { return at(t, r, c) + 1.7; }));
        for (std::size_t i = 0; i < a.values.v.size(); ++i)
            CHECK(std::abs(a.values.v[i] - b.values.v[i]) < 1e-12);
    }

    SUBCASE("fully masked neighbourhood is undefined") {
        auto p = synthetic_phase(12, 12, 5, [](int t, int, int) { return 0.2 * t; });
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 12; ++c)
                if (std::hypot(r - 6, c - 6) <= 4.0) p.mask.set(r, c, false);
        const auto m = phase_variance_index(p, {1, -1, -1});
        CHECK(std::isnan(m.values.at(6, 6)));
        CHECK_FALSE(std::isnan(m.values.at(0, 0)));
    }
}

TEST_CASE("rotating the movie by 90 degrees rotates the PV map") {
    const int n = 24;
    Movie m(GridGeometry::centered(n, n, 0.25), 600, 1.0);
    for (int t = 0; t < 600; ++t)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                m.at(t, r, c) = static_cast<float>(std::sin(0.04 * t - 0.3 * c + 0.1 * r * r / n) +
                                                   0.3 * std::cos(0.11 * t + 0.2 * r));
    Movie rot(m.geom, 600, 1.0);
    for (int t = 0; t < 600; ++t)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) rot.at(t, r, c) = m.at(t, c, n - 1 - r);
    const auto a = phase_variance_index(compute_phase(m));
    const auto b = phase_variance_index(compute_phase(rot));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) CHECK(b.values.at(r, c) == doctest::Approx(a.values.at(c, n - 1 - r)).epsilon(1e-9));
}

TEST_CASE("synthetic vortex: one singularity with the right chirality") {
    const GridGeometry g = GridGeometry::centered(32, 32, 0.25);
    const Vec2 centre{0.6, -1.1};
    for (int sign : {+1, -1}) {
        const auto p = synthetic_phase(32, 32, 20, [&](int t, int r, int c) {
            const Vec2 q = g.cell_center(r, c);
            return sign * std::atan2(q.y - centre.y, q.x - centre.x) - 0.3 * t;
        });
        const GridIndex truth = g.to_index(centre);
        for (int t = 0; t < 20; ++t) {
            const auto ps = singularities_in_frame(p, t);
            REQUIRE(ps.size() == 1);
            CHECK(std::abs(ps[0].row - truth.row) <= 1.0);
            CHECK(std::abs(ps[0].col - truth.col) <= 1.0);
            CHECK(ps[0].chirality == sign);
        }
        const auto res = find_singularities(p);
        REQUIRE(res.tracks.size() == 1);
        CHECK(res.tracks[0].points.size() == 20);
        CHECK(res.tracks[0].chirality == sign);
    }
}

TEST_CASE("plane wave phase has no singularities") {
    const auto p = synthetic_phase(32, 32, 20, [](int t, int, int c) { return 0.4 * c - 0.3 * t; });
    const auto res = find_singularities(p);
    CHECK(res.tracks.empty());
    for (const auto& f : res.per_frame) CHECK(f.empty());
}

TEST_CASE("track linking respects gap and jump limits") {
    // Vortex that jumps 6 cells halfway through: two tracks.
    const GridGeometry g = GridGeometry::centered(32, 32, 0.25);
    const auto p = synthetic_phase(32, 32, 12, [&](int t, int r, int c) {
        const Vec2 q = g.cell_center(r, c);
        const double x0 = t < 6 ? -1.0 : 0.5;
        return std::atan2(q.y, q.x - x0) - 0.3 * t;
    });
    const auto res = find_singularities(p);
    CHECK(res.tracks.size() == 2);
}

TEST_CASE("S1-S2 spiral: PV peak sits on the rotor and charge is conserved") {
    const auto& ep = spiral();
    const PhaseMovie ph = compute_phase(ep.vm);
    const auto res = find_singularities(ph);
    const PsTrack* longest = res.longest_track();
    REQUIRE(longest != nullptr);
    CHECK(longest->lifetime_ms(1.0) >= 300.0);

    const PviMap pvi = phase_variance_index(ph);
    int br = 0, bc = 0;
    double best = -1.0;
    for (int r = 0; r < ph.geom.rows; ++r)
        for (int c = 0; c < ph.geom.cols; ++c)
            if (!std::isnan(pvi.values.at(r, c)) && pvi.values.at(r, c) > best) {
                best = pvi.values.at(r, c);
                br = r;
                bc = c;
            }
    const GridIndex mp = longest->mean_position();
    CHECK(std::hypot(br - mp.row, bc - mp.col) <= 5.0);

    // Charge changes only by unit steps and only at the boundary.
    for (const auto& ev : charge_events(ph, res)) {
        CHECK(std::abs(ev.delta) == 1);
        CHECK(ev.near_boundary);
    }
}

TEST_CASE("isochronal maps") {
    SUBCASE("plane wave gives parallel bands spaced by CV times step") {
        const auto ep = tissue::run_episode(tissue::plane_wave_protocol(tissue::Side::Left, 5.0),
                                            tissue::ModelParams{}, tissue::TissueSpec{}, 1, 500.0, "pw");
        const auto iso = isochronal_map(ep.vm, 0.0, 400.0, 10.0);
        const int row = 64;
        // Conduction velocity from the truth movie, mm per ms.
        const double cv = (100 - 20) * 0.25 / (first_crossing(ep.vm, row, 100) - first_crossing(ep.vm, row, 20));
        std::vector<int> edges;
        for (int c = 1; c < 128; ++c)
            if (iso.band.at(row, c) != iso.band.at(row, c - 1)) edges.push_back(c);
        REQUIRE(edges.size() >= 6);
        const double spacing = (edges[edges.size() - 2] - edges[1]) * 0.25 / (edges.size() - 3);
        CHECK(spacing == doctest::Approx(cv * 10.0).epsilon(0.10));
        // Parallel: the band boundary column is the same on every row away from the edges.
        for (int r = 10; r < 118; r += 9)
            for (int c = 20; c < 108; ++c) CHECK(iso.band.at(r, c) == iso.band.at(row, c));
    }

    SUBCASE("simultaneous activation is one band") {
        Movie m(GridGeometry::centered(10, 10, 0.25), 200, 1.0, 0.0f);
        for (int t = 40; t < 200; ++t)
            for (std::size_t i = 0; i < m.cells(); ++i) m.data[t * m.cells() + i] = 1.0f;
        const auto iso = isochronal_map(m, 0.0, 150.0, 10.0);
        for (double b : iso.band.v) CHECK(b == iso.band.v[0]);
        // Linear interpolation between the bracketing samples.
        CHECK(iso.activation_ms.at(3, 3) == doctest::Approx(39.5));
    }

    SUBCASE("window shorter than 50 ms is rejected") {
        Movie m(GridGeometry::centered(4, 4, 0.25), 200, 1.0);
        CHECK_THROWS_AS(isochronal_map(m, 10.0, 55.0), PreconditionError);
        CHECK_NOTHROW(isochronal_map(m, 10.0, 60.0));
    }

    SUBCASE("spiral bands wind around the rotor") {
        const auto& ep = spiral();
        const auto res = find_singularities(compute_phase(ep.vm));
        const PsTrack* longest = res.longest_track();
        REQUIRE(longest != nullptr);
        const GridIndex mp = longest->mean_position();
        const CycleLengthResult cl = cycle_length_filter(ep.vm);
        const double t0 = 500.0;
        const auto iso = isochronal_map(ep.vm, t0, t0 + cl.cycle_length_ms, 10.0);
        // Walk a ring around the rotor; activation time should change
        // monotonically (one rotation) over at least 270 degrees.
        const int steps = 72;
        const double radius = 16.0;
        std::vector<double> at;
        for (int k = 0; k < steps; ++k) {
            const double a = 2 * kPi * k / steps;
            const int r = static_cast<int>(std::lround(mp.row + radius * std::sin(a)));
            const int c = static_cast<int>(std::lround(mp.col + radius * std::cos(a)));
            if (r < 0 || c < 0 || r >= 128 || c >= 128) continue;
            at.push_back(iso.activation_ms.at(r, c));
        }
        REQUIRE(at.size() == steps);
        int up = 0, down = 0;
        for (int k = 0; k < steps; ++k) {
            const double a = at[k], b = at[(k + 1) % steps];
            if (std::isnan(a) || std::isnan(b)) continue;
            if (b > a) ++up;
            if (b < a) ++down;
        }
        CHECK(std::max(up, down) * 360.0 / steps >= 270.0);
    }
}

TEST_CASE("cycle length filter") {
    SUBCASE("pacing at 250 ms is tachycardia") {
        const auto ep = tissue::run_episode(tissue::periodic_pacing_protocol(250.0, 1500.0), tissue::ModelParams{},
                                            tissue::TissueSpec{}, 3, 1500.0, "p250");
        const auto res = cycle_length_filter(ep.vm);
        CHECK(res.rhythm == RhythmClass::Tachycardia);
        CHECK(res.cycle_length_ms == doctest::Approx(250.0).epsilon(0.03));
    }
    SUBCASE("pacing at 140 ms is retained") {
        const auto ep = tissue::run_episode(tissue::periodic_pacing_protocol(140.0, 1500.0), tissue::ModelParams{},
                                            tissue::TissueSpec{}, 3, 1500.0, "p140");
        const auto res = cycle_length_filter(ep.vm);
        CHECK(res.rhythm == RhythmClass::Fibrillation);
        CHECK(res.cycle_length_ms <= 200.0);
    }
    SUBCASE("constant movie is unclassifiable") {
        const Movie m(GridGeometry::centered(4, 4, 0.25), 1200, 1.0, 0.2f);
        CHECK(cycle_length_filter(m).rhythm == RhythmClass::Unclassifiable);
        CHECK_THROWS_AS(cycle_length_filter(Movie(GridGeometry::centered(4, 4, 0.25), 900, 1.0)), PreconditionError);
    }
    SUBCASE("time dilation by two doubles the cycle length") {
        const Movie fast = pulse_movie(130.0, 1200);
        Movie slow(fast.geom, 2400, 1.0);
        for (int t = 0; t < 2400; ++t)
            for (std::size_t i = 0; i < fast.cells(); ++i) {
                // Linear interpolation at t / 2.
                const int a = t / 2, b = std::min(a + 1, 1199);
                const float w = (t % 2) * 0.5f;
                slow.data[t * fast.cells() + i] = (1 - w) * fast.data[a * fast.cells() + i] + w * fast.data[b * fast.cells() + i];
            }
        const double a = cycle_length_filter(fast).cycle_length_ms;
        const double b = cycle_length_filter(slow).cycle_length_ms;
        CHECK(a == doctest::Approx(130.0).epsilon(0.03));
        CHECK(b == doctest::Approx(2.0 * a).epsilon(0.05));
    }
}

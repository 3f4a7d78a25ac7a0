#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "support.hpp"

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"
#include "deap/eval/compare.hpp"
#include "deap/eval/figures.hpp"
#include "deap/eval/ssim.hpp"
#include "deap/io/files.hpp"
#include "deap/nn/network.hpp"
#include "deap/sensing/array.hpp"

using namespace deap;
using namespace deap::eval;

namespace {

Map2D smooth_map(int n, std::uint64_t seed) {
    Rng rng(seed);
    const double a = rng.uniform() * 0.5, b = rng.uniform() * 0.5, p = rng.uniform() * 6.0;
    Map2D m(GridGeometry::centered(n, n, 1.0));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            m.at(r, c) = 0.5 + 0.3 * std::sin(a * r + b * c + p) + 0.1 * std::cos(0.7 * r) + 0.05 * rng.normal();
    return m;
}

Mask disc(int n, double radius) {
    Mask m(n, n, false);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (std::hypot(r - (n - 1) / 2.0, c - (n - 1) / 2.0) <= radius) m.set(r, c, true);
    return m;
}

// Full-window SSIM at one interior centre from raw moments E[ab] - E[a]E[b].
double textbook_ssim_at(const Map2D& a, const Map2D& b, int r0, int c0) {
    double w = 0, sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int dy = -5; dy <= 5; ++dy)
        for (int dx = -5; dx <= 5; ++dx) {
            const double k = std::exp(-(dx * dx + dy * dy) / 4.5);
            const double x = a.at(r0 + dy, c0 + dx), y = b.at(r0 + dy, c0 + dx);
            w += k;
            sa += k * x;
            sb += k * y;
            saa += k * x * x;
            sbb += k * y * y;
            sab += k * x * y;
        }
    const double ma = sa / w, mb = sb / w;
    const double va = saa / w - ma * ma, vb = sbb / w - mb * mb, cab = sab / w - ma * mb;
    const double c1 = 1e-4, c2 = 9e-4;
    return (2 * ma * mb + c1) * (2 * cab + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

const nn::SensedEpisode& sensed_spiral() {
    static const nn::SensedEpisode item = [] {
        const auto ep = tissue::run_episode(tissue::s1s2_protocol(), tissue::ModelParams{}, tissue::TissueSpec{}, 1,
                                            900.0, "s1s2", 400.0);
        auto arr = sensing::build_pentagon_array();
        arr.pose = sensing::Pose{20.0, 0.5, 0.0};
        sensing::NoiseSpec noise;
        noise.snr_db = 20.0;
        auto it = nn::sense_episode(ep, arr, noise, 5, "s1s2_p0");
        it.label = tissue::RhythmLabel::Fibrillation;
        return it;
    }();
    return item;
}

nn::ReconstructionModel random_model() {
    nn::ReconstructionModel m;
    nn::Network<float> net(m.arch);
    net.init(3);
    m.weights = net.export_blobs();
    m.norm.mean.assign(20, 0.0);
    m.norm.sd.assign(20, 0.1);
    return m;
}

}  // namespace

TEST_CASE("ssim identity, symmetry and bounds") {
    const Map2D a = smooth_map(40, 1), b = smooth_map(40, 2);
    const Mask full(40, 40, true);
    const Mask round = disc(40, 15.0);
    CHECK(ssim(a, a, full) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ssim(a, a, round) == doctest::Approx(1.0).epsilon(1e-12));
    for (const Mask* m : {&full, &round}) {
        const double ab = ssim(a, b, *m), ba = ssim(b, a, *m);
        CHECK(std::abs(ab - ba) < 1e-12);
        CHECK(ab < 1.0);
        CHECK(ab >= -1.0);
        const Map2D sm = ssim_map(a, b, *m);
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 40; ++c) {
                if (!m->at(r, c)) {
                    CHECK(std::isnan(sm.at(r, c)));
                    continue;
                }
                CHECK(sm.at(r, c) <= 1.0 + 1e-12);
                CHECK(sm.at(r, c) >= -1.0 - 1e-12);
            }
    }
}

TEST_CASE("ssim of an anticorrelated map is negative") {
    const Map2D a = smooth_map(32, 4);
    Map2D inv = a;
    for (double& v : inv.v) v = 1.0 - v;
    CHECK(ssim(a, inv, Mask(32, 32, true)) < 0.0);
    CHECK(ssim(a, inv, disc(32, 12.0)) < 0.0);
}

TEST_CASE("ssim matches independent oracles") {
    const Map2D a = smooth_map(30, 5), b = smooth_map(30, 6);
    const Mask full(30, 30, true);
    const Map2D sm = ssim_map(a, b, full);
    for (int r = 5; r < 25; r += 3)
        for (int c = 5; c < 25; c += 4) CHECK(sm.at(r, c) == doctest::Approx(textbook_ssim_at(a, b, r, c)).epsilon(1e-9));

    // Two constant maps: only the luminance term survives.
    const Map2D x(GridGeometry::centered(12, 12, 1.0), 0.3), y(GridGeometry::centered(12, 12, 1.0), 0.6);
    CHECK(ssim(x, y, Mask(12, 12, true)) == doctest::Approx((2 * 0.18 + 1e-4) / (0.09 + 0.36 + 1e-4)).epsilon(1e-12));

    // Masked windows renormalise over in-mask cells only: values outside the
    // mask never matter.
    const Mask round = disc(30, 10.0);
    Map2D a2 = a, b2 = b;
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 30; ++c)
            if (!round.at(r, c)) {
                a2.at(r, c) = 7.0;
                b2.at(r, c) = std::numeric_limits<double>::quiet_NaN();
            }
    CHECK(ssim(a2, b2, round) == doctest::Approx(ssim(a, b, round)).epsilon(1e-14));
}

TEST_CASE("ssim rejects degenerate input") {
    const Map2D a = smooth_map(20, 1);
    CHECK_THROWS_AS(ssim(a, a, disc(20, 5.0)), PreconditionError);  // ~81 cells
    CHECK_NOTHROW(ssim(a, a, disc(20, 6.0)));
    CHECK_THROWS_AS(ssim(a, smooth_map(21, 1), Mask(20, 20, true)), PreconditionError);
    Map2D holes = a;
    holes.at(10, 10) = std::nan("");
    CHECK_THROWS_AS(ssim(a, holes, Mask(20, 20, true)), PreconditionError);
}

TEST_CASE("masked rmse and correlation") {
    Map2D a(GridGeometry::centered(4, 4, 1.0)), b(GridGeometry::centered(4, 4, 1.0));
    for (int i = 0; i < 16; ++i) {
        a.v[i] = i;
        b.v[i] = 2.0 * i + 1.0;
    }
    Mask m(4, 4, true);
    CHECK(masked_correlation(a, b, m) == doctest::Approx(1.0));
    double s = 0;
    for (int i = 0; i < 16; ++i) s += (i + 1.0) * (i + 1.0);
    CHECK(masked_rmse(a, b, m) == doctest::Approx(std::sqrt(s / 16)));
    for (double& v : b.v) v = -v;
    CHECK(masked_correlation(a, b, m) == doctest::Approx(-1.0));
}

TEST_CASE("quartiles interpolate linearly and skip non-finite values") {
    const auto q = quartiles({4.0, 1.0, 3.0, 2.0, std::nan("")});
    CHECK(q.n == 4);
    CHECK(q.min == 1.0);
    CHECK(q.q1 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q3 == doctest::Approx(3.25));
    CHECK(q.max == 4.0);
    CHECK(q.mean == doctest::Approx(2.5));
    CHECK(quartiles({5.0}).median == 5.0);
}

TEST_CASE("frame cropping") {
    Movie m(GridGeometry::centered(2, 2, 1.0), 10, 1.0);
    for (int t = 0; t < 10; ++t) m.at(t, 1, 0) = static_cast<float>(t);
    const Movie c = crop_frames(m, 3, 4);
    CHECK(c.n_frames == 4);
    CHECK(c.at(0, 1, 0) == 3.0f);
    CHECK(c.at(3, 1, 0) == 6.0f);
    CHECK_THROWS(crop_frames(m, 8, 4));
}

TEST_CASE("pipeline comparison rows") {
    const auto& item = sensed_spiral();
    const auto model = random_model();

    // A recording shorter than one window fails without stopping the run.
    nn::SensedEpisode broken = item;
    broken.recording_id = "broken_p0";
    broken.episode_id = "broken";
    broken.rec.n_samples = 80;
    broken.rec.traces.resize(20 * 80);

    CompareOptions truth_opt;
    truth_opt.truth_as_estimate = true;
    const auto tr = compare_pipelines({&item, &broken}, model, truth_opt);
    REQUIRE(tr.rows.size() == 2);
    CHECK(tr.rows[0].recording_id == "broken_p0");
    CHECK_FALSE(tr.rows[0].ok);
    CHECK_FALSE(tr.rows[0].failure.empty());
    const auto& good = tr.rows[1];
    REQUIRE(good.ok);
    CHECK(good.ssim_deap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(good.rmse_deap == doctest::Approx(0.0));
    CHECK(good.mask_cells >= 100);
    CHECK(good.ssim_baseline < 1.0);
    CHECK(tr.succeeded().size() == 1);
    CHECK(tr.win_rate() == doctest::Approx(1.0));

    const auto learned = compare_pipelines({&item}, model);
    REQUIRE(learned.rows.size() == 1);
    CHECK(learned.rows[0].ok);
    // Both estimates are scored on the same mask as the truth-as-estimate run.
    CHECK(learned.rows[0].mask_cells <= good.mask_cells);
    CHECK(learned.rows[0].ssim_baseline == doctest::Approx(good.ssim_baseline).epsilon(1e-12));

    // Report serialisation.
    const auto j = tr.to_json();
    CHECK(j["rows"].size() == 2);
    test_support::TempDir tmp("report");
    tr.write_csv(tmp.path() / "r.csv");
    const std::string csv = io::read_text(tmp.path() / "r.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("broken_p0") != std::string::npos);
}

TEST_CASE("figures are deterministic and well formed") {
    ComparisonReport rep;
    for (int i = 0; i < 5; ++i) {
        EpisodeScore s;
        s.recording_id = "r" + std::to_string(i);
        s.ssim_deap = 0.6 + 0.05 * i;
        s.ssim_baseline = 0.2 + 0.03 * i;
        rep.rows.push_back(s);
    }
    const std::string sc = scatter_svg(rep), vi = violin_svg(rep);
    CHECK(sc == scatter_svg(rep));
    CHECK(vi == violin_svg(rep));
    CHECK(sc.rfind("<svg", 0) == 0);
    CHECK(sc.find("</svg>") != std::string::npos);
    CHECK(vi.find("</svg>") != std::string::npos);

    Map2D m = smooth_map(16, 3);
    m.at(2, 2) = std::nan("");
    const std::string h = heatmap_svg(m, 0.0, 1.0, "pvi");
    CHECK(h == heatmap_svg(m, 0.0, 1.0, "pvi"));
    CHECK(ramp_color(0.0) != ramp_color(1.0));
    CHECK(ramp_color(-1.0) == ramp_color(0.0));

    test_support::TempDir tmp("pgm");
    write_pgm(tmp.path() / "m.pgm", m, 0.0, 1.0);
    const std::string pgm = io::read_text(tmp.path() / "m.pgm");
    const std::string header = "P5\n16 16\n255\n";
    REQUIRE(pgm.size() == header.size() + 256);
    CHECK(pgm.compare(0, header.size(), header) == 0);
    // Rows are written top-down with +y up, so map row 2 is image row 13.
    CHECK(static_cast<unsigned char>(pgm[header.size() + 13 * 16 + 2]) == 0);
}

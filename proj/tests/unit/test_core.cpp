#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "deap/core/error.hpp"
#include "deap/core/grid.hpp"
#include "deap/core/parallel.hpp"
#include "deap/core/rng.hpp"
#include "deap/io/container.hpp"
#include "deap/io/files.hpp"

using namespace deap;

TEST_CASE("rng is reproducible and streams differ") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        (void)c;
    }
    CHECK(Rng(42).next_u64() != Rng(43).next_u64());
    CHECK(Rng::derive(5, 0) != Rng::derive(5, 1));
    CHECK(Rng::derive(5, 1) == Rng::derive(5, 1));
}

TEST_CASE("rng draws have the expected moments") {
    Rng r(7);
    const int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        su2 += u * u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(su2 / n - std::pow(su / n, 2) == doctest::Approx(1.0 / 12).epsilon(0.02));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));

    std::vector<int> hist(5, 0);
    for (int i = 0; i < 50000; ++i) hist[r.below(5)]++;
    for (int h : hist) CHECK(std::abs(h - 10000) < 400);
}

TEST_CASE("parallel_for visits each index once for any worker count") {
    const int saved = thread_count();
    for (int workers : {1, 2, 3, 8}) {
        set_thread_count(workers);
        std::vector<int> hits(1001, 0);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
    set_thread_count(2);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 7) throw NumericalError("boom");
                    }),
                    NumericalError);
    set_thread_count(saved);
}

TEST_CASE("grid geometry maps between cells and millimetres") {
    const auto g = GridGeometry::centered(128, 128, 0.25);
    const GridIndex mid = g.to_index({0.0, 0.0});
    CHECK(mid.row == doctest::Approx(63.5));
    CHECK(mid.col == doctest::Approx(63.5));
    const Vec2 p = g.cell_center(10, 20);
    CHECK(p.x == doctest::Approx(-63.5 * 0.25 + 20 * 0.25));
    CHECK(p.y == doctest::Approx(-63.5 * 0.25 + 10 * 0.25));
    const GridIndex back = g.to_index(p);
    CHECK(back.row == doctest::Approx(10.0));
    CHECK(back.col == doctest::Approx(20.0));
    const Vec2 q = g.to_mm({3.25, 7.5});
    CHECK(g.to_index(q).row == doctest::Approx(3.25));

    Mask a(4, 4, true), b(4, 4, false);
    b.set(1, 2, true);
    CHECK(mask_and(a, b).count() == 1);
    Map2D m(GridGeometry::centered(2, 2, 1.0), std::nan(""));
    m.at(0, 1) = 3.0;
    CHECK(m.defined().count() == 1);
}

TEST_CASE("container layout is little-endian with a fixed header") {
    test_support::TempDir tmp("container");
    const auto path = tmp.path() / "x.deap";
    io::ContainerHeader h;
    h.nx = 3;
    h.ny = 2;
    h.n_frames = 2;
    h.dt_ms = 1.0f;
    h.dx_mm = 0.25f;
    std::vector<float> payload(12);
    std::iota(payload.begin(), payload.end(), 0.5f);
    io::write_container(path, h, payload);

    // Independent byte-level read of the header.
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
    REQUIRE(bytes.size() == 4 + 2 + 4 * 3 + 4 * 2 + 12 * 4);
    CHECK(std::memcmp(bytes.data(), "DEAP", 4) == 0);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    auto u32 = [&](std::size_t o) {
        return bytes[o] | (bytes[o + 1] << 8) | (bytes[o + 2] << 16) | (static_cast<std::uint32_t>(bytes[o + 3]) << 24);
    };
    CHECK(u32(6) == 3);
    CHECK(u32(10) == 2);
    CHECK(u32(14) == 2);
    const std::uint32_t dx_bits = u32(22);
    float dx;
    std::memcpy(&dx, &dx_bits, 4);
    CHECK(dx == 0.25f);

    const auto c = io::read_container(path);
    CHECK(c.header.nx == 3);
    CHECK(c.payload == payload);

    // Trailing garbage and a wrong magic are rejected.
    {
        std::ofstream app(path, std::ios::binary | std::ios::app);
        app.put('x');
    }
    CHECK_THROWS_AS(io::read_container(path), FormatError);
    const auto bad = tmp.path() / "bad.deap";
    {
        std::ofstream o(bad, std::ios::binary);
        o << "NOPE0000000000000000000000";
    }
    CHECK_THROWS_AS(io::read_container(bad), FormatError);
}

TEST_CASE("movies and maps round-trip, NaN included") {
    test_support::TempDir tmp("movie");
    Movie m(GridGeometry::centered(3, 4, 0.5), 5, 1.0);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<float>(i) * 0.1f;
    io::write_movie(tmp.path() / "m.deap", m);
    const Movie r = io::read_movie(tmp.path() / "m.deap");
    CHECK(r.n_frames == 5);
    CHECK(r.geom.rows == 3);
    CHECK(r.geom.cols == 4);
    CHECK(r.geom.pitch_mm == doctest::Approx(0.5));
    CHECK(r.data == m.data);

    Map2D map(GridGeometry::centered(2, 3, 1.0), 1.5);
    map.at(1, 1) = std::nan("");
    io::write_map(tmp.path() / "p.deap", map);
    const Map2D back = io::read_map(tmp.path() / "p.deap");
    CHECK(std::isnan(back.at(1, 1)));
    CHECK(back.at(0, 2) == 1.5);
}

TEST_CASE("sha256 matches published test vectors") {
    CHECK(io::sha256_string("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_string("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    test_support::TempDir tmp("sha");
    io::write_text(tmp.path() / "a.txt", "abc");
    CHECK(io::sha256_file(tmp.path() / "a.txt") == io::sha256_string("abc"));
    CHECK(io::read_text(tmp.path() / "a.txt") == "abc");
}

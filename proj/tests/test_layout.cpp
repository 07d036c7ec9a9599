#include <doctest.h>

#include <map>
#include <random>
#include <utility>
#include <vector>

#include "tdp/layout.hpp"

using namespace tdp;

namespace {

// Builds the AoSoA memory image block by block: for each run of `sal`
// sites, all of component 0, then component 1, ... Returns (comp, site) -> position.
std::map<std::pair<std::size_t, std::size_t>, std::size_t> image_positions(std::size_t padded,
                                                                            std::size_t ncomp,
                                                                            std::size_t sal) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pos;
    std::size_t next = 0;
    for (std::size_t block = 0; block < padded / sal; ++block)
        for (std::size_t c = 0; c < ncomp; ++c)
            for (std::size_t lane = 0; lane < sal; ++lane) pos[{c, block * sal + lane}] = next++;
    return pos;
}

}  // namespace

TEST_CASE("scheme grammar") {
    CHECK(LayoutScheme::parse("aos") == LayoutScheme::aos());
    CHECK(LayoutScheme::parse("soa") == LayoutScheme::soa());
    CHECK(LayoutScheme::parse("aosoa:4") == LayoutScheme::aosoa(4));
    CHECK(LayoutScheme::parse("aosoa:16").sal() == 16);
    CHECK(LayoutScheme::aosoa(8).to_string() == "aosoa:8");

    for (const char* bad : {"", "AOS", "aosoa", "aosoa:", "aosoa:0", "aosoa:-2", "aosoa:4x",
                            "aosoa: 4", "aosoa;4", "aosoa:+4", "so a"})
        CHECK_THROWS_AS(LayoutScheme::parse(bad), InvalidArgument);
}

TEST_CASE("make_layout examples") {
    auto l = make_layout(4, 3, LayoutScheme::aosoa(2), 1);
    CHECK(l.nsites_padded() == 4);
    CHECK(l.sal() == 2);
    CHECK(l.total() == 12);

    l = make_layout(4, 3, LayoutScheme::aos(), 1);
    CHECK(l.nsites_padded() == 4);
    CHECK(l.sal() == 1);
    CHECK(l.total() == 12);

    // lcm(4, 4) = 4; 12 is the first multiple of 4 covering 10 sites.
    l = make_layout(10, 3, LayoutScheme::aosoa(4), 4);
    CHECK(l.nsites_padded() == 12);
    CHECK(l.sal() == 4);
    CHECK(l.total() == 36);

    // lcm(4, 6) = 12.
    l = make_layout(13, 2, LayoutScheme::aosoa(4), 6);
    CHECK(l.nsites_padded() == 24);

    // SoA pads with the vvl quantum and takes the padded count as sal.
    l = make_layout(10, 3, LayoutScheme::soa(), 4);
    CHECK(l.nsites_padded() == 12);
    CHECK(l.sal() == 12);

    l = make_layout(10, 3, LayoutScheme::aos(), 8);
    CHECK(l.nsites_padded() == 16);
    CHECK(l.sal() == 1);
}

TEST_CASE("make_layout rejects zero arguments") {
    CHECK_THROWS_AS(make_layout(0, 3, LayoutScheme::aos(), 1), InvalidArgument);
    CHECK_THROWS_AS(make_layout(4, 0, LayoutScheme::aos(), 1), InvalidArgument);
    CHECK_THROWS_AS(make_layout(4, 3, LayoutScheme::aos(), 0), InvalidArgument);
    CHECK_THROWS_AS(LayoutScheme::aosoa(0), InvalidArgument);
}

TEST_CASE("index examples") {
    // ||rr|gg|bb||rr|gg|bb||: the third red value sits at offset 6.
    const auto rgb = make_layout(4, 3, LayoutScheme::aosoa(2), 1);
    CHECK(index(rgb, 0, 2) == 6);
    CHECK(index(rgb, 0, 0) == 0);
    CHECK(index(make_layout(7, 5, LayoutScheme::soa(), 1), 0, 0) == 0);

    const auto l = make_layout(8, 3, LayoutScheme::aosoa(4), 1);
    CHECK(index(l, 2, 5) == 21);
    CHECK(image_positions(8, 3, 4).at({2, 5}) == 21);
}

TEST_CASE("index bounds") {
    const auto l = make_layout(10, 3, LayoutScheme::aosoa(4), 4);
    CHECK_THROWS_AS(index(l, 3, 0), BoundsError);
    CHECK_THROWS_AS(index(l, 0, 12), BoundsError);
    CHECK_NOTHROW(index(l, 2, 11));  // padded sites are addressable
}

TEST_CASE("index agrees with the constructed memory image") {
    for (std::size_t padded : {4u, 8u, 16u, 24u})
        for (std::size_t ncomp : {1u, 3u, 9u})
            for (std::size_t sal : {1u, 2u, 4u, 8u}) {
                if (padded % sal != 0) continue;
                const auto l = make_layout(padded, ncomp, LayoutScheme::aosoa(sal), 1);
                REQUIRE(l.nsites_padded() == padded);
                const auto pos = image_positions(padded, ncomp, sal);
                for (std::size_t c = 0; c < ncomp; ++c)
                    for (std::size_t s = 0; s < padded; ++s) CHECK(index(l, c, s) == pos.at({c, s}));
            }
}

TEST_CASE("AoS and SoA limits") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        const std::size_t nc = 1 + rng() % 8;
        const auto aos = make_layout(n, nc, LayoutScheme::aos(), 1);
        const auto soa = make_layout(n, nc, LayoutScheme::soa(), 1);
        const auto a1 = make_layout(n, nc, LayoutScheme::aosoa(1), 1);
        const auto ap = make_layout(n, nc, LayoutScheme::aosoa(soa.nsites_padded()), 1);
        const std::size_t c = rng() % nc;
        const std::size_t s = rng() % n;
        CHECK(index(aos, c, s) == s * nc + c);
        CHECK(index(soa, c, s) == c * soa.nsites_padded() + s);
        CHECK(index(a1, c, s) == index(aos, c, s));
        CHECK(index(ap, c, s) == index(soa, c, s));
    }
}

TEST_CASE("lane contiguity within a short array") {
    for (std::size_t sal : {1u, 2u, 4u, 8u}) {
        const auto l = make_layout(32, 3, LayoutScheme::aosoa(sal), 1);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t s = 0; s + 1 < 32; ++s)
                if (s / sal == (s + 1) / sal) CHECK(index(l, c, s + 1) == index(l, c, s) + 1);
    }
}

TEST_CASE("grid shape site numbering") {
    const GridShape shape({4, 4});
    CHECK(shape.nsites() == 16);
    CHECK(shape.site_of({0, 0}) == 0);
    CHECK(shape.site_of({3, 2}) == 11);
    CHECK(shape.coords_of(11) == std::vector<std::size_t>{3, 2});

    const GridShape cube({3, 5, 2});
    for (std::size_t s = 0; s < cube.nsites(); ++s) CHECK(cube.site_of(cube.coords_of(s)) == s);

    CHECK_THROWS_AS(shape.site_of({4, 0}), BoundsError);
    CHECK_THROWS_AS(shape.site_of({0, 4}), BoundsError);
    CHECK_THROWS_AS(shape.coords_of(16), BoundsError);
    CHECK_THROWS_AS(shape.site_of({1}), InvalidArgument);
    CHECK_THROWS_AS(GridShape({4, 0}), InvalidArgument);
}

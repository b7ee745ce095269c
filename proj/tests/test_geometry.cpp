#include "doctest.h"

#include <cmath>
#include <random>

#include "riscrlb/geometry.hpp"

using namespace riscrlb;

namespace {

// Reference placement used throughout: BS at the origin, MS at (50, 100),
// first RIS element at (-20, 50, 20).
const Position3D kBs{0.0, 0.0, 0.0};
const Position3D kMs{50.0, 100.0, 0.0};
const Position3D kElement{-20.0, 50.0, 20.0};

Position3D random_ms(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> x(5.0, 120.0);
    std::uniform_real_distribution<double> y(60.0, 180.0);
    return {x(gen), y(gen), 0.0};
}

Position3D random_element(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> x(-40.0, -5.0);
    std::uniform_real_distribution<double> y(20.0, 45.0);
    std::uniform_real_distribution<double> z(5.0, 35.0);
    return {x(gen), y(gen), z(gen)};
}

} // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("reference AoA matches the frozen closed-form values") {
    const AoaPair aoa = compute_aoa(kMs, kElement);
    CHECK(aoa.elevation == doctest::Approx(1.3423593250285661).epsilon(1e-14));
    CHECK(aoa.azimuth == doctest::Approx(2.5213431676069717).epsilon(1e-14));
}

TEST_CASE("reference AoD matches the frozen closed-form values") {
    const AodPair aod = compute_aod(kBs, kElement);
    CHECK(aod.elevation == doctest::Approx(1.2151937438143634).epsilon(1e-14));
    CHECK(aod.azimuth == doctest::Approx(1.9513027039072615).epsilon(1e-14));
}

TEST_CASE("reference transform columns match the frozen values") {
    const ScenarioGeometry geometry(kBs, kMs, {kElement});
    const TransformMatrix t = transform_matrix(geometry);
    REQUIRE(t.num_paths() == 1);
    CHECK(t.elevation_cols(0, 0) == doctest::Approx(0.002086496080017269).epsilon(1e-14));
    CHECK(t.elevation_cols(1, 0) == doctest::Approx(0.0014903543428694778).epsilon(1e-14));
    CHECK(t.azimuth_cols(0, 0) == doctest::Approx(0.0067567567567567571).epsilon(1e-14));
    CHECK(t.azimuth_cols(1, 0) == doctest::Approx(-0.00945945945945946).epsilon(1e-14));
    CHECK(t.full().rows() == 2);
    CHECK(t.full().cols() == 2);
}

TEST_CASE("transform columns equal finite differences of the angle formulas") {
    std::mt19937_64 gen(11);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        const Position3D q = random_ms(gen);
        const Position3D s = random_element(gen);
        const ScenarioGeometry geometry(kBs, q, {s});
        const TransformMatrix t = transform_matrix(geometry);
        for (int coord = 0; coord < 2; ++coord) {
            Position3D qp = q;
            Position3D qm = q;
            (coord == 0 ? qp.x : qp.y) += h;
            (coord == 0 ? qm.x : qm.y) -= h;
            const AoaPair ap = compute_aoa(qp, s);
            const AoaPair am = compute_aoa(qm, s);
            const double fd_elev = (ap.elevation - am.elevation) / (2.0 * h);
            const double fd_azim = (ap.azimuth - am.azimuth) / (2.0 * h);
            CHECK(t.elevation_cols(coord, 0) ==
                  doctest::Approx(fd_elev).epsilon(1e-6).scale(std::abs(fd_elev) + 1e-12));
            CHECK(t.azimuth_cols(coord, 0) ==
                  doctest::Approx(fd_azim).epsilon(1e-6).scale(std::abs(fd_azim) + 1e-12));
        }
    }
}

TEST_CASE("angles are invariant under a joint horizontal translation") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> shift(-30.0, 30.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Position3D q = random_ms(gen);
        const Position3D s = random_element(gen);
        const double dx = shift(gen);
        const double dy = shift(gen);
        const Position3D q2{q.x + dx, q.y + dy, q.z};
        const Position3D s2{s.x + dx, s.y + dy, s.z};
        const AoaPair a = compute_aoa(q, s);
        const AoaPair b = compute_aoa(q2, s2);
        CHECK(a.elevation == doctest::Approx(b.elevation).epsilon(1e-12));
        CHECK(a.azimuth == doctest::Approx(b.azimuth).epsilon(1e-12));
    }
}

TEST_CASE("angle ranges: elevation in (0, pi), azimuth in [0, pi]") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 50; ++trial) {
        const AoaPair a = compute_aoa(random_ms(gen), random_element(gen));
        CHECK(a.elevation > 0.0);
        CHECK(a.elevation < std::numbers::pi);
        CHECK(a.azimuth >= 0.0);
        CHECK(a.azimuth <= std::numbers::pi);
    }
}

TEST_CASE("expand_layout is row-major with columns along +x and rows along +z") {
    RisLayout layout;
    layout.rows = 2;
    layout.cols = 3;
    layout.element_spacing = 0.5;
    layout.reference = {1.0, 2.0, 3.0};
    const std::vector<Position3D> elements = expand_layout(layout);
    REQUIRE(elements.size() == 6);
    CHECK(elements[0].x == doctest::Approx(1.0));
    CHECK(elements[1].x == doctest::Approx(1.5)); // second column
    CHECK(elements[2].x == doctest::Approx(2.0));
    CHECK(elements[3].z == doctest::Approx(3.5)); // second row
    CHECK(elements[3].x == doctest::Approx(1.0));
    for (const auto& e : elements) {
        CHECK(e.y == doctest::Approx(2.0));
    }
}

TEST_CASE("constructor rejects invalid placements") {
    CHECK_THROWS_AS(ScenarioGeometry({0, 0, 1}, kMs, {kElement}), Error); // BS off the plane
    CHECK_THROWS_AS(ScenarioGeometry(kBs, {50, 100, -1}, {kElement}), Error);
    CHECK_THROWS_AS(ScenarioGeometry(kBs, kMs, {{-20, 50, 0}}), Error); // element at z = 0
    CHECK_THROWS_AS(ScenarioGeometry(kBs, kMs, {}), Error);             // no paths
    // MS horizontally coincident with an element is degenerate.
    CHECK_THROWS_AS(ScenarioGeometry(kBs, {-20, 50, 0}, {kElement}), DegenerateGeometry);
}

TEST_SUITE_END();

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ehrenfest/errors.hpp"
#include "ehrenfest/geometry.hpp"

using namespace ehrenfest;

TEST_CASE("default geometry derived fields") {
    const auto g = build_geometry(1.291, 0.7573, 1.1);
    CHECK(g.x_L() == doctest::Approx(std::sqrt(3.0) * 1.291 / 2).epsilon(1e-15));
    CHECK(g.x_L() == doctest::Approx(1.11802).epsilon(1e-5));
    CHECK(g.y_L() == doctest::Approx(1.9365).epsilon(1e-12));
    CHECK(g.theta_side() == doctest::Approx(std::atan2(1.1, 0.7573)).epsilon(1e-15));
    CHECK(std::abs(g.theta_side() - 0.968) < 2e-4);
    CHECK(g.side_length() == doctest::Approx(std::hypot(0.7573, 1.1)));
    CHECK(g.horizon() == Horizon::Finite);
    CHECK(g.cell_area() == doctest::Approx(1.5 * std::sqrt(3.0) * 1.291 * 1.291));
}

TEST_CASE("horizon and overlap rules") {
    CHECK(build_geometry(2.0, 0.8, 0.5).horizon() == Horizon::Infinite);
    CHECK_THROWS_AS(build_geometry(1.0, 1.0, 1.0), OverlapError);
    CHECK_THROWS_AS(build_geometry(-1.0, 0.5, 0.5), GeometryError);
    CHECK_THROWS_AS(build_geometry(1.0, 0.0, 0.5), GeometryError);
    // s_x wider than the cell
    CHECK_THROWS_AS(build_geometry(1.0, 0.9, 0.1), OverlapError);
}

TEST_CASE("rhombus sides") {
    const auto g = default_geometry();
    const double l = std::hypot(g.s_x(), g.s_y());
    Vec2 normal_sum{0, 0};
    for (const auto& s : g.rhombus()) {
        CHECK(s.segment.length == doctest::Approx(l));
        const Vec2 d = s.segment.end - s.segment.start;
        CHECK(std::abs(d.y / d.x) == doctest::Approx(std::tan(g.theta_side())));
        CHECK((d.y / d.x > 0) == (s.slope == SlopeSign::Positive));
        // outward: the centre is on the negative side
        CHECK(s.segment.signed_distance({0, 0}) < 0);
        normal_sum = normal_sum + s.segment.normal;
    }
    CHECK(std::abs(normal_sum.x) < 1e-15);
    CHECK(std::abs(normal_sum.y) < 1e-15);

    // side through (s_x, 0) and (0, s_y)
    const auto& r1 = g.side(SideLabel::r1);
    CHECK(r1.segment.signed_distance({g.s_x(), 0}) == doctest::Approx(0).epsilon(1e-15));
    CHECK(r1.segment.signed_distance({0, g.s_y()}) == doctest::Approx(0).epsilon(1e-15));
    const Vec2 d = r1.segment.end - r1.segment.start;
    CHECK(d.y / d.x == doctest::Approx(-1.1 / 0.7573));
    CHECK(d.y / d.x == doctest::Approx(-1.45253).epsilon(1e-5));
}

TEST_CASE("hexagon tiles the plane") {
    const auto g = default_geometry();
    const double xl = g.x_L(), L = g.L();
    // vertices of the regular hexagon
    const Vec2 verts[] = {{xl, L / 2}, {xl, -L / 2}, {0, -L}, {-xl, -L / 2}, {-xl, L / 2}, {0, L}};
    for (const auto& v : verts) {
        int on = 0;
        for (const auto& h : g.hexagon()) on += std::abs(h.segment.signed_distance(v)) < 1e-12;
        CHECK(on == 2);
    }
    // neighbour translations: midpoint of the two centres lies on the shared side
    for (const auto& h : g.hexagon()) {
        CHECK(std::abs(h.translation.x - h.dm * xl) < 1e-15);
        CHECK(std::abs(h.translation.y - h.dn * g.y_L()) < 1e-15);
        CHECK(CellIndex{h.dm, h.dn}.valid_parity());
        const Vec2 mid = h.translation * 0.5;
        CHECK(std::abs(h.segment.signed_distance(mid)) < 1e-12);
        const double u = h.segment.arc_position(mid);
        CHECK(u > 0);
        CHECK(u < h.segment.length);
    }
    // 5x5 patch: every pair of neighbouring centres shares a side midpoint
    for (int m = -4; m <= 4; ++m)
        for (int n = -2; n <= 2; ++n) {
            if ((m - n) % 2) continue;
            for (const auto& h : g.hexagon()) {
                const Vec2 c = g.cell_origin({m, n});
                const Vec2 c2 = g.cell_origin({m + h.dm, n + h.dn});
                const Vec2 mid = (c + c2) * 0.5 - c;
                CHECK(std::abs(h.segment.signed_distance(mid)) < 1e-12);
            }
        }
    CHECK(g.cell_area() == doctest::Approx(2 * xl * g.y_L()));
}

TEST_CASE("rhombus strictly inside the hexagon") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.05, 1.0);
    int tested = 0;
    for (int k = 0; k < 500; ++k) {
        const double L = 1.0, sx = U(rng), sy = U(rng) * 1.2;
        BilliardGeometry g;
        try {
            g = build_geometry(L, sx, sy);
        } catch (const Error&) {
            continue;
        }
        ++tested;
        for (const auto& s : g.rhombus()) {
            CHECK(g.inside_hexagon(s.segment.start));
            CHECK(g.inside_hexagon(s.segment.end));
        }
    }
    CHECK(tested > 100);
}

TEST_CASE("wrap_exit") {
    const auto g = default_geometry();
    const auto& h1 = g.hex_side(HexSide::h1);
    const Vec2 p = h1.segment.start + h1.segment.direction() * (0.3 * h1.segment.length);
    const auto w = wrap_exit(g, p, HexSide::h1, {0, 0});
    CHECK(w.cell == CellIndex{2, 0});
    CHECK(w.point.x == doctest::Approx(-g.x_L()));
    CHECK(w.point.y == doctest::Approx(p.y));
    // reverse exit is the identity
    const auto back = wrap_exit(g, w.point, HexSide::h4, w.cell);
    CHECK(back.cell == CellIndex{0, 0});
    CHECK(std::abs(back.point.x - p.x) < 1e-15);
    CHECK(std::abs(back.point.y - p.y) < 1e-15);

    for (const auto& h : g.hexagon()) {
        const Vec2 q = h.segment.start + h.segment.direction() * (0.61 * h.segment.length);
        const auto a = wrap_exit(g, q, h.label, {1, 3});
        CHECK(a.cell.valid_parity());
        CHECK(std::abs(g.hex_side(opposite(h.label)).segment.signed_distance(a.point)) < 1e-12);
        const auto b = wrap_exit(g, a.point, opposite(h.label), a.cell);
        CHECK(b.cell == CellIndex{1, 3});
        CHECK((b.point - q).norm() < 1e-14);
    }
    CHECK_THROWS_AS(wrap_exit(g, {0, 0}, HexSide::h1, {0, 0}), GeometryError);
}

TEST_CASE("birkhoff coordinates") {
    const auto g = default_geometry();
    const double l = g.side_length();
    // corners
    CHECK_THROWS_AS(birkhoff_coords({g.s_x(), 0}, g.side(SideLabel::r2), 0.0), CornerHitError);
    CHECK_THROWS_AS(birkhoff_coords({0, g.s_y()}, g.side(SideLabel::r1), 0.0), CornerHitError);

    // r runs clockwise from the right vertex: r2, r3, r4, r1
    const SideLabel order[] = {SideLabel::r2, SideLabel::r3, SideLabel::r4, SideLabel::r1};
    for (int k = 0; k < 4; ++k) {
        const auto& s = g.side(order[k]);
        const Vec2 mid = (s.segment.start + s.segment.end) * 0.5;
        // outgoing along the outward normal: eta = 0
        const double th = std::atan2(s.segment.normal.y, s.segment.normal.x);
        const auto b = birkhoff_coords(mid, s, th);
        CHECK(b.r == doctest::Approx((k + 0.5) * l));
        CHECK(std::abs(b.eta) < 1e-15);
    }
    // bijection: r increases continuously along the boundary
    double prev = -1;
    for (int k = 0; k < 4; ++k) {
        const auto& s = g.side(order[k]);
        for (int i = 1; i < 50; ++i) {
            const Vec2 p = s.segment.start + s.segment.direction() * (s.segment.length * i / 50.0);
            const double r = birkhoff_coords(p, s, 0.0).r;
            CHECK(r > prev);
            CHECK(r == doctest::Approx(k * l + s.segment.length * i / 50.0));
            prev = r;
        }
    }
    // eta is the cosine against the clockwise side direction
    const auto& s = g.side(SideLabel::r1);
    const Vec2 d = s.segment.direction();
    const double th = std::atan2(d.y, d.x) + 0.4;
    const Vec2 mid = (s.segment.start + s.segment.end) * 0.5;
    CHECK(birkhoff_coords(mid, s, th).eta == doctest::Approx(std::cos(0.4)));
}

TEST_CASE("labels") {
    CHECK(to_string(SideLabel::r3) == "r3");
    CHECK(parse_side_label("r4") == SideLabel::r4);
    CHECK(to_string(HexSide::h6) == "h6");
    CHECK(opposite(HexSide::h2) == HexSide::h5);
    CHECK(CellIndex{1, 3}.valid_parity());
    CHECK_FALSE(CellIndex{0, 1}.valid_parity());
    CHECK(CellIndex{-1, 1}.valid_parity());
}

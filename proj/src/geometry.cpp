#include "ehrenfest/geometry.hpp"

#include <cmath>
#include <sstream>

#include "ehrenfest/errors.hpp"

namespace ehrenfest {

namespace {

Segment make_segment(Vec2 a, Vec2 b, Vec2 centre) {
    Segment s;
    s.start = a;
    s.end = b;
    s.length = (b - a).norm();
    const Vec2 d = s.direction();
    Vec2 n{d.y, -d.x};
    if (n.dot(a - centre) < 0.0) n = -n;
    s.normal = n;
    s.offset = n.dot(a);
    return s;
}

}  // namespace

std::string_view to_string(SideLabel s) {
    static constexpr std::string_view names[] = {"r1", "r2", "r3", "r4"};
    return names[static_cast<int>(s)];
}

std::string_view to_string(HexSide h) {
    static constexpr std::string_view names[] = {"h1", "h2", "h3", "h4", "h5", "h6"};
    return names[static_cast<int>(h)];
}

std::string_view to_string(Horizon h) { return h == Horizon::Finite ? "finite" : "infinite"; }

SideLabel parse_side_label(std::string_view text) {
    for (int i = 0; i < 4; ++i) {
        const auto s = static_cast<SideLabel>(i);
        if (to_string(s) == text) return s;
    }
    throw GeometryError("unknown rhombus side label '" + std::string(text) + "'");
}

BilliardGeometry build_geometry(double L, double s_x, double s_y) {
    if (!(L > 0.0) || !std::isfinite(L)) throw GeometryError("L must be positive");
    if (!(s_x > 0.0) || !std::isfinite(s_x)) throw GeometryError("s_x must be positive");
    if (!(s_y > 0.0) || !std::isfinite(s_y)) throw GeometryError("s_y must be positive");

    BilliardGeometry g;
    g.L_ = L;
    g.s_x_ = s_x;
    g.s_y_ = s_y;
    g.x_L_ = std::sqrt(3.0) * L / 2.0;
    g.y_L_ = 3.0 * L / 2.0;
    g.side_length_ = std::hypot(s_x, s_y);
    g.theta_side_ = std::atan2(s_y, s_x);
    g.cell_area_ = 2.0 * g.x_L_ * g.y_L_;
    g.horizon_ = s_y >= g.y_L_ / 2.0 ? Horizon::Finite : Horizon::Infinite;

    const double max_side = std::sqrt(7.0) / 2.0 * L;
    if (g.side_length_ > max_side) {
        std::ostringstream os;
        os << "rhombus side " << g.side_length_ << " exceeds sqrt(7)/2 L = " << max_side;
        throw OverlapError(os.str());
    }
    if (s_x > g.x_L_) throw OverlapError("s_x exceeds x_L");
    // The top and bottom vertices must stay inside the hexagon, otherwise they
    // reach into the neighbouring cells.
    if (s_y > L) throw OverlapError("s_y exceeds L; rhombus leaves the hexagonal cell");

    const Vec2 centre{0.0, 0.0};
    const Vec2 top{0.0, s_y}, right{s_x, 0.0}, bottom{0.0, -s_y}, left{-s_x, 0.0};
    const double l = g.side_length_;
    g.rhombus_[0] = {SideLabel::r1, make_segment(top, right, centre), SlopeSign::Negative, 3.0 * l};
    g.rhombus_[1] = {SideLabel::r2, make_segment(right, bottom, centre), SlopeSign::Positive, 0.0};
    g.rhombus_[2] = {SideLabel::r3, make_segment(bottom, left, centre), SlopeSign::Negative, l};
    g.rhombus_[3] = {SideLabel::r4, make_segment(left, top, centre), SlopeSign::Positive, 2.0 * l};

    const double xl = g.x_L_, yl = g.y_L_;
    const std::array<Vec2, 6> v{Vec2{xl, L / 2}, Vec2{xl, -L / 2}, Vec2{0.0, -L},
                                Vec2{-xl, -L / 2}, Vec2{-xl, L / 2}, Vec2{0.0, L}};
    const std::array<std::array<std::int64_t, 2>, 6> steps{
        {{2, 0}, {1, -1}, {-1, -1}, {-2, 0}, {-1, 1}, {1, 1}}};
    for (int k = 0; k < 6; ++k) {
        HexagonSide& h = g.hexagon_[k];
        h.label = static_cast<HexSide>(k);
        h.segment = make_segment(v[k], v[(k + 1) % 6], centre);
        h.dm = steps[k][0];
        h.dn = steps[k][1];
        h.translation = {static_cast<double>(h.dm) * xl, static_cast<double>(h.dn) * yl};
    }
    return g;
}

BilliardGeometry default_geometry() { return build_geometry(1.291, 0.7573, 1.1); }

const std::array<RhombusSide, 4>& rhombus_sides(const BilliardGeometry& g) { return g.rhombus(); }

bool BilliardGeometry::inside_hexagon(const Vec2& p, double tol) const {
    for (const auto& h : hexagon_)
        if (h.segment.signed_distance(p) > tol) return false;
    return true;
}

bool BilliardGeometry::inside_rhombus(const Vec2& p, double tol) const {
    for (const auto& s : rhombus_)
        if (s.segment.signed_distance(p) > tol) return false;
    return true;
}

WrappedPoint wrap_exit(const BilliardGeometry& g, const Vec2& p, HexSide exit_side,
                       const CellIndex& cell, double tol) {
    const HexagonSide& h = g.hex_side(exit_side);
    const double d = h.segment.signed_distance(p);
    const double u = h.segment.arc_position(p);
    if (std::abs(d) > tol || u < -tol || u > h.segment.length + tol) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") is not on hexagon side " << to_string(exit_side);
        throw GeometryError(os.str());
    }
    return {p - h.translation, CellIndex{cell.m + h.dm, cell.n + h.dn}};
}

BirkhoffCoords birkhoff_coords(const Vec2& collision_point, const RhombusSide& side,
                               double theta_out) {
    const Segment& s = side.segment;
    const double u = s.arc_position(collision_point);
    if (u < kCornerTolerance || u > s.length - kCornerTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "collision at arc position " << u << " on " << to_string(side.label)
           << " is a corner hit";
        throw CornerHitError(os.str());
    }
    const Vec2 v{std::cos(theta_out), std::sin(theta_out)};
    return {side.arc_origin + u, v.dot(s.direction())};
}

}  // namespace ehrenfest

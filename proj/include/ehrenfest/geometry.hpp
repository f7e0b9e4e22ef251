#pragma once

// Triangular-lattice billiard table: one rhombus per hexagonal Wigner-Seitz
// cell. Cells are indexed by (m, n) with both even or both odd; the cell
// (m, n) is centred at (m * x_L, n * y_L).

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "ehrenfest/vec2.hpp"

namespace ehrenfest {

enum class Horizon { Finite, Infinite };
enum class SlopeSign { Positive, Negative };

/// Rhombus sides. r1 runs from the top vertex (0, s_y) to the right vertex
/// (s_x, 0); r2, r3, r4 follow clockwise.
enum class SideLabel : std::uint8_t { r1 = 0, r2 = 1, r3 = 2, r4 = 3 };

/// Hexagon sides. h1 is the right vertical side; h2..h6 follow clockwise.
enum class HexSide : std::uint8_t { h1 = 0, h2 = 1, h3 = 2, h4 = 3, h5 = 4, h6 = 5 };

inline constexpr double kCornerTolerance = 1e-12;

std::string_view to_string(SideLabel s);
std::string_view to_string(HexSide h);
std::string_view to_string(Horizon h);
SideLabel parse_side_label(std::string_view text);

constexpr int sign_of(SlopeSign s) { return s == SlopeSign::Positive ? 1 : -1; }

constexpr HexSide opposite(HexSide h) {
    return static_cast<HexSide>((static_cast<int>(h) + 3) % 6);
}

struct CellIndex {
    std::int64_t m{0};
    std::int64_t n{0};

    constexpr bool operator==(const CellIndex&) const = default;
    constexpr bool valid_parity() const { return ((m - n) % 2) == 0; }
};

/// A straight boundary segment with its outward normal. For rhombus sides the
/// normal points away from the rhombus centre; for hexagon sides it points out
/// of the cell. `offset` is normal . p for any point p on the line.
struct Segment {
    Vec2 start;
    Vec2 end;
    Vec2 normal;
    double offset{0.0};
    double length{0.0};

    Vec2 direction() const { return (end - start) * (1.0 / length); }
    double signed_distance(const Vec2& p) const { return normal.dot(p) - offset; }
    /// Arc-length position of the projection of p, measured from `start`.
    double arc_position(const Vec2& p) const { return (p - start).dot(direction()); }
};

struct RhombusSide {
    SideLabel label{SideLabel::r1};
    Segment segment;
    SlopeSign slope{SlopeSign::Positive};
    /// Birkhoff arc length of `segment.start`.
    double arc_origin{0.0};
};

struct HexagonSide {
    HexSide label{HexSide::h1};
    Segment segment;
    /// Offset from this cell's centre to the neighbour's centre.
    Vec2 translation;
    std::int64_t dm{0};
    std::int64_t dn{0};
};

class BilliardGeometry {
public:
    double L() const { return L_; }
    double s_x() const { return s_x_; }
    double s_y() const { return s_y_; }
    /// Half lattice spacing along x, sqrt(3) L / 2.
    double x_L() const { return x_L_; }
    /// Lattice spacing along y, 3 L / 2.
    double y_L() const { return y_L_; }
    /// Rhombus side length.
    double side_length() const { return side_length_; }
    /// Inclination of the rhombus sides to the x axis, atan(s_y / s_x).
    double theta_side() const { return theta_side_; }
    Horizon horizon() const { return horizon_; }
    /// Area of the hexagonal cell, 2 x_L y_L.
    double cell_area() const { return cell_area_; }

    const std::array<RhombusSide, 4>& rhombus() const { return rhombus_; }
    const RhombusSide& side(SideLabel s) const { return rhombus_[static_cast<int>(s)]; }
    const std::array<HexagonSide, 6>& hexagon() const { return hexagon_; }
    const HexagonSide& hex_side(HexSide h) const { return hexagon_[static_cast<int>(h)]; }

    /// Cell centre in the unfolded plane.
    Vec2 cell_origin(const CellIndex& c) const {
        return {static_cast<double>(c.m) * x_L_, static_cast<double>(c.n) * y_L_};
    }

    bool inside_hexagon(const Vec2& p, double tol = 0.0) const;
    bool inside_rhombus(const Vec2& p, double tol = 0.0) const;

private:
    friend BilliardGeometry build_geometry(double L, double s_x, double s_y);

    double L_{0}, s_x_{0}, s_y_{0}, x_L_{0}, y_L_{0};
    double side_length_{0}, theta_side_{0}, cell_area_{0};
    Horizon horizon_{Horizon::Finite};
    std::array<RhombusSide, 4> rhombus_{};
    std::array<HexagonSide, 6> hexagon_{};
};

/// Validates the parameters and derives the cell. Throws GeometryError for
/// non-positive inputs and OverlapError when the rhombus does not fit.
BilliardGeometry build_geometry(double L, double s_x, double s_y);

/// Default table: L = 1.291, s_x = 0.7573, s_y = 1.1.
BilliardGeometry default_geometry();

/// The four rhombus sides in label order.
const std::array<RhombusSide, 4>& rhombus_sides(const BilliardGeometry& g);

struct WrappedPoint {
    Vec2 point;
    CellIndex cell;
};

/// Moves a point leaving the cell through `exit_side` into the neighbouring
/// cell. Throws GeometryError if `p` is not on that side.
WrappedPoint wrap_exit(const BilliardGeometry& g, const Vec2& p, HexSide exit_side,
                       const CellIndex& cell, double tol = 1e-9);

struct BirkhoffCoords {
    /// Perimetral distance from the right vertex (s_x, 0), clockwise, in [0, 4l).
    double r{0.0};
    /// Cosine of the angle between the outgoing velocity and the side direction.
    double eta{0.0};
};

/// Throws CornerHitError within kCornerTolerance of a vertex.
BirkhoffCoords birkhoff_coords(const Vec2& collision_point, const RhombusSide& side,
                               double theta_out);

}  // namespace ehrenfest

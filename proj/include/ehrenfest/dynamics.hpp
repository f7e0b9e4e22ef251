#pragma once

// Thermostatted free flight and the elastic bounce map.
//
// With unit speed the state is (x, y, theta). Between collisions
//     theta' = -eps sin(theta),  x' = cos(theta),  y' = sin(theta),
// which integrates in closed form:
//     x(theta) = x0 - ln(sin theta / sin theta0) / eps
//     y(theta) = y0 - (theta - theta0) / eps
//     tan(theta / 2) = exp(-eps t) tan(theta0 / 2).
// |theta| decreases monotonically and keeps its sign, so each flight is
// parameterised by theta itself.

#include <utility>

#include "ehrenfest/geometry.hpp"

namespace ehrenfest {

inline constexpr double kThetaMin = 1e-14;
inline constexpr double kTimeCap = 1e6;
inline constexpr double kMinFlightTime = 1e-13;

struct ParticleState {
    double x{0.0};  ///< cell-local
    double y{0.0};  ///< cell-local
    double theta{0.0};
    CellIndex cell{};
    double t{0.0};

    Vec2 position() const { return {x, y}; }
};

struct FieldParams {
    double epsilon{0.0};
};

enum class EventKind { Collision, CellExit, CornerHit, Stalled };

std::string_view to_string(EventKind k);

struct CollisionInfo {
    SideLabel side{SideLabel::r1};
    Vec2 point;
    double theta_in{0.0};
    double theta_out{0.0};
    BirkhoffCoords birkhoff;
};

struct Event {
    EventKind kind{EventKind::Stalled};
    double dt{0.0};
    /// State at the event. For collisions theta is the outgoing angle.
    ParticleState state;
    /// Filled for Collision, and for CornerHit (side and point only).
    CollisionInfo collision;
    /// Filled for CellExit.
    HexSide exit_side{HexSide::h1};
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

/// Time to turn from theta0 to theta_t along a free flight. Throws DomainError
/// if theta_t is not between theta0 and 0, InfiniteTime for theta_t == 0.
double flight_time(double theta0, double theta_t, double eps);

/// State on the flight through s0 when the velocity angle reaches theta_t.
ParticleState flight_state_at(const ParticleState& s0, double theta_t, double eps);

/// Elastic reflection: theta' = -theta_in + 2 sigma theta_side, sigma the slope sign.
double reflect(double theta_in, const RhombusSide& side, const BilliardGeometry& g);

/// Earliest rhombus collision or hexagon exit along the flight from `s`.
Event next_event(const ParticleState& s, const BilliardGeometry& g, double eps);

struct StepResult {
    ParticleState state;
    Event event;
    int cell_exits{0};
};

/// Advances to the next rhombus collision, wrapping through cell boundaries.
/// The returned event's dt is the total flight time of the step.
StepResult step(const ParticleState& s, const BilliardGeometry& g, double eps);

/// Position in the unfolded plane, relative to the centre of `reference`.
Vec2 unfolded_position(const ParticleState& s, const BilliardGeometry& g,
                       const CellIndex& reference = {});

struct ConservedQuantities {
    double phi{0.0};   ///< theta + eps y
    double pi_y{0.0};  ///< exp(eps x) sin(theta)
};

/// Flight invariants in unfolded coordinates relative to `reference`.
ConservedQuantities conserved_quantities(const ParticleState& s, const BilliardGeometry& g,
                                         double eps, const CellIndex& reference = {});

/// Length of the flight between p0 and pt in the metric exp(2 eps x)(dx^2 + dy^2).
double path_length(const ParticleState& p0, const ParticleState& pt, const BilliardGeometry& g,
                   double eps, const CellIndex& reference = {});

}  // namespace ehrenfest

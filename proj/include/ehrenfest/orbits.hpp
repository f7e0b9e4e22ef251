#pragma once

// Periodic orbits of the bounce map: analytic families, Newton refinement of
// numerically seeded orbits, and stability/current analysis.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "ehrenfest/tangent.hpp"

namespace ehrenfest {

struct Symbol {
    CellIndex cell;
    SideLabel side{SideLabel::r1};

    bool operator==(const Symbol&) const = default;
};

/// One period of collisions, starting with the launch collision. Cells are
/// relative to the launch cell.
struct SymbolicSequence {
    std::vector<Symbol> symbols;

    std::size_t size() const { return symbols.size(); }
    /// True when every cell index obeys the lattice parity rule.
    bool valid() const;
    /// "(0,0,r3)(-1,-1,r1)..." ; with `closing`, the translated first symbol is appended.
    std::string to_string(const CellIndex* closing = nullptr) const;
};

enum class OrbitKind { Closed, Open };

std::string_view to_string(OrbitKind k);

struct OrbitSpec {
    std::string name;
    SymbolicSequence sequence;
    /// Cell translation after one period.
    CellIndex shift;
    double eps{0.0};
    /// Post-collision state on sequence.symbols[0].
    ParticleState ic;
    double period_tau{0.0};
    /// Unfolded displacement over one period.
    Vec2 displacement;
    OrbitKind kind{OrbitKind::Open};
};

struct OrbitStability {
    Matrix2 J_S;
    std::array<std::complex<double>, 2> eigenvalues;
    ExponentPair lambda;
    double current_j{0.0};
    /// |j + (lambda1 + lambda2) / eps|
    double identity_residual{0.0};
};

struct Interval {
    double lo{0.0};
    double hi{0.0};

    bool empty() const { return !(lo < hi); }
    bool contains(double v) const { return v > lo && v < hi; }
};

/// Field window 2 theta / (3L) < eps < 2 theta / (3L - 2 s_y) of the closed period-2 family.
Interval closed_period2_window(const BilliardGeometry& g);

/// Field at which the closed period-2 orbit whose flight peaks at abscissa
/// `x_apex` (velocity angle +-pi/2, height +-y_L) exists.
double closed_period2_field(const BilliardGeometry& g, double x_apex);

/// Closed period-2 orbit (R00,r4)(R02,r3) for branch > 0, its mirror
/// (R00,r3)(R0-2,r4) otherwise. Throws NoSuchOrbit outside the window or when
/// the flight is obstructed.
OrbitSpec closed_period2(const BilliardGeometry& g, double x_apex, int branch);

/// Admissible field range of the open period-2 family.
Interval open_period2_window(const BilliardGeometry& g);

/// Open period-2 orbit (R_ij,r4)(R_i+1,j+1,r3)(R_i+2,j,r4) for direction > 0,
/// (R_ij,r3)(R_i+1,j-1,r4)(R_i+2,j,r3) otherwise. Throws NoSuchOrbit.
OrbitSpec open_period2(const BilliardGeometry& g, double eps, int direction);

/// Same family selected by its symbolic pattern (three symbols, the last
/// closing the period). Unrealisable patterns throw NoSuchOrbit.
OrbitSpec open_period2(const BilliardGeometry& g, double eps, const std::vector<Symbol>& pattern);

/// (2 / eps) ln(1 / tan(pi/4 - theta)): the open period-2 period when the
/// launch is vertical. Throws NoSuchOrbit for theta_side >= pi/4.
double open_period2_vertical_launch_period(const BilliardGeometry& g, double eps);

/// Field at which the open period-2 orbit launches vertically.
double open_period2_vertical_launch_field(const BilliardGeometry& g);

/// Launch-abscissa window of the open period-4 family, given the outgoing
/// angle theta0 and the next incidence angle theta0p.
Interval open_period4_window(const BilliardGeometry& g, double eps, double theta0, double theta0p);

/// Newton refinement of a period-`period` orbit seeded at `seed` (a
/// post-collision state on a rhombus side). Throws NoSuchOrbit when it fails
/// to converge.
OrbitSpec refine_periodic_orbit(const BilliardGeometry& g, double eps, const ParticleState& seed,
                                int period, std::string name = "periodic");

/// Named orbits seeded from reference initial conditions:
/// "table2-row1" (eps 0.374), "table2-row2" (eps 0.5), "nineteen-point" (eps 0.087).
OrbitSpec named_orbit(const BilliardGeometry& g, const std::string& name);

/// Reference seed of a named orbit (before refinement).
struct OrbitSeed {
    double eps;
    ParticleState ic;
    int period;
    std::vector<Symbol> expected;  ///< empty when unknown
};
OrbitSeed named_orbit_seed(const std::string& name);
std::vector<std::string> named_orbit_names();

/// Side of the default cell whose segment contains p (within `tol`).
SideLabel side_at(const BilliardGeometry& g, const Vec2& p, double tol = 1e-9);

/// Simulates one period from o.ic. Returns max(|dr|, |d eta|) at closure.
/// Throws SequenceMismatch when the realised sequence or shift differs.
double verify_orbit(const OrbitSpec& o, const BilliardGeometry& g);

/// Reflection y -> -y of an orbit.
OrbitSpec mirror(const OrbitSpec& o);

/// Monodromy matrix over one period, composed along the simulated orbit.
OrbitStability orbit_stability(const OrbitSpec& o, const BilliardGeometry& g);

struct CurrentCheck {
    double j{0.0};
    double residual{0.0};
};

CurrentCheck orbit_current(const OrbitSpec& o, const OrbitStability& st);

}  // namespace ehrenfest

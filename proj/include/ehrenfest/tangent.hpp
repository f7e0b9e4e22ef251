#pragma once

// Linearised bounce map in the (theta, x) chart and Lyapunov exponents.
//
// A collision is charted by the outgoing angle theta and the abscissa x of
// the collision point (the ordinate is fixed by the side). Tangent vectors
// are (d theta, d x). One bounce contributes J_C * J_F, where J_F is the
// free-flight Jacobian from the source side to the target side (evaluated at
// the incidence angle) and J_C = diag(-1, 1) is the reflection.

#include <array>
#include <complex>

#include "ehrenfest/dynamics.hpp"

namespace ehrenfest {

struct Matrix2 {
    double a11{1.0}, a12{0.0}, a21{0.0}, a22{1.0};

    static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr Matrix2 operator*(const Matrix2& b) const {
        return {a11 * b.a11 + a12 * b.a21, a11 * b.a12 + a12 * b.a22,
                a21 * b.a11 + a22 * b.a21, a21 * b.a12 + a22 * b.a22};
    }
    constexpr std::array<double, 2> operator*(const std::array<double, 2>& v) const {
        return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]};
    }
    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double trace() const { return a11 + a22; }
    bool finite() const;
    /// Eigenvalues, ordered by decreasing modulus.
    std::array<std::complex<double>, 2> eigenvalues() const;
};

Matrix2 collision_jacobian();

/// Free-flight Jacobian between rhombus sides of the given slope signs.
/// `theta0` is the outgoing angle at the source side, `theta0p` the incidence
/// angle at the target side. Throws SingularConfiguration at grazing
/// incidence and DomainError for eps <= 0.
Matrix2 flight_jacobian(SlopeSign from, SlopeSign to, double theta0, double theta0p,
                        const BilliardGeometry& g, double eps);

/// Jacobian of one bounce: J_C * J_F.
Matrix2 bounce_jacobian(SlopeSign from, double theta_out_prev, const CollisionInfo& hit,
                        const BilliardGeometry& g, double eps);

struct TangentFrame {
    std::array<std::array<double, 2>, 2> basis{{{1.0, 0.0}, {0.0, 1.0}}};
    std::array<double, 2> log_sums{0.0, 0.0};
    double T{0.0};
    long long n{0};
    /// Running sum of log|det J|, for the determinant consistency check.
    double log_det_sum{0.0};
};

/// Propagates the frame by J, re-orthonormalises (QR with positive diagonal)
/// and accumulates the log stretches. `collisions` is the number of bounces
/// J spans. Throws DegenerateTangent if a stretch factor drops below 1e-300.
TangentFrame benettin_step(const TangentFrame& f, const Matrix2& J, double dt, int collisions = 1);

struct ExponentPair {
    double lambda1{0.0};
    double lambda2{0.0};
};

/// Per-unit-time exponents, lambda1 >= lambda2. Throws DomainError for T <= 0.
ExponentPair finite_time_exponents(const TangentFrame& f);

/// Per-collision exponents (secondary diagnostic). Throws DomainError for n == 0.
ExponentPair per_collision_exponents(const TangentFrame& f);

/// Follows a trajectory and feeds each bounce's Jacobian into a TangentFrame.
/// The flight from the initial state is not linearised; accumulation starts
/// at the first collision.
class LyapunovTracker {
public:
    LyapunovTracker(const BilliardGeometry& g, double eps) : g_(&g), eps_(eps) {}

    /// Feeds the result of ehrenfest::step. Non-collision events are ignored.
    void observe(const StepResult& r);

    const TangentFrame& frame() const { return frame_; }
    bool started() const { return have_prev_; }

private:
    const BilliardGeometry* g_;
    double eps_;
    TangentFrame frame_;
    bool have_prev_{false};
    SlopeSign prev_slope_{SlopeSign::Positive};
    double prev_theta_out_{0.0};
};

}  // namespace ehrenfest

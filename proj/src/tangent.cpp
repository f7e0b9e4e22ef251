#include "ehrenfest/tangent.hpp"

#include <cmath>
#include <sstream>

#include "ehrenfest/errors.hpp"

namespace ehrenfest {

bool Matrix2::finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
}

std::array<std::complex<double>, 2> Matrix2::eigenvalues() const {
    const double tr = trace();
    const double disc = tr * tr - 4.0 * det();
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // Avoid cancellation in the smaller root.
        const double big = 0.5 * (tr + std::copysign(root, tr));
        const double small = big != 0.0 ? det() / big : 0.0;
        return {std::complex<double>(big), std::complex<double>(small)};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

Matrix2 collision_jacobian() { return {-1.0, 0.0, 0.0, 1.0}; }

// Written with sines instead of the tangent form so that theta0 = +-pi/2 is
// regular. Multiplying numerator and denominator of each tangent expression
// by cos(theta) cos(theta') gives, with sigma_s / sigma_t the slope signs:
//   a11 = sin(th0 - sigma_t b) sin(th')  / (sin th0 sin(th' - sigma_t b))
//   a12 = (sigma_s - sigma_t) eps sin b sin th' / sin(th' - sigma_t b)
//   a21 = cos b sin(th' - th0) / (eps sin th0 sin(th' - sigma_t b))
//   a22 = sin(th' - sigma_s b) / sin(th' - sigma_t b)
Matrix2 flight_jacobian(SlopeSign from, SlopeSign to, double theta0, double theta0p,
                        const BilliardGeometry& g, double eps) {
    if (!(eps > 0.0)) throw DomainError("flight_jacobian requires eps > 0");
    const double b = g.theta_side();
    const double ss = sign_of(from), st = sign_of(to);
    const double denom = std::sin(theta0p - st * b);
    const double s0 = std::sin(theta0);
    if (std::abs(denom) < 1e-14 || std::abs(s0) < 1e-14) {
        std::ostringstream os;
        os << "singular flight Jacobian (theta0 = " << theta0 << ", theta0' = " << theta0p << ")";
        throw SingularConfiguration(os.str());
    }
    const double sp = std::sin(theta0p);
    Matrix2 J;
    J.a11 = std::sin(theta0 - st * b) * sp / (s0 * denom);
    J.a12 = (ss - st) * eps * std::sin(b) * sp / denom;
    J.a21 = std::cos(b) * std::sin(theta0p - theta0) / (eps * s0 * denom);
    J.a22 = std::sin(theta0p - ss * b) / denom;
    return J;
}

Matrix2 bounce_jacobian(SlopeSign from, double theta_out_prev, const CollisionInfo& hit,
                        const BilliardGeometry& g, double eps) {
    const SlopeSign to = g.side(hit.side).slope;
    return collision_jacobian() * flight_jacobian(from, to, theta_out_prev, hit.theta_in, g, eps);
}

TangentFrame benettin_step(const TangentFrame& f, const Matrix2& J, double dt, int collisions) {
    TangentFrame out = f;
    const auto v1 = J * f.basis[0];
    const auto v2 = J * f.basis[1];
    const double r11 = std::hypot(v1[0], v1[1]);
    if (!(r11 >= 1e-300) || !std::isfinite(r11)) throw DegenerateTangent("first tangent vector collapsed");
    const std::array<double, 2> q1{v1[0] / r11, v1[1] / r11};
    const double r12 = q1[0] * v2[0] + q1[1] * v2[1];
    std::array<double, 2> w{v2[0] - r12 * q1[0], v2[1] - r12 * q1[1]};
    double r22 = std::hypot(w[0], w[1]);
    if (!(r22 >= 1e-300) || !std::isfinite(r22)) throw DegenerateTangent("second tangent vector collapsed");
    std::array<double, 2> q2{w[0] / r22, w[1] / r22};
    // One more projection pass keeps the pair orthonormal to rounding.
    const double c = q1[0] * q2[0] + q1[1] * q2[1];
    q2 = {q2[0] - c * q1[0], q2[1] - c * q1[1]};
    const double nq2 = std::hypot(q2[0], q2[1]);
    q2 = {q2[0] / nq2, q2[1] / nq2};

    out.basis = {q1, q2};
    out.log_sums[0] += std::log(r11);
    out.log_sums[1] += std::log(r22);
    out.log_det_sum += std::log(std::abs(J.det()));
    out.T += dt;
    out.n += collisions;
    return out;
}

ExponentPair finite_time_exponents(const TangentFrame& f) {
    if (!(f.T > 0.0)) throw DomainError("exponents need elapsed time T > 0");
    double a = f.log_sums[0] / f.T, b = f.log_sums[1] / f.T;
    if (a < b) std::swap(a, b);
    return {a, b};
}

ExponentPair per_collision_exponents(const TangentFrame& f) {
    if (f.n <= 0) throw DomainError("exponents need at least one collision");
    const double n = static_cast<double>(f.n);
    double a = f.log_sums[0] / n, b = f.log_sums[1] / n;
    if (a < b) std::swap(a, b);
    return {a, b};
}

void LyapunovTracker::observe(const StepResult& r) {
    if (r.event.kind != EventKind::Collision) return;
    const CollisionInfo& hit = r.event.collision;
    if (have_prev_) {
        const Matrix2 J = bounce_jacobian(prev_slope_, prev_theta_out_, hit, *g_, eps_);
        frame_ = benettin_step(frame_, J, r.event.dt);
    }
    have_prev_ = true;
    prev_slope_ = g_->side(hit.side).slope;
    prev_theta_out_ = hit.theta_out;
}

}  // namespace ehrenfest

#pragma once

// Independent reference computations shared by the tests.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

// theta' = -eps sin theta, x' = cos theta, y' = sin theta
struct FlowState {
    double x, y, theta;
};

inline FlowState rhs(const FlowState& s, double eps) {
    return {std::cos(s.theta), std::sin(s.theta), -eps * std::sin(s.theta)};
}

inline FlowState rk4(FlowState s, double eps, double t, int steps) {
    const double h = t / steps;
    auto axpy = [](const FlowState& a, const FlowState& k, double c) {
        return FlowState{a.x + c * k.x, a.y + c * k.y, a.theta + c * k.theta};
    };
    for (int i = 0; i < steps; ++i) {
        const FlowState k1 = rhs(s, eps);
        const FlowState k2 = rhs(axpy(s, k1, h / 2), eps);
        const FlowState k3 = rhs(axpy(s, k2, h / 2), eps);
        const FlowState k4 = rhs(axpy(s, k3, h), eps);
        s.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
        s.theta += h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
    }
    return s;
}

// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

// Flight-map Jacobian in the tangent form, with b the side inclination.
// sign_from / sign_to are the slope signs (+1 / -1) of the two sides.
inline std::array<double, 4> tan_form_jacobian(int sign_from, int sign_to, double th0, double th0p, double b,
                                                double eps) {
    const double t0 = std::tan(th0), tp = std::tan(th0p), tb = std::tan(b);
    if (sign_from > 0 && sign_to < 0) {
        return {(t0 + tb) * tp / ((tp + tb) * t0), 2 * eps * tb * tp / (tp + tb),
                -1 / (eps * t0) * (t0 - tp) / (tp + tb), (tp - tb) / (tp + tb)};
    }
    if (sign_from < 0 && sign_to > 0) {
        return {-(t0 - tb) * tp / ((-tp + tb) * t0), 2 * eps * tb * tp / (-tp + tb),
                -1 / (eps * t0) * (tp - t0) / (tb - tp), (tp + tb) / (tp - tb)};
    }
    const double s = sign_from > 0 ? 1.0 : -1.0;
    return {(t0 - s * tb) * tp / ((tp - s * tb) * t0), 0.0, -1 / (eps * t0) * (t0 - tp) / (tp - s * tb), 1.0};
}

}  // namespace oracle

#include "ehrenfest/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "ehrenfest/errors.hpp"

namespace ehrenfest {

namespace {

constexpr double kPi = std::numbers::pi;

bool same_sign_and_inside(double theta0, double theta_t) {
    if (theta0 > 0.0) return theta_t >= 0.0 && theta_t <= theta0;
    if (theta0 < 0.0) return theta_t <= 0.0 && theta_t >= theta0;
    return theta_t == 0.0;
}

// ln(sin a / sin b) without cancellation when a is close to b.
double log_sine_ratio(double a, double b) {
    const double diff = 2.0 * std::cos(0.5 * (a + b)) * std::sin(0.5 * (a - b));
    return std::log1p(diff / std::sin(b));
}

// ln(tan(a/2) / tan(b/2)), same idea.
double log_half_tan_ratio(double a, double b) {
    const double ha = 0.5 * a, hb = 0.5 * b;
    return std::log1p(std::sin(ha - hb) / (std::cos(ha) * std::sin(hb)));
}

// Curved flight with eps > 0 and sin(theta0) != 0, parameterised by theta.
struct CurvedFlight {
    Vec2 p0;
    double theta0;
    double eps;

    Vec2 at(double theta) const {
        return {p0.x - log_sine_ratio(theta, theta0) / eps, p0.y - (theta - theta0) / eps};
    }
    double residual(const Segment& s, double theta) const { return s.signed_distance(at(theta)); }
    double residual_slope(const Segment& s, double theta) const {
        return -(s.normal.x * std::cos(theta) / std::sin(theta) + s.normal.y) / eps;
    }
};

// Angle at which the curved flight has travelled past the right edge of the
// cell; every exit happens before it.
double terminal_angle(const CurvedFlight& f, const BilliardGeometry& g) {
    const double reach = g.x_L() + 1.0 - f.p0.x;
    const double s = std::abs(std::sin(f.theta0)) * std::exp(-f.eps * reach);
    const double a = std::asin(s);
    return f.theta0 > 0.0 ? a : -a;
}

// Velocity angle, of the same sign as `sign_ref`, at which the flight runs
// parallel to the segment (the residual is stationary there).
std::optional<double> tangency_angle(const Segment& s, double sign_ref) {
    double a = std::atan2(s.normal.x, -s.normal.y);
    if ((a > 0.0) != (sign_ref > 0.0)) a = a > 0.0 ? a - kPi : a + kPi;
    if (a == 0.0) return std::nullopt;
    return a;
}

// Root of the residual between `a` (earlier) and `b` (later); signs differ.
double refine_root(const CurvedFlight& f, const Segment& s, double a, double fa, double b) {
    double lo = a, hi = b, flo = fa;
    double th = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const double r = f.residual(s, th);
        if (r == 0.0) return th;
        if ((r > 0.0) == (flo > 0.0)) {
            lo = th;
            flo = r;
        } else {
            hi = th;
        }
        const double d = f.residual_slope(s, th);
        double next = th - r / d;
        const double mn = std::min(lo, hi), mx = std::max(lo, hi);
        if (!(next > mn && next < mx)) next = 0.5 * (lo + hi);
        if (next == th || std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(th))
            return next;
        th = next;
    }
    return th;
}

enum class Crossing { Entering, Leaving };

// Earliest crossing of the segment's line in the requested direction
// (Entering: residual goes from > 0 to <= 0; Leaving: from < 0 to >= 0).
// Returns the angle of the crossing.
std::optional<double> curved_crossing(const CurvedFlight& f, const Segment& s, double theta_end,
                                      Crossing dir) {
    double knots[3];
    int nk = 0;
    knots[nk++] = f.theta0;
    if (auto star = tangency_angle(s, f.theta0)) {
        if (std::abs(*star) < std::abs(f.theta0) && std::abs(*star) > std::abs(theta_end))
            knots[nk++] = *star;
    }
    knots[nk++] = theta_end;

    double fa = f.residual(s, knots[0]);
    for (int i = 0; i + 1 < nk; ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double fb = f.residual(s, b);
        if (dir == Crossing::Entering) {
            if (fa > 0.0 && fb <= 0.0) return fb == 0.0 ? b : refine_root(f, s, a, fa, b);
        } else {
            if (i == 0 && fa >= 0.0 && fb > fa) return a;
            if (fa < 0.0 && fb >= 0.0) return fb == 0.0 ? b : refine_root(f, s, a, fa, b);
        }
        fa = fb;
    }
    return std::nullopt;
}

// Straight flight: returns time to the crossing.
std::optional<double> straight_crossing(const Vec2& p0, const Vec2& v, const Segment& s,
                                        Crossing dir) {
    const double f0 = s.signed_distance(p0);
    const double rate = s.normal.dot(v);
    if (dir == Crossing::Entering) {
        if (f0 > 0.0 && rate < 0.0) return f0 / -rate;
    } else {
        if (rate > 0.0) return f0 >= 0.0 ? 0.0 : -f0 / rate;
    }
    return std::nullopt;
}

Vec2 project_onto(const Segment& s, const Vec2& p) { return p - s.normal * s.signed_distance(p); }

struct Candidate {
    double dt{0.0};
    double theta{0.0};
    Vec2 point;
    int index{-1};  // 0..3 rhombus, 4..9 hexagon
};

}  // namespace

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Collision: return "collision";
        case EventKind::CellExit: return "cell_exit";
        case EventKind::CornerHit: return "corner_hit";
        case EventKind::Stalled: return "stalled";
    }
    return "?";
}

double normalize_angle(double theta) {
    double a = std::remainder(theta, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

double flight_time(double theta0, double theta_t, double eps) {
    if (theta_t == theta0) return 0.0;
    if (!same_sign_and_inside(theta0, theta_t)) {
        std::ostringstream os;
        os << "angle " << theta_t << " is not reachable from " << theta0 << " in free flight";
        throw DomainError(os.str());
    }
    if (theta_t == 0.0) throw InfiniteTime("the velocity angle reaches 0 only asymptotically");
    if (!(eps > 0.0)) throw DomainError("flight_time requires eps > 0");
    return log_half_tan_ratio(theta0, theta_t) / eps;
}

ParticleState flight_state_at(const ParticleState& s0, double theta_t, double eps) {
    if (theta_t == s0.theta) return s0;
    const double dt = flight_time(s0.theta, theta_t, eps);
    const CurvedFlight f{s0.position(), s0.theta, eps};
    const Vec2 p = f.at(theta_t);
    ParticleState s = s0;
    s.x = p.x;
    s.y = p.y;
    s.theta = theta_t;
    s.t = s0.t + dt;
    return s;
}

double reflect(double theta_in, const RhombusSide& side, const BilliardGeometry& g) {
    return normalize_angle(-theta_in + 2.0 * sign_of(side.slope) * g.theta_side());
}

Event next_event(const ParticleState& s, const BilliardGeometry& g, double eps) {
    const Vec2 p0 = s.position();
    const bool straight = eps == 0.0 || s.theta == 0.0 || std::abs(s.theta) == kPi;

    std::optional<Candidate> best;
    auto consider = [&](int index, double dt, double theta, Vec2 point) {
        if (!best || dt < best->dt) best = Candidate{dt, theta, point, index};
    };

    if (straight) {
        const Vec2 v{std::cos(s.theta), std::sin(s.theta)};
        for (int i = 0; i < 10; ++i) {
            const bool rh = i < 4;
            const Segment& seg = rh ? g.rhombus()[i].segment : g.hexagon()[i - 4].segment;
            auto t = straight_crossing(p0, v, seg, rh ? Crossing::Entering : Crossing::Leaving);
            if (!t || (rh && *t < kMinFlightTime)) continue;
            const Vec2 p = p0 + v * *t;
            const double u = seg.arc_position(p);
            if (u < -kCornerTolerance || u > seg.length + kCornerTolerance) continue;
            consider(i, *t, s.theta, p);
        }
    } else {
        const CurvedFlight f{p0, s.theta, eps};
        const double theta_end = terminal_angle(f, g);
        for (int i = 0; i < 10; ++i) {
            const bool rh = i < 4;
            const Segment& seg = rh ? g.rhombus()[i].segment : g.hexagon()[i - 4].segment;
            auto th = curved_crossing(f, seg, theta_end, rh ? Crossing::Entering : Crossing::Leaving);
            if (!th) continue;
            const double dt = *th == s.theta ? 0.0 : log_half_tan_ratio(s.theta, *th) / eps;
            if (rh && dt < kMinFlightTime) continue;
            if (best && dt >= best->dt) continue;
            const Vec2 p = f.at(*th);
            const double u = seg.arc_position(p);
            if (u < -kCornerTolerance || u > seg.length + kCornerTolerance) continue;
            consider(i, dt, *th, p);
        }
    }

    Event ev;
    if (!best || best->dt > kTimeCap) {
        ev.kind = EventKind::Stalled;
        ev.state = s;
        return ev;
    }

    ev.dt = best->dt;
    ev.state = s;
    ev.state.t = s.t + best->dt;
    ev.state.theta = best->theta;

    if (best->index < 4) {
        const RhombusSide& side = g.rhombus()[best->index];
        const Vec2 p = project_onto(side.segment, best->point);
        ev.state.x = p.x;
        ev.state.y = p.y;
        ev.collision.side = side.label;
        ev.collision.point = p;
        ev.collision.theta_in = best->theta;
        const double u = side.segment.arc_position(p);
        if (u < kCornerTolerance || u > side.segment.length - kCornerTolerance) {
            ev.kind = EventKind::CornerHit;
            return ev;
        }
        const double out = reflect(best->theta, side, g);
        ev.kind = EventKind::Collision;
        ev.collision.theta_out = out;
        ev.collision.birkhoff = birkhoff_coords(p, side, out);
        ev.state.theta = out;
    } else {
        const HexagonSide& h = g.hexagon()[best->index - 4];
        const Vec2 p = project_onto(h.segment, best->point);
        ev.kind = EventKind::CellExit;
        ev.exit_side = h.label;
        ev.state.x = p.x;
        ev.state.y = p.y;
    }
    return ev;
}

StepResult step(const ParticleState& s, const BilliardGeometry& g, double eps) {
    StepResult out;
    out.state = s;
    double elapsed = 0.0;
    for (;;) {
        Event ev = next_event(out.state, g, eps);
        elapsed += ev.dt;
        switch (ev.kind) {
            case EventKind::Collision:
            case EventKind::CornerHit:
            case EventKind::Stalled:
                out.state = ev.state;
                ev.dt = elapsed;
                out.event = ev;
                return out;
            case EventKind::CellExit: {
                const auto w = wrap_exit(g, ev.state.position(), ev.exit_side, ev.state.cell);
                out.state = ev.state;
                out.state.x = w.point.x;
                out.state.y = w.point.y;
                out.state.cell = w.cell;
                ++out.cell_exits;
                if (elapsed > kTimeCap) {
                    out.event.kind = EventKind::Stalled;
                    out.event.dt = elapsed;
                    out.event.state = out.state;
                    return out;
                }
                break;
            }
        }
    }
}

Vec2 unfolded_position(const ParticleState& s, const BilliardGeometry& g, const CellIndex& reference) {
    const CellIndex rel{s.cell.m - reference.m, s.cell.n - reference.n};
    return g.cell_origin(rel) + s.position();
}

ConservedQuantities conserved_quantities(const ParticleState& s, const BilliardGeometry& g,
                                         double eps, const CellIndex& reference) {
    const Vec2 p = unfolded_position(s, g, reference);
    return {s.theta + eps * p.y, std::exp(eps * p.x) * std::sin(s.theta)};
}

double path_length(const ParticleState& p0, const ParticleState& pt, const BilliardGeometry& g,
                   double eps, const CellIndex& reference) {
    if (!(eps > 0.0)) throw DomainError("path_length requires eps > 0");
    if (p0.theta == 0.0) throw DomainError("path_length is undefined for theta0 = 0");
    if (!same_sign_and_inside(p0.theta, pt.theta))
        throw DomainError("path_length needs both states on one flight");
    if (pt.theta == p0.theta) return 0.0;
    const double x0 = unfolded_position(p0, g, reference).x;
    const double cot0 = std::cos(p0.theta) / std::sin(p0.theta);
    const double cott = std::cos(pt.theta) / std::sin(pt.theta);
    return std::exp(eps * x0) * std::abs(std::sin(p0.theta)) * std::abs(cot0 - cott) / eps;
}

}  // namespace ehrenfest

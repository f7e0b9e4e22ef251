#include "ehrenfest/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ehrenfest/errors.hpp"

namespace ehrenfest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClosureTolerance = 1e-9;

SideLabel mirror_side(SideLabel s) {
    switch (s) {
        case SideLabel::r1: return SideLabel::r2;
        case SideLabel::r2: return SideLabel::r1;
        case SideLabel::r3: return SideLabel::r4;
        case SideLabel::r4: return SideLabel::r3;
    }
    return s;
}

CellIndex operator-(const CellIndex& a, const CellIndex& b) { return {a.m - b.m, a.n - b.n}; }
CellIndex operator+(const CellIndex& a, const CellIndex& b) { return {a.m + b.m, a.n + b.n}; }

// Point on the line of `side` with abscissa x (sides are never vertical).
Vec2 point_on_side(const RhombusSide& side, double x) {
    const Segment& s = side.segment;
    return {x, (s.offset - s.normal.x * x) / s.normal.y};
}

ParticleState state_on_side(const RhombusSide& side, double x, double theta, const CellIndex& cell) {
    const Vec2 p = point_on_side(side, x);
    return {p.x, p.y, theta, cell, 0.0};
}

struct PeriodRun {
    std::vector<Symbol> realized;  // collisions 1..period, cells relative to the start
    ParticleState end;
    SideLabel end_side{SideLabel::r1};
    Matrix2 monodromy;
    double tau{0.0};
    bool completed{false};
    std::string failure;
};

PeriodRun run_period(const BilliardGeometry& g, double eps, const ParticleState& start,
                     SideLabel start_side, int period) {
    PeriodRun run;
    ParticleState s = start;
    SlopeSign prev = g.side(start_side).slope;
    double prev_out = start.theta;
    for (int k = 0; k < period; ++k) {
        const StepResult r = step(s, g, eps);
        if (r.event.kind != EventKind::Collision) {
            run.failure = std::string(to_string(r.event.kind)) + " at collision " + std::to_string(k + 1);
            return run;
        }
        const CollisionInfo& hit = r.event.collision;
        run.realized.push_back({r.state.cell - start.cell, hit.side});
        if (eps > 0.0) {
            run.monodromy = bounce_jacobian(prev, prev_out, hit, g, eps) * run.monodromy;
        }
        prev = g.side(hit.side).slope;
        prev_out = hit.theta_out;
        run.tau += r.event.dt;
        s = r.state;
        run.end_side = hit.side;
    }
    run.end = s;
    run.completed = true;
    return run;
}

OrbitSpec finish_spec(const BilliardGeometry& g, std::string name, double eps, const ParticleState& ic,
                      SideLabel side, std::vector<Symbol> sequence_tail, const CellIndex& shift,
                      double tau) {
    OrbitSpec o;
    o.name = std::move(name);
    o.eps = eps;
    o.ic = ic;
    o.ic.t = 0.0;
    o.sequence.symbols.push_back({CellIndex{0, 0}, side});
    for (auto& s : sequence_tail) o.sequence.symbols.push_back(s);
    o.shift = shift;
    o.period_tau = tau;
    o.displacement = g.cell_origin(shift);
    o.kind = (shift.m == 0 && shift.n == 0) ? OrbitKind::Closed : OrbitKind::Open;
    return o;
}

// Verification gate for analytic constructions.
void require_verified(const OrbitSpec& o, const BilliardGeometry& g) {
    double residual = 0.0;
    try {
        residual = verify_orbit(o, g);
    } catch (const SequenceMismatch& e) {
        throw NoSuchOrbit(o.name + ": verification failed, realized " + e.realized());
    } catch (const Error& e) {
        throw NoSuchOrbit(o.name + ": verification failed, " + e.what());
    }
    if (!(residual < kClosureTolerance)) {
        std::ostringstream os;
        os << o.name << ": closure residual " << residual << " exceeds " << kClosureTolerance;
        throw NoSuchOrbit(os.str());
    }
}

}  // namespace

bool SymbolicSequence::valid() const {
    // Any lattice translation is allowed between collisions (a flight may cross
    // several cells); only the parity rule constrains the indices.
    return std::all_of(symbols.begin(), symbols.end(),
                       [](const Symbol& s) { return s.cell.valid_parity(); });
}

std::string SymbolicSequence::to_string(const CellIndex* closing) const {
    std::ostringstream os;
    auto put = [&os](const CellIndex& c, SideLabel s) {
        os << '(' << c.m << ',' << c.n << ',' << ehrenfest::to_string(s) << ')';
    };
    for (const auto& s : symbols) put(s.cell, s.side);
    if (closing && !symbols.empty()) put(symbols.front().cell + *closing, symbols.front().side);
    return os.str();
}

std::string_view to_string(OrbitKind k) { return k == OrbitKind::Closed ? "closed" : "open"; }

SideLabel side_at(const BilliardGeometry& g, const Vec2& p, double tol) {
    double best = std::numeric_limits<double>::infinity();
    const RhombusSide* found = nullptr;
    for (const auto& side : g.rhombus()) {
        const double d = std::abs(side.segment.signed_distance(p));
        const double u = side.segment.arc_position(p);
        if (d <= tol && u >= -tol && u <= side.segment.length + tol && d < best) {
            best = d;
            found = &side;
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") is not on the rhombus boundary";
        throw GeometryError(os.str());
    }
    return found->label;
}

Interval closed_period2_window(const BilliardGeometry& g) {
    const double b = g.theta_side(), L = g.L();
    return {2.0 * b / (3.0 * L), 2.0 * b / (3.0 * L - 2.0 * g.s_y())};
}

double closed_period2_field(const BilliardGeometry& g, double x_apex) {
    const double b = g.theta_side();
    const double m = std::tan(b);
    const double denom = -g.y_L() + m * x_apex + g.s_y();
    if (!(denom < 0.0)) throw NoSuchOrbit("closed period-2: apex abscissa gives no positive field");
    return (-b + m * std::log(std::cos(b))) / denom;
}

OrbitSpec closed_period2(const BilliardGeometry& g, double x_apex, int branch) {
    const double eps = closed_period2_field(g, x_apex);
    const Interval window = closed_period2_window(g);
    if (!window.contains(eps)) {
        std::ostringstream os;
        os << "closed period-2: field " << eps << " outside (" << window.lo << ", " << window.hi << ")";
        throw NoSuchOrbit(os.str());
    }
    const double b = g.theta_side();
    // Launch point: go back from the apex (angle pi/2) to angle pi/2 + b.
    const double x_launch = x_apex - std::log(std::cos(b)) / eps;
    const RhombusSide& r4 = g.side(SideLabel::r4);
    const Vec2 p = point_on_side(r4, x_launch);
    const double y_check = g.y_L() - b / eps;
    if (std::abs(p.y - y_check) > 1e-9 * std::max(1.0, std::abs(p.y)))
        throw NoSuchOrbit("closed period-2: launch point is off the side");
    if (!(x_launch > -g.s_x() && x_launch < 0.0))
        throw NoSuchOrbit("closed period-2: launch point outside side r4");

    const double tau = 2.0 / eps *
                       std::log(std::tan(kPi / 4 + b / 2) / std::tan(kPi / 4 - b / 2));
    OrbitSpec o = finish_spec(g, "closed-period2", eps, {p.x, p.y, kPi / 2 + b, {}, 0.0},
                              SideLabel::r4, {{CellIndex{0, 2}, SideLabel::r3}}, CellIndex{0, 0}, tau);
    if (branch < 0) o = mirror(o);
    require_verified(o, g);
    return o;
}

Interval open_period2_window(const BilliardGeometry& g) {
    const double b = g.theta_side();
    const double gap = g.y_L() - 2.0 * g.s_y();
    return {2.0 * b / g.y_L(), gap > 0.0 ? 2.0 * b / gap : std::numeric_limits<double>::infinity()};
}

// The period is two mirror-image legs. Leg one leaves r4 at angle a and hits
// the r3 side of the upper-right neighbour at angle b with a - b = 2 theta
// (so the outgoing angles alternate a, -a). The legs advance x_L each, which
// fixes ln(sin a / sin b) = eps x_L; the ordinate of the launch point follows
// from the rise 2 theta / eps of each leg.
OrbitSpec open_period2(const BilliardGeometry& g, double eps, int direction) {
    if (!(eps > 0.0)) throw NoSuchOrbit("open period-2 requires eps > 0");
    const Interval window = open_period2_window(g);
    if (!window.contains(eps)) {
        std::ostringstream os;
        os << "open period-2: field " << eps << " outside (" << window.lo << ", " << window.hi << ")";
        throw NoSuchOrbit(os.str());
    }
    const double th = g.theta_side();
    const double K = eps * g.x_L();
    const double b = std::atan2(std::sin(2.0 * th), std::exp(K) - std::cos(2.0 * th));
    const double a = b + 2.0 * th;
    if (!(a < kPi)) throw NoSuchOrbit("open period-2: launch angle leaves (0, pi)");
    const double x_launch = (g.y_L() - 2.0 * g.s_y() - 2.0 * th / eps) / (2.0 * std::tan(th));
    if (!(x_launch > -g.s_x() && x_launch < 0.0))
        throw NoSuchOrbit("open period-2: launch point outside side r4");
    const Vec2 p = point_on_side(g.side(SideLabel::r4), x_launch);
    const double half = 0.5;
    const double tau = 2.0 / eps * std::log(std::tan(half * a) / std::tan(half * b));
    OrbitSpec o = finish_spec(g, "open-period2", eps, {p.x, p.y, a, {}, 0.0}, SideLabel::r4,
                              {{CellIndex{1, 1}, SideLabel::r3}}, CellIndex{2, 0}, tau);
    if (direction < 0) o = mirror(o);
    require_verified(o, g);
    return o;
}

OrbitSpec open_period2(const BilliardGeometry& g, double eps, const std::vector<Symbol>& pattern) {
    if (pattern.size() != 3) throw NoSuchOrbit("open period-2 pattern needs three symbols");
    const CellIndex base = pattern[0].cell;
    struct Rel {
        SideLabel s0;
        std::int64_t m1, n1;
        SideLabel s1;
        std::int64_t m2, n2;
        SideLabel s2;
    };
    auto matches = [&](const Rel& r) {
        const CellIndex c1 = pattern[1].cell - base, c2 = pattern[2].cell - base;
        return pattern[0].side == r.s0 && pattern[1].side == r.s1 && pattern[2].side == r.s2 &&
               c1 == CellIndex{r.m1, r.n1} && c2 == CellIndex{r.m2, r.n2};
    };
    using enum SideLabel;
    if (matches({r4, 1, 1, r3, 2, 0, r4})) return open_period2(g, eps, +1);
    if (matches({r3, 1, -1, r4, 2, 0, r3})) return open_period2(g, eps, -1);
    if (matches({r4, -1, 1, r2, 2, 0, r4}) || matches({r1, 3, 1, r3, 2, 0, r1}))
        throw NoSuchOrbit("open period-2: this symbolic sequence cannot be realized");
    throw NoSuchOrbit("not an open period-2 pattern");
}

double open_period2_vertical_launch_period(const BilliardGeometry& g, double eps) {
    const double t = std::tan(kPi / 4 - g.theta_side());
    if (!(t > 0.0)) throw NoSuchOrbit("vertical-launch period needs theta_side < pi/4");
    return 2.0 / eps * std::log(1.0 / t);
}

double open_period2_vertical_launch_field(const BilliardGeometry& g) {
    const double c = std::cos(2.0 * g.theta_side());
    if (!(c > 0.0)) throw NoSuchOrbit("vertical launch needs theta_side < pi/4");
    return -std::log(c) / g.x_L();
}

Interval open_period4_window(const BilliardGeometry& g, double eps, double theta0, double theta0p) {
    if (!(eps > 0.0)) throw DomainError("open_period4_window requires eps > 0");
    const double ratio = std::sin(theta0p) / std::sin(theta0);
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw DomainError("open_period4_window: sine ratio must be positive");
    const double shift = std::log(ratio) / eps;
    return {std::max(-g.s_x(), -g.x_L() + shift), std::min(-g.x_L() + g.s_x() + shift, 0.0)};
}

OrbitSpec refine_periodic_orbit(const BilliardGeometry& g, double eps, const ParticleState& seed,
                                int period, std::string name) {
    if (period < 1) throw NoSuchOrbit("period must be positive");
    if (!(eps > 0.0)) throw NoSuchOrbit("orbit refinement requires eps > 0");
    const SideLabel side0 = side_at(g, seed.position());
    const RhombusSide& side = g.side(side0);

    double theta = seed.theta, x = seed.x;
    std::vector<Symbol> reference;
    CellIndex shift{};

    auto evaluate = [&](double th, double xx, std::array<double, 2>& F, PeriodRun& run) {
        run = run_period(g, eps, state_on_side(side, xx, th, seed.cell), side0, period);
        if (!run.completed || run.end_side != side0) return false;
        if (!reference.empty() && run.realized != reference) return false;
        F = {normalize_angle(run.end.theta - th), run.end.x - xx};
        return true;
    };

    std::array<double, 2> F{};
    PeriodRun run;
    if (!evaluate(theta, x, F, run))
        throw NoSuchOrbit(name + ": seed does not return to its side after " + std::to_string(period) +
                          " collisions" + (run.failure.empty() ? "" : " (" + run.failure + ")"));
    reference = run.realized;
    shift = run.end.cell - seed.cell;

    auto norm = [](const std::array<double, 2>& v) { return std::max(std::abs(v[0]), std::abs(v[1])); };
    for (int iter = 0; iter < 60 && norm(F) > 1e-14; ++iter) {
        const Matrix2 A{run.monodromy.a11 - 1.0, run.monodromy.a12, run.monodromy.a21,
                        run.monodromy.a22 - 1.0};
        const double det = A.det();
        if (std::abs(det) < 1e-300) throw NoSuchOrbit(name + ": singular Newton system");
        const double d_theta = -(A.a22 * F[0] - A.a12 * F[1]) / det;
        const double d_x = -(-A.a21 * F[0] + A.a11 * F[1]) / det;
        double damping = 1.0;
        bool accepted = false;
        for (int h = 0; h < 40; ++h, damping *= 0.5) {
            std::array<double, 2> F2{};
            PeriodRun run2;
            if (evaluate(theta + damping * d_theta, x + damping * d_x, F2, run2) &&
                norm(F2) < norm(F)) {
                theta += damping * d_theta;
                x += damping * d_x;
                F = F2;
                run = std::move(run2);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (norm(F) > 1e-11) {
        std::ostringstream os;
        os << name << ": Newton refinement stalled at residual " << norm(F);
        throw NoSuchOrbit(os.str());
    }

    ParticleState ic = state_on_side(side, x, theta, seed.cell);
    std::vector<Symbol> tail(reference.begin(), reference.end() - 1);
    return finish_spec(g, std::move(name), eps, ic, side0, std::move(tail), shift, run.tau);
}

std::vector<std::string> named_orbit_names() { return {"table2-row1", "table2-row2", "nineteen-point"}; }

OrbitSeed named_orbit_seed(const std::string& name) {
    using enum SideLabel;
    if (name == "table2-row1")
        return {0.374,
                {-0.48971578282741385, -0.3886737605834475, -2.06199461833, {}, 0.0},
                4,
                {{{0, 0}, r3}, {{-1, -1}, r1}, {{1, -1}, r4}, {{0, 0}, r2}}};
    if (name == "table2-row2")
        // Also written (R00,r4)(R-1,1,r2)(R11,r3)(R00,r1); the seed sits on r1.
        return {0.5,
                {0.30576674801010, 0.6558650167554337, -0.31873995693500, {}, 0.0},
                4,
                {{{0, 0}, r1}, {{2, 0}, r4}, {{1, 1}, r2}, {{3, 1}, r3}}};
    if (name == "nineteen-point")
        return {0.087, {0.418447478686, 0.492193019206, 0.718794450586, {}, 0.0}, 19, {}};
    throw NoSuchOrbit("unknown named orbit '" + name + "'");
}

OrbitSpec named_orbit(const BilliardGeometry& g, const std::string& name) {
    const OrbitSeed seed = named_orbit_seed(name);
    OrbitSpec o = refine_periodic_orbit(g, seed.eps, seed.ic, seed.period, name);
    if (!seed.expected.empty() && o.sequence.symbols != seed.expected) {
        SymbolicSequence want{seed.expected};
        throw SequenceMismatch(name + ": expected " + want.to_string(), o.sequence.to_string(&o.shift));
    }
    return o;
}

double verify_orbit(const OrbitSpec& o, const BilliardGeometry& g) {
    const auto& seq = o.sequence.symbols;
    if (seq.empty()) throw SequenceMismatch("empty symbolic sequence", "");
    const SideLabel side0 = seq.front().side;
    const BirkhoffCoords start = birkhoff_coords(o.ic.position(), g.side(side0), o.ic.theta);
    const int period = static_cast<int>(seq.size());
    const PeriodRun run = run_period(g, o.eps, o.ic, side0, period);

    SymbolicSequence realized{run.realized};
    if (!run.completed)
        throw SequenceMismatch(o.name + ": orbit interrupted by " + run.failure, realized.to_string());
    std::vector<Symbol> expected(seq.begin() + 1, seq.end());
    expected.push_back({seq.front().cell + o.shift, side0});
    if (run.realized != expected) {
        SymbolicSequence want{expected};
        throw SequenceMismatch(o.name + ": expected " + want.to_string(), realized.to_string());
    }
    const BirkhoffCoords end = birkhoff_coords(run.end.position(), g.side(side0), run.end.theta);
    return std::max(std::abs(end.r - start.r), std::abs(end.eta - start.eta));
}

OrbitSpec mirror(const OrbitSpec& o) {
    OrbitSpec m = o;
    m.name = o.name + "-mirror";
    m.ic.y = -o.ic.y;
    m.ic.theta = normalize_angle(-o.ic.theta);
    m.ic.cell.n = -o.ic.cell.n;
    for (auto& s : m.sequence.symbols) {
        s.side = mirror_side(s.side);
        s.cell.n = -s.cell.n;
    }
    m.shift.n = -o.shift.n;
    m.displacement.y = -o.displacement.y;
    return m;
}

OrbitStability orbit_stability(const OrbitSpec& o, const BilliardGeometry& g) {
    if (!(o.eps > 0.0)) throw DomainError("orbit_stability requires eps > 0");
    if (!(o.period_tau > 0.0)) throw DomainError("orbit period must be positive");
    const double residual = verify_orbit(o, g);
    if (!(residual < kClosureTolerance)) {
        std::ostringstream os;
        os << o.name << ": closure residual " << residual << " too large for stability analysis";
        throw NoSuchOrbit(os.str());
    }
    const PeriodRun run = run_period(g, o.eps, o.ic, o.sequence.symbols.front().side,
                                     static_cast<int>(o.sequence.size()));
    OrbitStability st;
    st.J_S = run.monodromy;
    st.eigenvalues = st.J_S.eigenvalues();
    double l1 = std::log(std::abs(st.eigenvalues[0])) / o.period_tau;
    double l2 = std::log(std::abs(st.eigenvalues[1])) / o.period_tau;
    if (l1 < l2) std::swap(l1, l2);
    st.lambda = {l1, l2};
    st.current_j = o.displacement.x / o.period_tau;
    st.identity_residual = std::abs(st.current_j + (l1 + l2) / o.eps);
    return st;
}

CurrentCheck orbit_current(const OrbitSpec& o, const OrbitStability& st) {
    const double j = o.displacement.x / o.period_tau;
    return {j, std::abs(j + (st.lambda.lambda1 + st.lambda.lambda2) / o.eps)};
}

}  // namespace ehrenfest

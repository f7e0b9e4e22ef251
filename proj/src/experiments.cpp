#include "ehrenfest/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "ehrenfest/errors.hpp"

namespace ehrenfest {

namespace {

constexpr double kPi = std::numbers::pi;

bool same_point(const BouncePoint& a, const BouncePoint& b, double tol) {
    return a.side == b.side && std::abs(a.r - b.r) < tol && std::abs(a.eta - b.eta) < tol;
}

// Run lengths of consecutive matches against the point p bounces earlier, for
// every p <= kMaxPeriod.
class RecurrenceTracker {
public:
    // Returns the period once a run reaches the window.
    std::optional<int> push(const BouncePoint& b) {
        ++count_;
        std::optional<int> hit;
        for (int p = 1; p <= kMaxPeriod; ++p) {
            if (count_ > p && same_point(b, history_[(count_ - 1 - p) % kMaxPeriod], kRecurrenceTolerance)) {
                ++run_[p];
                if (!hit && run_[p] >= kRecurrenceWindow) hit = p;
            } else {
                run_[p] = 0;
            }
        }
        history_[(count_ - 1) % kMaxPeriod] = b;
        return hit;
    }
    long long run(int p) const { return run_[p]; }

private:
    std::array<BouncePoint, kMaxPeriod> history_{};
    std::array<long long, kMaxPeriod + 1> run_{};
    long long count_{0};
};

bool log_sample(long long n) {
    if (n <= 1000) return true;
    long long stride = 1;
    for (long long v = n; v >= 1000; v /= 10) stride *= 10;
    return n % stride == 0;
}

ExponentPair safe_exponents(const TangentFrame& f) {
    return f.T > 0.0 ? finite_time_exponents(f) : ExponentPair{};
}

template <class Task>
void parallel_for(std::size_t count, int threads, Task task) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
    }
}

SweepRecord sweep_point(double param, const RunConfig& cfg) {
    SweepRecord rec;
    rec.param = param;
    rec.seed = cfg.seed;
    try {
        const TrajectoryStats st = run_trajectory(cfg);
        rec.lambda1 = st.lambda.lambda1;
        rec.lambda2 = st.lambda.lambda2;
        rec.tail = st.tail;
        rec.classification = classify(st);
        rec.N_c = st.N_c;
        rec.coverage = theta_coverage(st.tail);
        rec.termination = st.termination;
        if (st.termination != Termination::Completed) rec.error = st.message;
    } catch (const Error& e) {
        rec.termination = Termination::NumericalFailure;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::CornerHit: return "corner-hit";
        case Termination::Stalled: return "stalled";
        case Termination::NumericalFailure: return "numerical-failure";
        case Termination::Converged: return "converged";
    }
    return "?";
}

void validate(const RunConfig& cfg) {
    const auto& g = cfg.geometry;
    if (!(g.L > 0.0) || !std::isfinite(g.L)) throw ConfigError("geometry.L", "must be positive");
    if (!(g.s_x > 0.0) || !std::isfinite(g.s_x)) throw ConfigError("geometry.s_x", "must be positive");
    if (!(g.s_y > 0.0) || !std::isfinite(g.s_y)) throw ConfigError("geometry.s_y", "must be positive");
    try {
        build_geometry(g.L, g.s_x, g.s_y);
    } catch (const Error& e) {
        throw ConfigError("geometry", e.what());
    }
    if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) throw ConfigError("eps", "must be positive");
    if (cfg.n_collisions < 1) throw ConfigError("run.n_collisions", "must be at least 1");
    if (cfg.tail_size < 0) throw ConfigError("run.tail_size", "must be non-negative");
    if (cfg.thinning.kind == ThinningPolicy::Kind::Every && cfg.thinning.every < 1)
        throw ConfigError("run.thinning.every", "must be at least 1");
}

ParticleState random_initial_state(const BilliardGeometry& g, Rng& rng) {
    for (;;) {
        const Vec2 p{(2.0 * rng.uniform() - 1.0) * g.x_L(), (2.0 * rng.uniform() - 1.0) * g.y_L()};
        const double theta = kPi - 2.0 * kPi * rng.uniform();
        if (g.inside_hexagon(p) && !g.inside_rhombus(p, 1e-12)) return {p.x, p.y, theta, {}, 0.0};
    }
}

TrajectoryStats run_trajectory(const RunConfig& cfg) { return run_trajectory(cfg, RunControl{}).stats; }

TrajectoryRun run_trajectory(const RunConfig& cfg, const RunControl& control) {
    validate(cfg);
    const BilliardGeometry g = build_geometry(cfg.geometry.L, cfg.geometry.s_x, cfg.geometry.s_y);
    TrajectoryRun out;
    TrajectoryStats& st = out.stats;
    if (cfg.ic) {
        st.initial = *cfg.ic;
        if (g.inside_rhombus(st.initial.position(), -1e-12))
            throw ConfigError("ic", "initial point lies inside the obstacle");
    } else {
        Rng rng(cfg.seed);
        st.initial = random_initial_state(g, rng);
    }

    const auto tail_cap = static_cast<std::size_t>(std::min(cfg.tail_size, cfg.n_collisions));
    std::vector<BouncePoint> ring;
    ring.reserve(tail_cap);
    std::size_t ring_head = 0;

    LyapunovTracker tracker(g, cfg.eps);
    RecurrenceTracker recurrence;
    long long detected_at = -1;
    int period = 0;

    ParticleState s = st.initial;
    for (long long n = 1; n <= cfg.n_collisions; ++n) {
        StepResult r;
        try {
            r = step(s, g, cfg.eps);
        } catch (const Error& e) {
            st.termination = Termination::NumericalFailure;
            st.message = e.what();
            break;
        }
        if (r.event.kind != EventKind::Collision) {
            st.termination = r.event.kind == EventKind::CornerHit ? Termination::CornerHit : Termination::Stalled;
            st.message = std::string(to_string(r.event.kind)) + " after " + std::to_string(n - 1) + " collisions";
            break;
        }
        try {
            tracker.observe(r);
        } catch (const Error& e) {
            st.termination = Termination::NumericalFailure;
            st.message = e.what();
            break;
        }
        s = r.state;
        st.time += r.event.dt;
        st.collisions = n;

        const CollisionInfo& hit = r.event.collision;
        const BouncePoint b{n, st.time, s.cell, hit.side, hit.birkhoff.r, hit.birkhoff.eta, hit.theta_out, r.event.dt};
        if (tail_cap > 0) {
            if (ring.size() < tail_cap) {
                ring.push_back(b);
            } else {
                ring[ring_head] = b;
                ring_head = (ring_head + 1) % tail_cap;
            }
        }

        const auto hit_p = recurrence.push(b);
        if (detected_at < 0 && hit_p) {
            detected_at = n;
            period = *hit_p;
            st.recurrence_period = period;
            st.N_c = n - recurrence.run(period) + 1 - period;
        }

        const bool sample = n == cfg.n_collisions || (cfg.thinning.kind == ThinningPolicy::Kind::Every
                                                           ? n % cfg.thinning.every == 0
                                                           : log_sample(n));
        if (sample) {
            const ExponentPair l = safe_exponents(tracker.frame());
            st.series.push_back({n, tracker.frame().T, l.lambda1, l.lambda2});
        }
        if (control.record_phase_locked && detected_at >= 0 && (n - detected_at) % period == 0) {
            const ExponentPair l = safe_exponents(tracker.frame());
            out.phase_samples.push_back({n, l.lambda1, l.lambda2});
        }
        if (control.stop_after_recurrence >= 0 && detected_at >= 0 &&
            n - detected_at >= control.stop_after_recurrence) {
            st.termination = Termination::Converged;
            break;
        }
    }

    if (!st.series.empty() && st.series.back().n != st.collisions && st.collisions > 0) {
        const ExponentPair l = safe_exponents(tracker.frame());
        st.series.push_back({st.collisions, tracker.frame().T, l.lambda1, l.lambda2});
    }
    st.tail.reserve(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) st.tail.push_back(ring[(ring_head + i) % ring.size()]);
    st.final_state = s;
    st.frame = tracker.frame();
    st.lambda = safe_exponents(st.frame);
    const Vec2 d = unfolded_position(s, g) - unfolded_position(st.initial, g);
    st.dx = d.x;
    st.dy = d.y;
    return out;
}

std::optional<int> detect_periodicity(const std::vector<BouncePoint>& tail, double tol, int p_max) {
    const int n = static_cast<int>(tail.size());
    for (int p = 1; p <= p_max && 2 * p <= n; ++p) {
        bool ok = true;
        for (int k = p; k < n && ok; ++k) ok = same_point(tail[k], tail[k - p], tol);
        if (ok) return p;
    }
    return std::nullopt;
}

std::string to_string(const Classification& c) {
    switch (c.kind) {
        case ClassKind::Periodic: return "Periodic(" + std::to_string(c.period) + ")";
        case ClassKind::QuasiPeriodicOrUnresolved: return "QuasiPeriodicOrUnresolved";
        case ClassKind::ApparentlyChaotic: return "ApparentlyChaotic";
    }
    return "?";
}

Classification classify(const TrajectoryStats& stats) {
    if (const auto p = detect_periodicity(stats.tail)) return {ClassKind::Periodic, *p};
    if (stats.frame.T > 0.0 && stats.lambda.lambda1 > kChaosThreshold) return {ClassKind::ApparentlyChaotic, 0};
    return {ClassKind::QuasiPeriodicOrUnresolved, 0};
}

double theta_coverage(const std::vector<BouncePoint>& tail) {
    std::array<bool, kCoverageBins> hit{};
    for (const auto& b : tail) {
        // theta in (-pi, pi]; bin 0 starts just above -pi.
        int k = static_cast<int>(std::floor((b.theta + kPi) / (2.0 * kPi) * kCoverageBins));
        k = std::clamp(k, 0, kCoverageBins - 1);
        hit[k] = true;
    }
    return static_cast<double>(std::count(hit.begin(), hit.end(), true)) / kCoverageBins;
}

LinearFit fit_inverse_n(const std::vector<double>& n, const std::vector<double>& y) {
    if (n.size() != y.size() || n.size() < 2) throw DomainError("1/n fit needs at least two samples");
    const double m = static_cast<double>(n.size());
    double su = 0, sy = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        su += 1.0 / n[i];
        sy += y[i];
    }
    const double mu = su / m, my = sy / m;
    double suu = 0, suy = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double du = 1.0 / n[i] - mu;
        suu += du * du;
        suy += du * (y[i] - my);
    }
    if (!(suu > 0.0)) throw DomainError("1/n fit needs distinct abscissae");
    LinearFit f;
    f.b = suy / suu;
    f.a = my - f.b * mu;
    double ss = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double e = y[i] - f.a - f.b / n[i];
        ss += e * e;
    }
    f.residual = std::sqrt(ss / m);
    return f;
}

std::vector<double> grid(double lo, double hi, double step) {
    if (!(step > 0.0)) throw DomainError("grid step must be positive");
    std::vector<double> out;
    if (hi < lo) return out;
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-6));
    for (long long k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

std::vector<SweepRecord> sweep_field(double lo, double hi, double step, const RunConfig& base, int threads) {
    const auto values = grid(lo, hi, step);
    std::vector<SweepRecord> out(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        RunConfig cfg = base;
        cfg.eps = values[i];
        out[i] = sweep_point(values[i], cfg);
    });
    return out;
}

std::vector<SweepRecord> sweep_geometry(double lo, double hi, double step, const RunConfig& base, int threads) {
    const auto values = grid(lo, hi, step);
    std::vector<SweepRecord> out(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        RunConfig cfg = base;
        cfg.geometry.s_x = values[i];
        try {
            build_geometry(cfg.geometry.L, cfg.geometry.s_x, cfg.geometry.s_y);
        } catch (const Error& e) {
            out[i].param = values[i];
            out[i].seed = cfg.seed;
            out[i].termination = Termination::NumericalFailure;
            out[i].error = e.what();
            return;
        }
        out[i] = sweep_point(values[i], cfg);
    });
    return out;
}

std::vector<BasinProbeResult> basin_probe(const GeometryParams& geometry, double eps, const ParticleState& center,
                                          const std::vector<double>& magnitudes,
                                          const std::vector<Perturbation>& directions,
                                          const BasinOptions& options, int threads) {
    std::vector<BasinProbeResult> out(directions.size() * magnitudes.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        const Perturbation& d = directions[i / magnitudes.size()];
        const double mag = magnitudes[i % magnitudes.size()];
        BasinProbeResult& res = out[i];
        res.direction = d;
        res.magnitude = mag;
        const double norm = std::sqrt(d.dx * d.dx + d.dy * d.dy + d.dtheta * d.dtheta);
        const double scale = norm > 0.0 ? mag / norm : 0.0;
        RunConfig cfg;
        cfg.geometry = geometry;
        cfg.eps = eps;
        cfg.n_collisions = options.cap;
        cfg.tail_size = std::min<long long>(kRecurrenceWindow, options.cap);
        ParticleState ic = center;
        ic.x += scale * d.dx;
        ic.y += scale * d.dy;
        ic.theta = normalize_angle(ic.theta + scale * d.dtheta);
        cfg.ic = ic;
        RunControl control;
        control.stop_after_recurrence = options.fit_collisions;
        control.record_phase_locked = true;
        try {
            const TrajectoryRun run = run_trajectory(cfg, control);
            res.N_c = run.stats.N_c;
            res.period = run.stats.recurrence_period.value_or(0);
            if (!res.N_c) {
                res.note = run.stats.termination == Termination::Completed ? "cap reached" : run.stats.message;
                return;
            }
            if (run.phase_samples.size() < 6) {
                res.note = "too few samples after collapse";
                return;
            }
            // Fit the second half only: the early samples carry the largest
            // bounded oscillation over n.
            const long long from = run.phase_samples.front().n +
                                   (run.phase_samples.back().n - run.phase_samples.front().n) / 2;
            std::vector<double> n, y;
            for (const auto& s : run.phase_samples) {
                if (s.n < from) continue;
                n.push_back(static_cast<double>(s.n));
                y.push_back(s.lambda1);
            }
            const LinearFit fit = fit_inverse_n(n, y);
            res.lambda_inf = fit.a;
            res.fit_residual = fit.residual;
            res.converged = fit.residual < options.fit_residual_max;
            if (!res.converged) res.note = "fit residual above threshold";
        } catch (const Error& e) {
            res.note = e.what();
        }
    });
    return out;
}

CurrentEstimate current_estimate(const TrajectoryStats& stats, double eps) {
    if (!(stats.time > 0.0)) throw DomainError("current estimate needs elapsed time > 0");
    CurrentEstimate c;
    c.j_displacement = stats.dx / stats.time;
    c.j_lyapunov = -(stats.lambda.lambda1 + stats.lambda.lambda2) / eps;
    const double scale = std::max(std::abs(c.j_displacement), std::abs(c.j_lyapunov));
    c.relative_gap = scale > 0.0 ? std::abs(c.j_displacement - c.j_lyapunov) / scale : 0.0;
    return c;
}

}  // namespace ehrenfest

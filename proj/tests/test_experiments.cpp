#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ehrenfest/errors.hpp"
#include "ehrenfest/experiments.hpp"
#include "ehrenfest/io.hpp"
#include "ehrenfest/orbits.hpp"

using namespace ehrenfest;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<BouncePoint> cycle(int period, int length) {
    std::vector<BouncePoint> out;
    for (int k = 0; k < length; ++k) {
        BouncePoint b;
        b.n = k + 1;
        b.side = static_cast<SideLabel>(k % period % 4);
        b.r = 0.1 * (k % period);
        b.eta = std::cos(k % period);
        b.theta = -kPi + 2 * kPi * (k % period + 0.5) / period;
        out.push_back(b);
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& r) {
    std::ostringstream os;
    write_sweep_csv(os, r);
    write_multifurcation_csv(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("inverse-n fit") {
    std::vector<double> n, y;
    for (int k = 1; k <= 40; ++k) {
        n.push_back(1000.0 * k);
        y.push_back(-0.004838 + 3.7 / (1000.0 * k));
    }
    const auto f = fit_inverse_n(n, y);
    CHECK(std::abs(f.a + 0.004838) < 1e-10);
    CHECK(std::abs(f.b - 3.7) < 1e-8);
    CHECK(f.residual < 1e-12);
    CHECK_THROWS_AS(fit_inverse_n({1.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(fit_inverse_n({2.0, 2.0}, {1.0, 3.0}), DomainError);
}

TEST_CASE("periodicity detection") {
    for (int p : {1, 4, 19, 64}) {
        CAPTURE(p);
        const auto t = cycle(p, 300);
        const auto d = detect_periodicity(t);
        REQUIRE(d);
        CHECK(*d == p);
    }
    // too short to see two periods
    CHECK_FALSE(detect_periodicity(cycle(19, 30)));
    auto t = cycle(4, 100);
    t[60].r += 1e-6;
    CHECK_FALSE(detect_periodicity(t));
    CHECK(detect_periodicity(t, 1e-5) == 4);
    CHECK_FALSE(detect_periodicity(cycle(70, 300)));

    // replay of a known period-4 orbit
    const auto g = default_geometry();
    const auto o = named_orbit(g, "table2-row1");
    RunConfig cfg;
    cfg.eps = o.eps;
    cfg.ic = o.ic;
    cfg.n_collisions = 40;
    cfg.tail_size = 40;
    const auto st = run_trajectory(cfg);
    CHECK(detect_periodicity(st.tail) == 4);
    CHECK(to_string(classify(st)) == "Periodic(4)");
}

TEST_CASE("grid") {
    CHECK(grid(0.3, 0.4, 0.01).size() == 11);
    CHECK(grid(1.0, 1.3, 0.01).size() == 31);
    CHECK(grid(0.5, 0.5, 0.1).size() == 1);
    CHECK(grid(0.5, 0.4, 0.1).empty());
    CHECK_THROWS_AS(grid(0.0, 1.0, 0.0), DomainError);
    const auto v = grid(0.3, 0.4, 0.01);
    CHECK(v.back() == doctest::Approx(0.4));
}

TEST_CASE("config validation names the field") {
    auto field_of = [](const RunConfig& c) {
        try {
            validate(c);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string{};
    };
    RunConfig c;
    CHECK(field_of(c).empty());
    c.geometry.L = -1;
    CHECK(field_of(c) == "geometry.L");
    c = {};
    c.geometry.s_x = 2;
    CHECK(field_of(c) == "geometry");
    c = {};
    c.eps = 0;
    CHECK(field_of(c) == "eps");
    c = {};
    c.n_collisions = 0;
    CHECK(field_of(c) == "run.n_collisions");
    c = {};
    c.tail_size = -1;
    CHECK(field_of(c) == "run.tail_size");
    c = {};
    c.ic = ParticleState{0, 0, 0.1, {}, 0};
    CHECK_THROWS_AS(run_trajectory(c), ConfigError);
}

TEST_CASE("random initial states") {
    const auto g = default_geometry();
    Rng a(5), b(5);
    for (int k = 0; k < 1000; ++k) {
        const auto s = random_initial_state(g, a);
        CHECK(g.inside_hexagon(s.position()));
        CHECK_FALSE(g.inside_rhombus(s.position()));
        CHECK(s.theta > -kPi);
        CHECK(s.theta <= kPi);
        const auto t = random_initial_state(g, b);
        CHECK(s.x == t.x);
        CHECK(s.theta == t.theta);
    }
    Rng r(1);
    for (int k = 0; k < 1000; ++k) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("trajectory bookkeeping") {
    RunConfig c;
    c.n_collisions = 12345;
    c.tail_size = 100;
    const auto st = run_trajectory(c);
    CHECK(st.collisions == 12345);
    CHECK(st.termination == Termination::Completed);
    REQUIRE(st.tail.size() == 100);
    CHECK(st.tail.front().n == 12246);
    CHECK(st.tail.back().n == 12345);
    CHECK(st.tail.back().t == doctest::Approx(st.time));
    // thinning: every collision to 1000, every 10 to 10^4, every 100 beyond
    CHECK(st.series[999].n == 1000);
    CHECK(st.series[1000].n == 1010);
    CHECK(st.series.back().n == 12345);
    CHECK(st.series[st.series.size() - 2].n == 12300);
    CHECK(st.series.back().lambda1 == st.lambda.lambda1);
    double sum_dt = 0;
    for (std::size_t i = 1; i < st.tail.size(); ++i) sum_dt += st.tail[i].dt;
    CHECK(sum_dt == doctest::Approx(st.tail.back().t - st.tail.front().t));

    c.thinning = {ThinningPolicy::Kind::Every, 500};
    const auto ev = run_trajectory(c);
    CHECK(ev.series.front().n == 500);
    CHECK(ev.series.back().n == 12345);
    CHECK(ev.lambda.lambda1 == st.lambda.lambda1);

    // chaotic at the default field
    CHECK(classify(st).kind == ClassKind::ApparentlyChaotic);
    CHECK(theta_coverage(st.tail) > 0.3);
    const auto ce = current_estimate(st, c.eps);
    CHECK(ce.j_displacement == doctest::Approx(st.dx / st.time));
}

TEST_CASE("theta coverage") {
    CHECK(theta_coverage(cycle(100, 100)) == doctest::Approx(1.0));
    CHECK(theta_coverage(cycle(4, 100)) == doctest::Approx(0.04));
    CHECK(theta_coverage({}) == 0.0);
}

TEST_CASE("collapse onto the nineteen-point orbit") {
    const auto seed = named_orbit_seed("nineteen-point");
    RunConfig c;
    c.eps = seed.eps;
    c.ic = seed.ic;
    c.n_collisions = 10000;
    c.tail_size = 1000;
    const auto st = run_trajectory(c);
    REQUIRE(st.N_c);
    CHECK(st.recurrence_period == 19);
    CHECK(*st.N_c >= 1);
    CHECK(to_string(classify(st)) == "Periodic(19)");
    // a longer run stays collapsed
    c.n_collisions = 30000;
    const auto longer = run_trajectory(c);
    CHECK(classify(longer).period == 19);
    CHECK(longer.N_c == st.N_c);
}

TEST_CASE("sweeps are deterministic across thread counts") {
    RunConfig base;
    base.n_collisions = 3000;
    base.tail_size = 200;
    const auto a = sweep_field(0.30, 0.40, 0.02, base, 1);
    const auto b = sweep_field(0.30, 0.40, 0.02, base, 4);
    REQUIRE(a.size() == 6);
    CHECK(sweep_csv(a) == sweep_csv(b));
    CHECK(sweep_csv(a) == sweep_csv(sweep_field(0.30, 0.40, 0.02, base, 3)));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].param == doctest::Approx(0.30 + 0.02 * i));
        CHECK(a[i].error.empty());
    }
    CHECK(sweep_field(0.5, 0.4, 0.1, base, 2).empty());

    const auto g = sweep_geometry(0.0, 0.4, 0.2, base, 2);
    REQUIRE(g.size() == 3);
    CHECK_FALSE(g[0].error.empty());
    CHECK(g[1].error.empty());
    CHECK(sweep_csv(g) == sweep_csv(sweep_geometry(0.0, 0.4, 0.2, base, 1)));
}

TEST_CASE("basin probe") {
    const auto seed = named_orbit_seed("nineteen-point");
    BasinOptions opt;
    opt.cap = 50000;
    opt.fit_collisions = 20000;
    const std::vector<Perturbation> dirs{{1, 0, 0}, {0, 0, 1}};
    const std::vector<double> mags{0.0, 1e-6};
    const auto a = basin_probe({}, seed.eps, seed.ic, mags, dirs, opt, 1);
    const auto b = basin_probe({}, seed.eps, seed.ic, mags, dirs, opt, 4);
    REQUIRE(a.size() == 4);
    std::ostringstream sa, sb;
    write_basin_csv(sa, a);
    write_basin_csv(sb, b);
    CHECK(sa.str() == sb.str());
    for (const auto& r : a) {
        CAPTURE(r.note);
        CHECK(r.period == 19);
        CHECK(r.converged);
        CHECK(std::abs(r.lambda_inf + 0.004838) < 1e-4);
    }
    CHECK(a[2].direction.dtheta == 1.0);
    CHECK(a[3].magnitude == 1e-6);
}

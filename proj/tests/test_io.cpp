#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "ehrenfest/io.hpp"

using namespace ehrenfest;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, ',');) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TEST_CASE("doubles round-trip") {
    const double vals[] = {0.1, -0.004837770, 1.0 / 3.0, 6.156461303487, 1e-300, -2.5e17,
                           std::numeric_limits<double>::min(), std::nextafter(1.0, 2.0)};
    for (double v : vals) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
        const auto j = nlohmann::json::parse(nlohmann::json(v).dump());
        CHECK(j.get<double>() == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(3.0) == "3");
}

TEST_CASE("csv layouts") {
    RunConfig c;
    c.n_collisions = 50;
    c.tail_size = 5;
    const auto st = run_trajectory(c);

    std::ostringstream series;
    write_series_csv(series, st.series);
    auto l = lines(series.str());
    CHECK(l.front() == "n,t,lambda1,lambda2");
    CHECK(l.size() == 51);
    CHECK(fields(l.back())[0] == "50");
    CHECK(std::strtod(fields(l.back())[2].c_str(), nullptr) == st.lambda.lambda1);

    std::ostringstream tail;
    write_tail_csv(tail, st.tail);
    l = lines(tail.str());
    CHECK(l.front() == "collision_index,t,cell_m,cell_n,side_label,r,eta,theta_out,dt");
    REQUIRE(l.size() == 6);
    const auto f = fields(l[5]);
    REQUIRE(f.size() == 9);
    CHECK(f[0] == "50");
    CHECK(f[4] == to_string(st.tail.back().side));
    CHECK(std::strtod(f[7].c_str(), nullptr) == st.tail.back().theta);

    SweepRecord ok;
    ok.param = 0.31;
    ok.classification = {ClassKind::Periodic, 7};
    ok.N_c = 123;
    ok.seed = 9;
    SweepRecord bad;
    bad.param = 0.0;
    bad.termination = Termination::NumericalFailure;
    bad.error = "geometry: s_x, s_y\nmust be positive";
    std::ostringstream sweep;
    write_sweep_csv(sweep, {ok, bad});
    l = lines(sweep.str());
    CHECK(l.front() == "param,lambda1,lambda2,classification,period,N_c,coverage,seed,error");
    REQUIRE(l.size() == 3);
    CHECK(fields(l[1]) == std::vector<std::string>{"0.31", "0", "0", "Periodic(7)", "7", "123", "0", "9", ""});
    const auto fb = fields(l[2]);
    CHECK(fb.size() == 9);
    CHECK(fb[3] == "Error");
    CHECK(fb[5].empty());

    std::ostringstream multi;
    write_multifurcation_csv(multi, {ok});
    CHECK(multi.str() == "param,theta\n");

    BasinProbeResult r;
    r.direction = {0, 0, 1};
    r.magnitude = 1e-6;
    r.N_c = 1;
    r.lambda_inf = -0.5;
    r.converged = true;
    std::ostringstream basin;
    write_basin_csv(basin, {r});
    CHECK(basin.str() == "dx,dy,dtheta,magnitude,N_c,lambda_inf,converged\n0,0,1,9.9999999999999995e-07,1,-0.5,true\n");
}

TEST_CASE("json documents") {
    RunConfig c;
    c.n_collisions = 200;
    const auto st = run_trajectory(c);
    const auto j = to_json(st, c.eps);
    CHECK(j["collisions"] == 200);
    CHECK(j["lambda1"].get<double>() == st.lambda.lambda1);
    CHECK(j["N_c"].is_null());
    CHECK(j["termination"] == "completed");
    CHECK(j["initial"]["cell"] == nlohmann::json::array({0, 0}));
    CHECK(j["current"]["j_displacement"].get<double>() == st.dx / st.time);

    std::ostringstream os;
    write_json(os, j);
    const auto back = nlohmann::ordered_json::parse(os.str());
    CHECK(back == j);
    CHECK(os.str().back() == '\n');
    // key order is preserved
    CHECK(back.begin().key() == "initial");

    CHECK(to_json(GeometryParams{}).dump() == R"({"L":1.291,"s_x":0.7573,"s_y":1.1})");
}

#include "ehrenfest/io.hpp"

#include <cstdio>
#include <ostream>

namespace ehrenfest {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& series) {
    os << "n,t,lambda1,lambda2\n";
    for (const auto& p : series)
        os << p.n << ',' << format_double(p.T) << ',' << format_double(p.lambda1) << ','
           << format_double(p.lambda2) << '\n';
}

void write_tail_csv(std::ostream& os, const std::vector<BouncePoint>& tail) {
    os << "collision_index,t,cell_m,cell_n,side_label,r,eta,theta_out,dt\n";
    for (const auto& b : tail)
        os << b.n << ',' << format_double(b.t) << ',' << b.cell.m << ',' << b.cell.n << ',' << to_string(b.side)
           << ',' << format_double(b.r) << ',' << format_double(b.eta) << ',' << format_double(b.theta) << ','
           << format_double(b.dt) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "param,lambda1,lambda2,classification,period,N_c,coverage,seed,error\n";
    for (const auto& r : records) {
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        os << format_double(r.param) << ',' << format_double(r.lambda1) << ',' << format_double(r.lambda2)
           << ',' << (r.error.empty() || r.termination == Termination::Completed ? to_string(r.classification) : "Error")
           << ',' << r.classification.period << ',' << (r.N_c ? std::to_string(*r.N_c) : "") << ','
           << format_double(r.coverage) << ',' << r.seed << ',' << err << '\n';
    }
}

void write_multifurcation_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "param,theta\n";
    for (const auto& r : records)
        for (const auto& b : r.tail) os << format_double(r.param) << ',' << format_double(b.theta) << '\n';
}

void write_basin_csv(std::ostream& os, const std::vector<BasinProbeResult>& results) {
    os << "dx,dy,dtheta,magnitude,N_c,lambda_inf,converged\n";
    for (const auto& r : results)
        os << format_double(r.direction.dx) << ',' << format_double(r.direction.dy) << ','
           << format_double(r.direction.dtheta) << ',' << format_double(r.magnitude) << ','
           << (r.N_c ? std::to_string(*r.N_c) : "") << ',' << format_double(r.lambda_inf) << ','
           << (r.converged ? "true" : "false") << '\n';
}

ordered_json to_json(const GeometryParams& g) { return {{"L", g.L}, {"s_x", g.s_x}, {"s_y", g.s_y}}; }

ordered_json to_json(const ParticleState& s) {
    return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"cell", {s.cell.m, s.cell.n}}};
}

ordered_json to_json(const OrbitSpec& o, const OrbitStability& st) {
    ordered_json j;
    j["name"] = o.name;
    j["kind"] = to_string(o.kind);
    j["eps"] = o.eps;
    j["sequence"] = o.sequence.to_string(&o.shift);
    j["period_collisions"] = o.sequence.size();
    j["shift"] = {o.shift.m, o.shift.n};
    j["ic"] = to_json(o.ic);
    j["period_tau"] = o.period_tau;
    j["displacement"] = {o.displacement.x, o.displacement.y};
    j["J_S"] = {{st.J_S.a11, st.J_S.a12}, {st.J_S.a21, st.J_S.a22}};
    j["trace"] = st.J_S.trace();
    j["det"] = st.J_S.det();
    ordered_json ev = ordered_json::array();
    for (const auto& e : st.eigenvalues) ev.push_back({e.real(), e.imag()});
    j["eigenvalues"] = ev;
    j["lambda1"] = st.lambda.lambda1;
    j["lambda2"] = st.lambda.lambda2;
    j["current"] = st.current_j;
    j["identity_residual"] = st.identity_residual;
    return j;
}

ordered_json to_json(const TrajectoryStats& st, double eps) {
    ordered_json j;
    j["initial"] = to_json(st.initial);
    j["final"] = to_json(st.final_state);
    j["collisions"] = st.collisions;
    j["time"] = st.time;
    j["dx"] = st.dx;
    j["dy"] = st.dy;
    j["lambda1"] = st.lambda.lambda1;
    j["lambda2"] = st.lambda.lambda2;
    j["log_det_sum"] = st.frame.log_det_sum;
    const Classification c = classify(st);
    j["classification"] = to_string(c);
    j["classification_rule"] = "recurrence within 1e-9 in (side, r, eta), period <= 64";
    j["N_c"] = st.N_c ? ordered_json(*st.N_c) : ordered_json(nullptr);
    j["coverage"] = theta_coverage(st.tail);
    if (st.time > 0.0) {
        const CurrentEstimate cur = current_estimate(st, eps);
        j["current"] = {{"j_displacement", cur.j_displacement},
                        {"j_lyapunov", cur.j_lyapunov},
                        {"relative_gap", cur.relative_gap}};
    }
    j["termination"] = to_string(st.termination);
    if (!st.message.empty()) j["message"] = st.message;
    return j;
}

void write_json(std::ostream& os, const ordered_json& j) { os << j.dump(2) << '\n'; }

}  // namespace ehrenfest

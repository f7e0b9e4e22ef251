#pragma once

// CSV and JSON serialisation. CSV floats carry 17 significant digits; JSON
// uses the library's shortest round-trip form. Both read back exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrenfest/experiments.hpp"
#include "ehrenfest/orbits.hpp"

namespace ehrenfest {

std::string format_double(double v);

void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& series);
/// collision_index, t, cell_m, cell_n, side_label, r, eta, theta_out, dt
void write_tail_csv(std::ostream& os, const std::vector<BouncePoint>& tail);
/// param, lambda1, lambda2, classification, period, N_c, coverage, seed, error
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);
/// param, theta: one row per retained tail point.
void write_multifurcation_csv(std::ostream& os, const std::vector<SweepRecord>& records);
/// dx, dy, dtheta, magnitude, N_c, lambda_inf, converged
void write_basin_csv(std::ostream& os, const std::vector<BasinProbeResult>& results);

nlohmann::ordered_json to_json(const GeometryParams& g);
nlohmann::ordered_json to_json(const ParticleState& s);
nlohmann::ordered_json to_json(const OrbitSpec& o, const OrbitStability& st);
nlohmann::ordered_json to_json(const TrajectoryStats& st, double eps);

/// Two-space indentation and a trailing newline.
void write_json(std::ostream& os, const nlohmann::ordered_json& j);

}  // namespace ehrenfest

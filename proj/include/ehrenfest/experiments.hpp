#pragma once

// Long trajectories, periodicity detection, parameter sweeps and basin probes.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ehrenfest/tangent.hpp"

namespace ehrenfest {

inline constexpr double kRecurrenceTolerance = 1e-9;
inline constexpr int kMaxPeriod = 64;
inline constexpr int kRecurrenceWindow = 4 * kMaxPeriod;
/// Finite-time lambda1 above which a non-periodic tail is called chaotic.
inline constexpr double kChaosThreshold = 5e-3;
inline constexpr int kCoverageBins = 100;

struct GeometryParams {
    double L{1.291};
    double s_x{0.7573};
    double s_y{1.1};
};

/// Exponent series sampling. Log: every collision up to 10^3, then every
/// 10^(floor(log10 n) - 2). Every: every `every` collisions. The last
/// collision is always recorded.
struct ThinningPolicy {
    enum class Kind { Log, Every };
    Kind kind{Kind::Log};
    long long every{1000};
};

struct RunConfig {
    GeometryParams geometry;
    double eps{0.374};
    long long n_collisions{100000};
    std::uint64_t seed{1};
    /// Random start when empty.
    std::optional<ParticleState> ic;
    /// Bounces kept at the end of the run (capped by n_collisions).
    long long tail_size{1000};
    ThinningPolicy thinning;
};

/// Throws ConfigError naming the offending field.
void validate(const RunConfig& cfg);

/// mt19937_64 with a platform-independent uniform draw (the standard
/// distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Uniform over the free part of the cell times uniform theta in (-pi, pi].
ParticleState random_initial_state(const BilliardGeometry& g, Rng& rng);

struct BouncePoint {
    long long n{0};
    double t{0.0};
    CellIndex cell;
    SideLabel side{SideLabel::r1};
    double r{0.0};
    double eta{0.0};
    /// Outgoing angle.
    double theta{0.0};
    /// Flight time since the previous bounce.
    double dt{0.0};
};

struct SeriesPoint {
    long long n{0};
    double T{0.0};
    double lambda1{0.0};
    double lambda2{0.0};
};

enum class Termination { Completed, CornerHit, Stalled, NumericalFailure, Converged };

std::string_view to_string(Termination t);

struct TrajectoryStats {
    ParticleState initial;
    ParticleState final_state;
    long long collisions{0};
    /// Total flight time from the initial state.
    double time{0.0};
    /// Unfolded displacement over the run.
    double dx{0.0};
    double dy{0.0};
    TangentFrame frame;
    ExponentPair lambda;
    std::vector<SeriesPoint> series;
    std::vector<BouncePoint> tail;
    /// Start of the first sustained recurrence, when one was seen.
    std::optional<long long> N_c;
    std::optional<int> recurrence_period;
    Termination termination{Termination::Completed};
    std::string message;
};

/// Extra controls used by basin probes.
struct RunControl {
    /// Stop this many collisions after a sustained recurrence is first seen
    /// (negative: never stop early).
    long long stop_after_recurrence{-1};
    /// Record the exponents at every collision after N_c that is a whole
    /// number of periods later (for the 1/n fit).
    bool record_phase_locked{false};
};

struct PhaseSample {
    long long n{0};
    double lambda1{0.0};
    double lambda2{0.0};
};

struct TrajectoryRun {
    TrajectoryStats stats;
    std::vector<PhaseSample> phase_samples;
};

TrajectoryStats run_trajectory(const RunConfig& cfg);
TrajectoryRun run_trajectory(const RunConfig& cfg, const RunControl& control);

/// Smallest p <= p_max such that every tail point matches the one p bounces
/// earlier in (side, r, eta) within tol.
std::optional<int> detect_periodicity(const std::vector<BouncePoint>& tail,
                                      double tol = kRecurrenceTolerance, int p_max = kMaxPeriod);

enum class ClassKind { Periodic, QuasiPeriodicOrUnresolved, ApparentlyChaotic };

struct Classification {
    ClassKind kind{ClassKind::QuasiPeriodicOrUnresolved};
    int period{0};
};

std::string to_string(const Classification& c);

Classification classify(const TrajectoryStats& stats);

/// Fraction of kCoverageBins equal bins of (-pi, pi] hit by the tail angles.
double theta_coverage(const std::vector<BouncePoint>& tail);

struct LinearFit {
    double a{0.0};
    double b{0.0};
    /// RMS residual.
    double residual{0.0};
};

/// Least-squares fit y = a + b / n.
LinearFit fit_inverse_n(const std::vector<double>& n, const std::vector<double>& y);

struct SweepRecord {
    double param{0.0};
    double lambda1{0.0};
    double lambda2{0.0};
    std::vector<BouncePoint> tail;
    Classification classification;
    std::optional<long long> N_c;
    double coverage{0.0};
    std::uint64_t seed{0};
    Termination termination{Termination::Completed};
    /// Non-empty when the point failed (bad geometry, numerical error).
    std::string error;
};

/// lo, lo + step, ... up to hi (inclusive within step / 1e6). Empty when hi < lo.
std::vector<double> grid(double lo, double hi, double step);

/// One record per grid value of eps, sorted by eps. Failures are recorded, not thrown.
std::vector<SweepRecord> sweep_field(double lo, double hi, double step, const RunConfig& base,
                                     int threads = 1);

/// Same over s_x at fixed eps.
std::vector<SweepRecord> sweep_geometry(double lo, double hi, double step, const RunConfig& base,
                                        int threads = 1);

struct Perturbation {
    double dx{0.0};
    double dy{0.0};
    double dtheta{0.0};
};

struct BasinProbeResult {
    Perturbation direction;
    double magnitude{0.0};
    std::optional<long long> N_c;
    int period{0};
    double lambda_inf{0.0};
    double fit_residual{0.0};
    bool converged{false};
    std::string note;
};

struct BasinOptions {
    long long cap{1000000};
    /// Collisions run past N_c to feed the fit.
    long long fit_collisions{20000};
    double fit_residual_max{1e-4};
};

/// Perturbs `center` along each unit direction by each magnitude and runs
/// until a sustained recurrence or the cap.
std::vector<BasinProbeResult> basin_probe(const GeometryParams& geometry, double eps,
                                          const ParticleState& center,
                                          const std::vector<double>& magnitudes,
                                          const std::vector<Perturbation>& directions,
                                          const BasinOptions& options = {}, int threads = 1);

struct CurrentEstimate {
    double j_displacement{0.0};
    double j_lyapunov{0.0};
    double relative_gap{0.0};
};

CurrentEstimate current_estimate(const TrajectoryStats& stats, double eps);

}  // namespace ehrenfest

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rct/dynamics.hpp"
#include "rct/forcing.hpp"
#include "rct/integrate.hpp"
#include "rct/rng.hpp"

namespace rct {

// ---- ordering between the closed system and the auxiliary (a, b) system ----

struct OrderingViolation {
    double t = 0.0;
    std::string kind;  ///< "d-b" or "a-rho"
    double value = 0.0;
};

struct OrderingReport {
    double min_d_minus_b = 0.0;
    double t_min_d_minus_b = 0.0;
    double min_a_minus_rho = 0.0;
    double t_min_a_minus_rho = 0.0;
    double t_end = 0.0;
    TrajectoryStatus status = Completed{};
    std::vector<OrderingViolation> violations;
    /// Joint trajectory, layout (rho, d, a, b).
    Trajectory joint;

    bool ordered() const { return violations.empty(); }
};

inline constexpr double kOrderingTolerance = 1e-9;

/// Integrates (rho, d) under A together with
///   b' = -b^2/2 - (alpha t + beta)^s a^2 - |k| a,   a' = -b a
/// on one grid (segmented at A's breakpoints) and tracks d - b and a - rho.
/// Requires b0 < d0 and 0 < rho0 < a0, and A within the envelope on [0, T]
/// (the upper side only when A carries a cap).
OrderingReport coupled_compare(const ClosedState& closed0, double a0, double b0, const ForcingSignal& A,
                               const Params& p, double T, const IntegratorConfig& cfg);

/// max{d0, sqrt(2 max{0, -k c_b, w rho_M^2 + k (rho_M - c_b)})} with w = (omega0/rho0)^2 / 2.
/// For c_b = 0 this is max{d0, sqrt(2 max{0, w rho_M^2 + k rho_M})}.
double d_upper_bound(double d0, double rho_M, double omega0, double rho0, double k, double c_b = 0.0);

/// Same bound with the cap w given directly.
double d_upper_bound_w(double d0, double rho_M, double w, double k, double c_b = 0.0);

/// Random piecewise-constant A on [0, horizon]: up to max_pieces segments, each
/// value uniform in [-(alpha t_i + beta)^s, w] at the segment start t_i. Capped at w.
ForcingSignal random_envelope_signal(Rng& rng, const Params& p, double w, double horizon, int max_pieces = 6);

struct ComparisonScenario {
    std::uint64_t index = 0;
    ClosedState closed0;
    double a0 = 0.0;
    double b0 = 0.0;
    double w = 0.0;
    Params params;
    ForcingSignal A;
    double T = 10.0;
};

/// Deterministic scenario (seed, index): k = +-1, c_b = 0, random envelope and ordering.
ComparisonScenario comparison_scenario(std::uint64_t seed, std::uint64_t index);

struct ComparisonFailure {
    std::uint64_t index = 0;
    std::vector<OrderingViolation> violations;
};

struct ComparisonBatchReport {
    std::size_t scenarios = 0;
    std::size_t blowups = 0;
    double min_d_minus_b = 0.0;
    double min_a_minus_rho = 0.0;
    std::vector<ComparisonFailure> failures;
};

ComparisonBatchReport verify_comparison(std::size_t count, std::uint64_t seed, const IntegratorConfig& cfg);

/// Re-runs the listed scenario indices only.
ComparisonBatchReport verify_comparison_indices(const std::vector<std::uint64_t>& indices, std::uint64_t seed,
                                                const IntegratorConfig& cfg);

// ---- exponential auxiliary system ----

enum class RegionLabel { OmegaB, OmegaM, OmegaT };

std::string region_name(RegionLabel r);

/// Omega_B: b < 0, Omega_M: 0 <= b < 1/2, Omega_T: b >= 1/2. Requires a > 0.
RegionLabel classify_exp_region(double a, double b);

struct CertificateStage {
    RegionLabel region = RegionLabel::OmegaB;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct BlowupCertificate {
    double t_bound = 0.0;
    std::vector<CertificateStage> stages;
    /// Upper bound for b(t) on [0, t_bound).
    std::function<double(double)> b_upper;
};

/// Chains the stage bounds of the three regions into an upper bound on the
/// blow-up time of b' = -b^2/2 - e^t a^2 - a, a' = -b a from (a0, b0).
BlowupCertificate blowup_certificate(double a0, double b0);

struct ExpBlowupSample {
    double a0 = 0.0;
    double b0 = 0.0;
    double t_bound = 0.0;
    TrajectoryStatus status = Completed{};
    double curve_excess = 0.0;  ///< max of b(t) - b_upper(t) over accepted steps
    bool region_monotone = true;
    bool b_decreasing = true;
};

struct ExpBlowupReport {
    std::size_t samples = 0;
    std::size_t blowups = 0;
    double blowup_fraction = 0.0;
    /// max of b(t) - 2/(t + 2/b0) over runs with b0 < 0
    double max_negative_b0_excess = -std::numeric_limits<double>::infinity();
    double max_curve_excess = -std::numeric_limits<double>::infinity();
    std::size_t bound_exceeded = 0;  ///< t_lower > t_bound + 1e-3
    std::size_t region_failures = 0;
    std::size_t monotone_failures = 0;
    std::vector<ExpBlowupSample> runs;
};

struct ExpSampleBox {
    double a_min = 1e-2;
    double a_max = 10.0;
    double b_min = -5.0;
    double b_max = 5.0;
};

/// Sample i is drawn from region i mod 3 (intersected with the box), with
/// per-sample seeds. Horizon per run: min(t_bound + 1, 1000).
ExpBlowupReport verify_exp_blowup(std::size_t sample_count, std::uint64_t seed, const IntegratorConfig& cfg,
                                  const ExpSampleBox& box = {});

ExpBlowupSample run_exp_blowup(double a0, double b0, const IntegratorConfig& cfg);

// ---- phase plane classification ----

enum class Behavior { Convergent, Oscillatory, BlowUp, Undetermined };

std::string behavior_name(Behavior b);

struct ClassifierConfig {
    double delta = 1e-3;
    double tail_fraction = 0.2;
    int min_sign_changes = 3;
    double drift_tol = 1e-4;
};

struct Equilibrium {
    double rho = 0.0;
    double d = 0.0;
};

/// d = 0 with A rho^2 + k (rho - c_b) = 0, rho > 0, plus rho = 0 with
/// d = +-sqrt(-2 k c_b) when k c_b <= 0.
std::vector<Equilibrium> equilibria(double A, const Params& p);

struct BehaviorLabel {
    Behavior label = Behavior::Undetermined;
    int sign_changes = 0;
    std::optional<Equilibrium> equilibrium;
    double final_distance = std::numeric_limits<double>::infinity();
    std::optional<double> t_lower;
    double energy_drift = 0.0;
    double rho_max = 0.0;
    double d_max = 0.0;
    TrajectoryStatus status = Completed{};
};

BehaviorLabel classify_trajectory(const ClosedState& init, double A, const Params& p, double T,
                                  const IntegratorConfig& cfg, const ClassifierConfig& cc = {});

/// lo, lo + step, ... up to hi; an explicit list replaces the range when set.
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;
    std::optional<std::vector<double>> list;

    std::vector<double> values() const;
};

struct SweepGrid {
    Axis rho{0.5, 5.0, 0.5, std::nullopt};
    Axis d{-3.0, 3.0, 0.5, std::nullopt};
};

struct SweepCell {
    double rho0 = 0.0;
    double d0 = 0.0;
    double A = 0.0;
    BehaviorLabel behavior;
};

/// One label per (A, rho, d), ordered A-major then rho then d.
std::vector<SweepCell> sweep(const SweepGrid& grid, const std::vector<double>& A_values, const Params& p, double T,
                             const IntegratorConfig& cfg, const ClassifierConfig& cc = {});

// ---- first integral and divergence bound over random constant-A runs ----

struct ConservationCase {
    std::uint64_t index = 0;
    ClosedState init;
    double A = 0.0;
    Params params;
    double T = 10.0;
};

struct ConservationRun {
    ConservationCase input;
    TrajectoryStatus status = Completed{};
    double drift = 0.0;  ///< max |E - E0| / max(|E0|, 1)
    double rho_max = 0.0;
    double d_max = 0.0;
    double d_bound = 0.0;
};

struct ConservationReport {
    std::size_t attempted = 0;
    std::size_t completed = 0;
    double max_drift = 0.0;
    double max_bound_excess = -std::numeric_limits<double>::infinity();
    std::vector<ConservationRun> runs;  ///< completed runs only
};

inline constexpr double kDriftTolerance = 1e-6;
inline constexpr double kBoundTolerance = 1e-6;

/// rho0 in [0.1, 5], d0 in [-3, 3], A in [-5, 2], k = +-1, c_b in {0, 1}, T = 10.
ConservationCase conservation_case(std::uint64_t seed, std::uint64_t index);

ConservationRun run_conservation_case(const ConservationCase& c, const IntegratorConfig& cfg);

/// Draws cases until `count` runs complete without blow-up (at most 50 * count draws).
ConservationReport verify_conservation(std::size_t count, std::uint64_t seed, const IntegratorConfig& cfg);

}  // namespace rct

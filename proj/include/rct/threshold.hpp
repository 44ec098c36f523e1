#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rct/dynamics.hpp"
#include "rct/integrate.hpp"

namespace rct {

/// Surface family b = m(B-1) a + n(B-1) with
/// m(x) = m1 (x + m2)^M and n(x) = n1 (x + n2)^(-N).
struct SurfaceParams {
    double m1 = 10.0;
    double m2 = 10.0;
    double M = 1.0;
    double n1 = 1.0;
    double n2 = 1.0;
    double N = 1.0;
    double s = 1.0;

    /// Structural checks only (m1 > sqrt 2, positivity, M >= 1, s >= 1).
    /// The stronger parameter rules are reported by paper_params.
    void validate() const;
};

double m_of(double x, const SurfaceParams& sp);
double n_of(double x, const SurfaceParams& sp);
double dm_of(double x, const SurfaceParams& sp);
double dn_of(double x, const SurfaceParams& sp);

/// F = b - m(B-1) a - n(B-1); positive above the surface.
double surface_F(double a, double b, double B, const SurfaceParams& sp);

/// Flow component across the surface at the surface point with abscissa a
/// and x = B - 1:
///   Q(a; x) = (m^2/2 - (x+1)^s) a^2 - (1 + m') a - n^2/2 - n'.
double transversality_margin(double a, double x, const SurfaceParams& sp);

struct Discriminant {
    double D = 0.0;        ///< (1+m')^2 - 4 * leading * constant
    double leading = 0.0;  ///< m^2/2 - (x+1)^s
    double constant = 0.0; ///< -n^2/2 - n'
};

Discriminant discriminant(double x, const SurfaceParams& sp);

namespace verdict {
struct GloballyCertified {};
struct HorizonCertified {
    double T = 0.0;
};
struct InfeasibleAtZero {};
}  // namespace verdict

using Verdict = std::variant<verdict::GloballyCertified, verdict::HorizonCertified, verdict::InfeasibleAtZero>;

std::string verdict_name(const Verdict& v);

struct MarginSample {
    double x = 0.0;
    double D = 0.0;
    double leading = 0.0;
};

struct FeasibilityReport {
    double x_max = 0.0;
    /// Largest verified x with positive leading coefficient; nullopt means
    /// positive on the whole scan and asymptotically (the infinity marker).
    std::optional<double> leading_ok_until;
    double disc_negative_until = 0.0;
    bool sign_change_found = false;
    bool asymptotically_favorable = false;
    std::vector<MarginSample> samples;
    Verdict verdict = verdict::InfeasibleAtZero{};

    /// Certified horizon: 0 when infeasible at zero, +inf when global.
    double certified_T() const;
};

inline constexpr double kScanStep = 0.01;
inline constexpr double kBisectionTol = 1e-6;

/// Grid scan (step 0.01) of D(x) < 0 and leading(x) > 0 on [0, x_max], with
/// bisection to 1e-6 at the first failure.
FeasibilityReport certified_horizon(const SurfaceParams& sp, double x_max);

struct PaperRuleOverrides {
    std::optional<double> m1, m2, M, n1, n2;
};

struct PaperRuleCheck {
    std::string rule;
    bool satisfied = false;
};

struct PaperParamsReport {
    SurfaceParams params;
    /// max{ (m2 + m1 M m2^M)^2 / (2 (m1^2 - 2) m2^(2M)) + 1/2, 1 }
    double n1_bound = 0.0;
    std::vector<PaperRuleCheck> checks;
    bool all_rules_hold = false;
    FeasibilityReport feasibility;
};

/// Lower bound on n1 required by the parameter rules for given (m1, m2, M).
double paper_n1_bound(double m1, double m2, double M);

/// Defaults: M = max{s/2, 1}, m1 = 2, m2 = 2, n2 = 1, n1 = bound + 1.
/// Also runs certified_horizon on the result (scan bound x_max).
PaperParamsReport paper_params(double s, const PaperRuleOverrides& overrides = {}, double x_max = 200.0);

enum class RegionMode {
    Theorem,  ///< threshold d > m* rho + n* with m* = m1 m2^M, n* = n1 n2
    Aux,      ///< threshold b > m(0) a + n(0)
};

struct MembershipResult {
    bool inside = false;
    std::string failed;  ///< first failed inequality, empty when inside
    double slope = 0.0;
    double intercept = 0.0;
    double n_star = 0.0;  ///< n1 n2
    double n_zero = 0.0;  ///< n(0)
};

MembershipResult omega_region_membership(double rho0, double d0, const SurfaceParams& sp,
                                         RegionMode mode = RegionMode::Theorem);

struct InvarianceBox {
    double a_max = 10.0;
    double F_max = 10.0;
};

struct InvarianceViolation {
    double a0 = 0.0;
    double b0 = 0.0;
    double t = 0.0;
    std::string kind;  ///< "F", "b", or "a"
    double value = 0.0;
};

struct InvarianceReport {
    std::size_t samples = 0;
    std::size_t rejected = 0;
    std::size_t integrated = 0;
    std::size_t non_completed = 0;
    double min_F = 0.0;
    std::vector<InvarianceViolation> violations;
};

/// Integrates rhs_aux_poly from the given (a0, b0) at B = 1 up to T and checks
/// F > -1e-9, b > 0, a <= a0 at every accepted step. Initial points outside
/// {a > 0, F > 0} are counted as rejected and not integrated.
InvarianceReport verify_invariance_from(const SurfaceParams& sp, const std::vector<std::pair<double, double>>& initials,
                                        double T, const IntegratorConfig& cfg);

/// Seeds `sample_count` points uniformly in a in (0, a_max], F(a, b, 1) in (0, F_max]
/// with per-sample seeds from (seed, index). Throws "horizon not certified" when
/// certified_horizon(sp, T) finds a sign change before T.
InvarianceReport verify_invariance(const SurfaceParams& sp, std::size_t sample_count, double T, std::uint64_t seed,
                                   const IntegratorConfig& cfg, const InvarianceBox& box = {});

}  // namespace rct

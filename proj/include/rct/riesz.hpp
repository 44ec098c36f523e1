#pragma once

#include <array>
#include <vector>

#include "rct/dynamics.hpp"

namespace rct {

using Vec2 = std::array<double, 2>;

/// Isotropic Gaussian: mass / (2 pi sigma^2) * exp(-|y - center|^2 / (2 sigma^2)).
struct GaussianBump {
    Vec2 center{0.0, 0.0};
    double mass = 1.0;
    double sigma = 1.0;
};

struct DensityField {
    std::vector<GaussianBump> components;
    double background = 0.0;

    void validate() const;
    double operator()(const Vec2& y) const;
    /// Bumps only (background removed).
    double bumps_at(const Vec2& y) const;
    double sigma_min() const;
    DensityField shifted(const Vec2& v) const;
};

struct QuadratureConfig {
    int n_theta = 256;
    int panels = 0;        ///< radial Gauss–Legendre panels; 0 picks width sigma_min / 2
    double r_out = 0.0;    ///< 0 picks the farthest bump distance + 8 sigma
    double eps = 0.0;      ///< 0 picks 1e-6 sigma_min
    bool richardson = false;
    int max_refinements = 3;
    double rel_tol = 1e-4;

    void validate() const;
};

enum class RieszWhich { F1, F2 };

/// (-y1^2 + y2^2) / |y|^4
double kernel_f1(const Vec2& y);
/// -2 y1 y2 / |y|^4
double kernel_f2(const Vec2& y);

struct PvEstimate {
    double value = 0.0;
    double change = 0.0;       ///< relative change at the accepted refinement
    int refinements = 0;       ///< resolution doublings beyond the first check
    double tail_bound = 0.0;   ///< bound on the part cut off beyond r_out
};

/// f_i(x) = (k/pi) p.v. integral kernel_i(y) rho(x - y) dy, in polar coordinates
/// around x with the angular sum first. Each estimate is compared against one
/// at doubled (n_theta, panels); throws "quadrature not converged" when the
/// relative change stays above rel_tol after max_refinements doublings.
PvEstimate riesz_pv_estimate(const DensityField& density, const Vec2& x, RieszWhich which, double k,
                             const QuadratureConfig& q = {});

double riesz_pv(const DensityField& density, const Vec2& x, RieszWhich which, double k, const QuadratureConfig& q = {});

/// R_ij[rho](x): principal-value part plus rho(x)/2 on the diagonal.
Matrix2 riesz_matrix(const DensityField& density, const Vec2& x, const QuadratureConfig& q = {});

struct InitialA {
    double value = 0.0;
    bool admissible = false;  ///< value >= -beta^s
};

/// A(0) = ((omega0/rho0)^2 - (eta0/rho0)^2 - (xi0/rho0)^2) / 2.
InitialA initial_A(double omega0, double eta0, double xi0, double rho0, const Params& p = {});

struct TracePoint {
    Vec2 x{0.0, 0.0};
    double residual = 0.0;  ///< |R11 + R22 - rho(x)|
};

struct RieszCheckReport {
    double center_f1 = 0.0;  ///< |f1| at the center of a radial density
    double center_f2 = 0.0;
    double max_trace_residual = 0.0;
    std::vector<TracePoint> trace_points;
    double far_field_rel_error = 0.0;  ///< point-mass limit at r = 10 sigma
};

/// Density used for the trace check: three bumps on a background of 0.3.
DensityField reference_density();

/// Radial center check, trace identity at `points` random x in [-2, 3] x [-2, 2]
/// (per-point seeds), and the far field of a narrow bump.
RieszCheckReport verify_riesz(std::size_t points, std::uint64_t seed, const QuadratureConfig& q = {});

}  // namespace rct

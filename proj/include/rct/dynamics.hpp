#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "rct/forcing.hpp"
#include "rct/integrate.hpp"

namespace rct {

/// Physical configuration. k is the force sign (repulsive > 0, attractive < 0),
/// c_b the background density, and (alpha, beta, s) the polynomial envelope
/// A(t) >= -(alpha t + beta)^s.
struct Params {
    double k = 1.0;
    double c_b = 0.0;
    double s = 1.0;
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

/// (rho, d) along one characteristic.
struct ClosedState {
    double rho = 1.0;
    double d = 0.0;
};

struct ClosedRates {
    double drho = 0.0;
    double dd = 0.0;
};

/// Density plus the spectral decomposition of the velocity gradient:
/// divergence d, vorticity omega, eta = M11 - M22, xi = M12 + M21.
struct SpectralState {
    double rho = 1.0;
    double d = 0.0;
    double omega = 0.0;
    double eta = 0.0;
    double xi = 0.0;
};

struct SpectralRates {
    double drho = 0.0;
    double dd = 0.0;
    double domega = 0.0;
    double deta = 0.0;
    double dxi = 0.0;
};

/// Comparison variables (a, b) and shifted time B = t + B0.
struct AuxState {
    double a = 1.0;
    double b = 0.0;
    double B = 1.0;
};

struct AuxRates {
    double da = 0.0;
    double db = 0.0;
    double dB = 1.0;
};

struct ExpAuxState {
    double a = 1.0;
    double b = 0.0;
};

struct ExpAuxRates {
    double da = 0.0;
    double db = 0.0;
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

// d' = -d^2/2 + A(t) rho^2 + k (rho - c_b),  rho' = -rho d.
ClosedRates rhs_closed(const ClosedState& state, double t, const ForcingSignal& a, const Params& p);

// d' = -(d^2 + eta^2 - omega^2 + xi^2)/2 + k (rho - c_b); omega, rho decay
// with -d; eta and xi additionally receive f1, f2.
SpectralRates rhs_spectral(const SpectralState& state, double t, const PrescribedF& f, const Params& p);

// b' = -b^2/2 - B^s a^2 - a,  a' = -b a,  B' = 1.
AuxRates rhs_aux_poly(const AuxState& state, double t, const Params& p);

// b' = -b^2/2 - e^t a^2 - a,  a' = -b a.
ExpAuxRates rhs_aux_exp(const ExpAuxState& state, double t);

/// Density samples along a trajectory: node times plus a continuous evaluator.
struct RhoPath {
    std::vector<double> nodes;
    std::function<double(double)> rho;
};

/// Path of component `rho_index` of an integrated trajectory, using its dense output.
RhoPath rho_path_from(const Trajectory& traj, std::size_t rho_index);

/// A(t) = ((omega0/rho0)^2 - (eta0/rho0 + I1)^2 - (xi0/rho0 + I2)^2) / 2 with
/// I_i = integral_0^t f_i / rho. Quadrature: 5-point Gauss–Legendre on every
/// interval between path nodes.
double reconstruct_A(const SpectralState& initial, const RhoPath& path, const PrescribedF& f, double t);

/// Reassembles M from (d, omega, eta, xi).
Matrix2 gradient_matrix(const SpectralState& state);

/// E = d^2/rho + 2 A rho + 2k ln rho + 2k c_b / rho; conserved by rhs_closed for constant A.
double first_integral(const ClosedState& state, double a, const Params& p);

/// Upper bound of A(t): w = (omega0/rho0)^2 / 2.
double a_cap(double omega0, double rho0);

/// Throws "density positivity violated" when rho is not above the underflow floor.
void require_positive_density(double rho);

/// Adapters packing the typed systems into flat vectors for the integrator.
/// Layouts: closed (rho, d); spectral (rho, d, omega, eta, xi); aux_poly (a, b, B); aux_exp (a, b).
RhsFn closed_system(ForcingSignal a, Params p);
RhsFn spectral_system(PrescribedF f, Params p);
RhsFn aux_poly_system(Params p);
RhsFn aux_exp_system();

}  // namespace rct

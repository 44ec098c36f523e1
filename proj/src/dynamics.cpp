#include "rct/dynamics.hpp"

#include <cmath>
#include <string>

#include "rct/error.hpp"

namespace rct {

namespace {

double eval_forcing(const ForcingSignal& f, double t) {
    double v = f(t);
    if (!std::isfinite(v)) throw Error(msg::kForcingFailed);
    return v;
}

// 5-point Gauss–Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                             0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                               0.4786286704993665, 0.2369268850561891};

}  // namespace

void Params::validate() const {
    if (!std::isfinite(k) || k == 0.0) throw Error(std::string(msg::kInvalidArgument) + ": k must be nonzero");
    if (!(c_b >= 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": c_b must be >= 0");
    if (!(s >= 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": s must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": alpha, beta must be > 0");
}

void require_positive_density(double rho) {
    if (!(rho > kRhoFloor)) throw Error(msg::kDensityPositivity);
}

ClosedRates rhs_closed(const ClosedState& state, double t, const ForcingSignal& a, const Params& p) {
    require_positive_density(state.rho);
    double av = eval_forcing(a, t);
    return {-state.rho * state.d,
            -0.5 * state.d * state.d + av * state.rho * state.rho + p.k * (state.rho - p.c_b)};
}

SpectralRates rhs_spectral(const SpectralState& s, double t, const PrescribedF& f, const Params& p) {
    require_positive_density(s.rho);
    double f1 = eval_forcing(f.f1, t);
    double f2 = eval_forcing(f.f2, t);
    SpectralRates r;
    r.drho = -s.rho * s.d;
    r.dd = -0.5 * s.d * s.d - 0.5 * s.eta * s.eta + 0.5 * s.omega * s.omega - 0.5 * s.xi * s.xi +
           p.k * (s.rho - p.c_b);
    r.domega = -s.omega * s.d;
    r.deta = -s.eta * s.d + f1;
    r.dxi = -s.xi * s.d + f2;
    return r;
}

AuxRates rhs_aux_poly(const AuxState& s, double /*t*/, const Params& p) {
    if (!(s.a > 0.0) || !(s.B >= 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": require a > 0, B >= 1");
    return {-s.b * s.a, -0.5 * s.b * s.b - std::pow(s.B, p.s) * s.a * s.a - s.a, 1.0};
}

ExpAuxRates rhs_aux_exp(const ExpAuxState& s, double t) {
    if (!(s.a > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": require a > 0");
    return {-s.b * s.a, -0.5 * s.b * s.b - std::exp(t) * s.a * s.a - s.a};
}

RhoPath rho_path_from(const Trajectory& traj, std::size_t rho_index) {
    RhoPath path;
    path.nodes = traj.times;
    // The trajectory is copied into the closure so the path owns its data.
    path.rho = [traj, rho_index](double t) { return dense_eval(traj, t, rho_index); };
    return path;
}

double reconstruct_A(const SpectralState& initial, const RhoPath& path, const PrescribedF& f, double t) {
    require_positive_density(initial.rho);
    if (t < 0.0) throw Error(std::string(msg::kInvalidArgument) + ": t must be >= 0");

    double i1 = 0.0, i2 = 0.0;
    if (t > 0.0) {
        if (path.nodes.empty() || path.nodes.front() > 0.0 || path.nodes.back() < t)
            throw Error(std::string(msg::kInvalidArgument) + ": density path does not cover [0, t]");
        for (double node : path.nodes)
            if (node <= t) require_positive_density(path.rho(node));
        require_positive_density(path.rho(t));
        for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
            double lo = path.nodes[i];
            if (lo >= t) break;
            double hi = std::min(path.nodes[i + 1], t);
            double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                double tq = mid + half * kGlNodes[q];
                double rho = path.rho(tq);
                require_positive_density(rho);
                i1 += half * kGlWeights[q] * eval_forcing(f.f1, tq) / rho;
                i2 += half * kGlWeights[q] * eval_forcing(f.f2, tq) / rho;
            }
        }
    }
    double w = initial.omega / initial.rho;
    double e = initial.eta / initial.rho + i1;
    double x = initial.xi / initial.rho + i2;
    return 0.5 * (w * w - e * e - x * x);
}

Matrix2 gradient_matrix(const SpectralState& s) {
    return {{{0.5 * (s.d + s.eta), 0.5 * (s.xi - s.omega)}, {0.5 * (s.xi + s.omega), 0.5 * (s.d - s.eta)}}};
}

double first_integral(const ClosedState& s, double a, const Params& p) {
    require_positive_density(s.rho);
    return s.d * s.d / s.rho + 2.0 * a * s.rho + 2.0 * p.k * std::log(s.rho) + 2.0 * p.k * p.c_b / s.rho;
}

double a_cap(double omega0, double rho0) {
    require_positive_density(rho0);
    double r = omega0 / rho0;
    return 0.5 * r * r;
}

RhsFn closed_system(ForcingSignal a, Params p) {
    return [a = std::move(a), p](double t, std::span<const double> y, std::span<double> dy) {
        double av = eval_forcing(a, t);
        dy[0] = -y[0] * y[1];
        dy[1] = -0.5 * y[1] * y[1] + av * y[0] * y[0] + p.k * (y[0] - p.c_b);
    };
}

RhsFn spectral_system(PrescribedF f, Params p) {
    return [f = std::move(f), p](double t, std::span<const double> y, std::span<double> dy) {
        double f1 = eval_forcing(f.f1, t);
        double f2 = eval_forcing(f.f2, t);
        double rho = y[0], d = y[1], om = y[2], eta = y[3], xi = y[4];
        dy[0] = -rho * d;
        dy[1] = -0.5 * d * d - 0.5 * eta * eta + 0.5 * om * om - 0.5 * xi * xi + p.k * (rho - p.c_b);
        dy[2] = -om * d;
        dy[3] = -eta * d + f1;
        dy[4] = -xi * d + f2;
    };
}

RhsFn aux_poly_system(Params p) {
    return [p](double, std::span<const double> y, std::span<double> dy) {
        double a = y[0], b = y[1], B = y[2];
        dy[0] = -b * a;
        dy[1] = -0.5 * b * b - std::pow(B, p.s) * a * a - a;
        dy[2] = 1.0;
    };
}

RhsFn aux_exp_system() {
    return [](double t, std::span<const double> y, std::span<double> dy) {
        double a = y[0], b = y[1];
        dy[0] = -b * a;
        dy[1] = -0.5 * b * b - std::exp(t) * a * a - a;
    };
}

}  // namespace rct

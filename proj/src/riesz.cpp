#include "rct/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rct/error.hpp"
#include "rct/parallel.hpp"
#include "rct/rng.hpp"

namespace rct {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss–Legendre on [-1, 1]
constexpr std::array<double, 8> kGlX{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlW{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};

// Bumps farther than this many widths from a circle are skipped on it.
constexpr double kSkipWidths = 9.0;
constexpr double kTailWidths = 8.0;

// integral over [eps, r_out] x [0, 2 pi) of (1/r) {cos 2t, sin 2t} rho(x - r e_t) dr dt
struct Moments {
    double c = 0.0;
    double s = 0.0;
};

struct Resolved {
    int n_theta = 0;
    int panels = 0;
    double r_out = 0.0;
    double eps = 0.0;
};

Resolved resolve(const DensityField& rho, const Vec2& x, const QuadratureConfig& q) {
    Resolved r;
    r.n_theta = q.n_theta;
    double smin = rho.sigma_min();
    r.eps = q.eps > 0.0 ? q.eps : 1e-6 * smin;
    if (q.r_out > 0.0) {
        r.r_out = q.r_out;
    } else {
        for (const auto& b : rho.components) {
            double dist = std::hypot(x[0] - b.center[0], x[1] - b.center[1]);
            r.r_out = std::max(r.r_out, dist + kTailWidths * b.sigma);
        }
    }
    if (!(r.eps < r.r_out)) throw Error(std::string(msg::kInvalidArgument) + ": eps must be below r_out");
    r.panels = q.panels > 0 ? q.panels : static_cast<int>(std::ceil((r.r_out - r.eps) / (0.5 * smin)));
    r.panels = std::max(r.panels, 1);
    return r;
}

Moments moments_on(const DensityField& rho, const Vec2& x, int n_theta, double r_lo, double r_hi, int panels) {
    struct Local {
        double dx, dy, inv2s2, amp, dist, reach;
    };
    std::vector<Local> comps;
    comps.reserve(rho.components.size());
    for (const auto& b : rho.components) {
        double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
        comps.push_back({dx, dy, 1.0 / (2.0 * b.sigma * b.sigma), b.mass / (2.0 * kPi * b.sigma * b.sigma),
                         std::hypot(dx, dy), kSkipWidths * b.sigma});
    }
    std::vector<double> ct(n_theta), st(n_theta), c2(n_theta), s2(n_theta);
    for (int j = 0; j < n_theta; ++j) {
        double th = 2.0 * kPi * j / n_theta;
        ct[j] = std::cos(th);
        st[j] = std::sin(th);
        c2[j] = std::cos(2.0 * th);
        s2[j] = std::sin(2.0 * th);
    }
    const double dth = 2.0 * kPi / n_theta;
    const double width = (r_hi - r_lo) / panels;

    Moments m;
    std::vector<const Local*> active;
    for (int p = 0; p < panels; ++p) {
        double a = r_lo + p * width, b = a + width;
        active.clear();
        for (const auto& c : comps)
            if (a - c.reach <= c.dist && c.dist <= b + c.reach) active.push_back(&c);
        if (active.empty()) continue;
        for (std::size_t g = 0; g < kGlX.size(); ++g) {
            double r = 0.5 * (a + b) + 0.5 * width * kGlX[g];
            double wr = 0.5 * width * kGlW[g] * dth / r;
            double sc = 0.0, ss = 0.0;
            for (int j = 0; j < n_theta; ++j) {
                // y = x - r e_theta
                double v = 0.0;
                for (const Local* c : active) {
                    double px = c->dx - r * ct[j], py = c->dy - r * st[j];
                    v += c->amp * std::exp(-(px * px + py * py) * c->inv2s2);
                }
                sc += c2[j] * v;
                ss += s2[j] * v;
            }
            m.c += wr * sc;
            m.s += wr * ss;
        }
    }
    return m;
}

Moments moments(const DensityField& rho, const Vec2& x, const QuadratureConfig& q, const Resolved& r) {
    Moments m = moments_on(rho, x, r.n_theta, r.eps, r.r_out, r.panels);
    if (q.richardson) {
        // the cut disc contributes O(eps^2); extrapolate with the [eps/2, eps] ring
        Moments ring = moments_on(rho, x, r.n_theta, 0.5 * r.eps, r.eps, 1);
        m.c += ring.c * 4.0 / 3.0;
        m.s += ring.s * 4.0 / 3.0;
    }
    return m;
}

double peak_scale(const DensityField& rho) {
    double s = 0.0;
    for (const auto& b : rho.components) s += b.mass / (2.0 * kPi * b.sigma * b.sigma);
    return s;
}

struct Converged {
    Moments m;
    double change = 0.0;
    int refinements = 0;
    double r_out = 0.0;
};

Converged converged_moments(const DensityField& rho, const Vec2& x, const QuadratureConfig& q,
                            bool need_c, bool need_s) {
    Resolved r = resolve(rho, x, q);
    const double floor = 1e-10 * peak_scale(rho);
    Moments coarse = moments(rho, x, q, r);
    for (int level = 0; level <= q.max_refinements; ++level) {
        Resolved fine = r;
        fine.n_theta *= 2;
        fine.panels *= 2;
        Moments m = moments(rho, x, q, fine);
        double change = 0.0;
        if (need_c) change = std::max(change, std::abs(m.c - coarse.c) / std::max(std::abs(m.c), floor));
        if (need_s) change = std::max(change, std::abs(m.s - coarse.s) / std::max(std::abs(m.s), floor));
        if (change <= q.rel_tol) return {m, change, level, r.r_out};
        r = fine;
        coarse = m;
    }
    throw Error(msg::kQuadratureNotConverged);
}

double tail_bound(const DensityField& rho, const Vec2& x, double r_out, double k) {
    // mass beyond r_out times the kernel bound 1/r_out^2
    double tail = 0.0;
    for (const auto& b : rho.components) {
        double dist = std::hypot(x[0] - b.center[0], x[1] - b.center[1]);
        double gap = std::max(0.0, r_out - dist) / b.sigma;
        tail += b.mass * std::exp(-0.5 * gap * gap);
    }
    return std::abs(k) / kPi * tail / (r_out * r_out);
}

}  // namespace

void DensityField::validate() const {
    if (!(background >= 0.0) || !std::isfinite(background))
        throw Error(std::string(msg::kInvalidArgument) + ": background must be finite and >= 0");
    for (const auto& b : components) {
        if (!(b.mass > 0.0) || !std::isfinite(b.mass) || !(b.sigma > 0.0) || !std::isfinite(b.sigma) ||
            !std::isfinite(b.center[0]) || !std::isfinite(b.center[1]))
            throw Error(std::string(msg::kInvalidArgument) + ": bump needs finite center, mass > 0, sigma > 0");
    }
}

double DensityField::bumps_at(const Vec2& y) const {
    double v = 0.0;
    for (const auto& b : components) {
        double dx = y[0] - b.center[0], dy = y[1] - b.center[1];
        v += b.mass / (2.0 * kPi * b.sigma * b.sigma) * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    }
    return v;
}

double DensityField::operator()(const Vec2& y) const { return background + bumps_at(y); }

double DensityField::sigma_min() const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& b : components) s = std::min(s, b.sigma);
    return s;
}

DensityField DensityField::shifted(const Vec2& v) const {
    DensityField out = *this;
    for (auto& b : out.components) {
        b.center[0] += v[0];
        b.center[1] += v[1];
    }
    return out;
}

void QuadratureConfig::validate() const {
    if (n_theta < 16 || n_theta % 2 != 0) throw Error(std::string(msg::kInvalidArgument) + ": n_theta must be even and >= 16");
    if (panels < 0 || max_refinements < 0 || !(rel_tol > 0.0))
        throw Error(std::string(msg::kInvalidArgument) + ": bad quadrature settings");
    if (eps < 0.0 || r_out < 0.0 || (eps > 0.0 && r_out > 0.0 && !(eps < r_out)))
        throw Error(std::string(msg::kInvalidArgument) + ": need 0 < eps < r_out");
}

double kernel_f1(const Vec2& y) {
    double r2 = y[0] * y[0] + y[1] * y[1];
    if (r2 == 0.0) throw Error(msg::kKernelSingularity);
    return (-y[0] * y[0] + y[1] * y[1]) / (r2 * r2);
}

double kernel_f2(const Vec2& y) {
    double r2 = y[0] * y[0] + y[1] * y[1];
    if (r2 == 0.0) throw Error(msg::kKernelSingularity);
    return -2.0 * y[0] * y[1] / (r2 * r2);
}

PvEstimate riesz_pv_estimate(const DensityField& density, const Vec2& x, RieszWhich which, double k,
                             const QuadratureConfig& q) {
    density.validate();
    q.validate();
    PvEstimate est;
    if (density.components.empty()) return est;
    bool f1 = which == RieszWhich::F1;
    auto c = converged_moments(density, x, q, f1, !f1);
    // kernel_f1 = -cos 2t / r^2, kernel_f2 = -sin 2t / r^2
    est.value = k / kPi * -(f1 ? c.m.c : c.m.s);
    est.change = c.change;
    est.refinements = c.refinements;
    est.tail_bound = tail_bound(density, x, c.r_out, k);
    return est;
}

double riesz_pv(const DensityField& density, const Vec2& x, RieszWhich which, double k, const QuadratureConfig& q) {
    return riesz_pv_estimate(density, x, which, k, q).value;
}

Matrix2 riesz_matrix(const DensityField& density, const Vec2& x, const QuadratureConfig& q) {
    density.validate();
    q.validate();
    double h = density(x);
    Matrix2 R{{{0.5 * h, 0.0}, {0.0, 0.5 * h}}};
    if (density.components.empty()) return R;
    auto c = converged_moments(density, x, q, true, true);
    const double inv = 1.0 / (2.0 * kPi);
    R[0][0] += -inv * c.m.c;
    R[1][1] += inv * c.m.c;
    R[0][1] = -inv * c.m.s;
    R[1][0] = R[0][1];
    return R;
}

InitialA initial_A(double omega0, double eta0, double xi0, double rho0, const Params& p) {
    require_positive_density(rho0);
    double w = omega0 / rho0, e = eta0 / rho0, x = xi0 / rho0;
    InitialA out;
    out.value = 0.5 * (w * w - e * e - x * x);
    out.admissible = out.value >= -std::pow(p.beta, p.s);
    return out;
}

DensityField reference_density() {
    return DensityField{{{{0.0, 0.0}, 1.0, 0.4}, {{1.5, -0.5}, 2.0, 0.6}, {{-0.8, 1.1}, 0.5, 0.25}}, 0.3};
}

RieszCheckReport verify_riesz(std::size_t points, std::uint64_t seed, const QuadratureConfig& q) {
    RieszCheckReport rep;
    DensityField radial{{{{0.5, -0.25}, 1.0, 0.5}, {{0.5, -0.25}, 0.5, 1.5}}, 0.0};
    rep.center_f1 = std::abs(riesz_pv(radial, {0.5, -0.25}, RieszWhich::F1, 1.0, q));
    rep.center_f2 = std::abs(riesz_pv(radial, {0.5, -0.25}, RieszWhich::F2, 1.0, q));

    DensityField d = reference_density();
    rep.trace_points.resize(points);
    parallel_for(points, [&](std::size_t i) {
        Rng rng(seed, i);
        Vec2 x{rng.uniform(-2.0, 3.0), rng.uniform(-2.0, 2.0)};
        auto R = riesz_matrix(d, x, q);
        rep.trace_points[i] = {x, std::abs(R[0][0] + R[1][1] - d(x))};
    });
    for (const auto& p : rep.trace_points) rep.max_trace_residual = std::max(rep.max_trace_residual, p.residual);

    const double sigma = 0.05, m = 1.0, r = 10.0 * sigma;
    DensityField narrow{{{{0.0, 0.0}, m, sigma}}, 0.0};
    double expect = -m / (kPi * r * r);
    rep.far_field_rel_error = std::abs(riesz_pv(narrow, {r, 0.0}, RieszWhich::F1, 1.0, q) - expect) / std::abs(expect);
    return rep;
}

}  // namespace rct

#include "rct/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rct/error.hpp"
#include "rct/parallel.hpp"
#include "rct/rng.hpp"

namespace rct {

namespace {

// c * x^p as x -> infinity.
struct Monomial {
    double coef = 0.0;
    double power = 0.0;
};

bool same_power(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

Monomial leading_asymptotic(const SurfaceParams& sp) {
    double two_m = 2.0 * sp.M;
    if (same_power(two_m, sp.s)) return {0.5 * sp.m1 * sp.m1 - 1.0, two_m};
    if (two_m > sp.s) return {0.5 * sp.m1 * sp.m1, two_m};
    return {-1.0, sp.s};
}

Monomial slope_term_asymptotic(const SurfaceParams& sp) {
    if (same_power(sp.M, 1.0)) return {(1.0 + sp.m1) * (1.0 + sp.m1), 0.0};
    return {sp.m1 * sp.M * sp.m1 * sp.M, 2.0 * sp.M - 2.0};
}

Monomial constant_term_asymptotic(const SurfaceParams& sp) {
    if (same_power(sp.N, 1.0)) return {sp.n1 - 0.5 * sp.n1 * sp.n1, -2.0};
    if (sp.N < 1.0) return {-0.5 * sp.n1 * sp.n1, -2.0 * sp.N};
    return {sp.N * sp.n1, -sp.N - 1.0};
}

// D(x) -> -inf (or stays negative) with a positive leading coefficient.
struct Asymptotics {
    bool leading_positive = false;
    bool discriminant_negative = false;
};

Asymptotics asymptotics(const SurfaceParams& sp) {
    Monomial lead = leading_asymptotic(sp);
    Monomial p = slope_term_asymptotic(sp);
    Monomial c = constant_term_asymptotic(sp);
    Monomial q{-4.0 * lead.coef * c.coef, lead.power + c.power};

    Asymptotics out;
    out.leading_positive = lead.coef > 0.0;
    double dominant;
    if (c.coef == 0.0 || same_power(p.power, q.power))
        dominant = p.coef + (c.coef == 0.0 ? 0.0 : q.coef);
    else
        dominant = p.power > q.power ? p.coef : q.coef;
    out.discriminant_negative = dominant < 0.0;
    return out;
}

bool margin_ok(double x, const SurfaceParams& sp) {
    auto d = discriminant(x, sp);
    return d.D < 0.0 && d.leading > 0.0;
}

template <class Pred>
double bisect_last_true(double lo, double hi, Pred&& ok) {
    while (hi - lo > kBisectionTol) {
        double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

void SurfaceParams::validate() const {
    if (!(m1 > std::sqrt(2.0))) throw Error(std::string(msg::kInvalidArgument) + ": m1 > sqrt(2) required");
    if (!(m2 > 0.0) || !(n1 > 0.0) || !(n2 > 0.0) || !(N > 0.0))
        throw Error(std::string(msg::kInvalidArgument) + ": m2, n1, n2, N must be positive");
    if (!(M >= 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": M >= 1 required");
    if (!(s >= 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": s >= 1 required");
}

double m_of(double x, const SurfaceParams& sp) { return sp.m1 * std::pow(x + sp.m2, sp.M); }
double n_of(double x, const SurfaceParams& sp) { return sp.n1 * std::pow(x + sp.n2, -sp.N); }
double dm_of(double x, const SurfaceParams& sp) { return sp.m1 * sp.M * std::pow(x + sp.m2, sp.M - 1.0); }
double dn_of(double x, const SurfaceParams& sp) { return -sp.N * sp.n1 * std::pow(x + sp.n2, -sp.N - 1.0); }

double surface_F(double a, double b, double B, const SurfaceParams& sp) {
    double x = B - 1.0;
    return b - m_of(x, sp) * a - n_of(x, sp);
}

double transversality_margin(double a, double x, const SurfaceParams& sp) {
    double m = m_of(x, sp), n = n_of(x, sp);
    double lead = 0.5 * m * m - std::pow(x + 1.0, sp.s);
    return lead * a * a - (1.0 + dm_of(x, sp)) * a - 0.5 * n * n - dn_of(x, sp);
}

Discriminant discriminant(double x, const SurfaceParams& sp) {
    double m = m_of(x, sp), n = n_of(x, sp);
    Discriminant d;
    d.leading = 0.5 * m * m - std::pow(x + 1.0, sp.s);
    d.constant = -0.5 * n * n - dn_of(x, sp);
    double slope = 1.0 + dm_of(x, sp);
    d.D = slope * slope - 4.0 * d.leading * d.constant;
    return d;
}

std::string verdict_name(const Verdict& v) {
    if (std::holds_alternative<verdict::GloballyCertified>(v)) return "GloballyCertified";
    if (std::holds_alternative<verdict::HorizonCertified>(v)) return "HorizonCertified";
    return "InfeasibleAtZero";
}

double FeasibilityReport::certified_T() const {
    if (std::holds_alternative<verdict::GloballyCertified>(verdict)) return std::numeric_limits<double>::infinity();
    if (const auto* h = std::get_if<verdict::HorizonCertified>(&verdict)) return h->T;
    return 0.0;
}

FeasibilityReport certified_horizon(const SurfaceParams& sp, double x_max) {
    if (!(x_max > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": x_max must be positive");
    FeasibilityReport rep;
    rep.x_max = x_max;
    const Asymptotics asym = asymptotics(sp);
    rep.asymptotically_favorable = asym.leading_positive && asym.discriminant_negative;

    const auto steps = static_cast<std::size_t>(std::ceil(x_max / kScanStep - 1e-9));
    auto grid = [&](std::size_t i) { return std::min(x_max, static_cast<double>(i) * kScanStep); };

    // Leading coefficient alone.
    rep.leading_ok_until.reset();
    bool leading_failed = discriminant(0.0, sp).leading <= 0.0;
    if (leading_failed) rep.leading_ok_until = 0.0;
    for (std::size_t i = 1; i <= steps && !leading_failed; ++i) {
        if (discriminant(grid(i), sp).leading <= 0.0) {
            leading_failed = true;
            rep.leading_ok_until = bisect_last_true(grid(i - 1), grid(i), [&](double x) {
                return discriminant(x, sp).leading > 0.0;
            });
        }
    }
    if (!leading_failed && !asym.leading_positive) rep.leading_ok_until = x_max;

    for (std::size_t i = 0; i <= steps; ++i) {
        if (i % 100 == 0 || i == steps) {
            double x = grid(i);
            auto d = discriminant(x, sp);
            rep.samples.push_back({x, d.D, d.leading});
        }
    }

    if (!margin_ok(0.0, sp)) {
        rep.disc_negative_until = 0.0;
        rep.sign_change_found = true;
        rep.verdict = verdict::InfeasibleAtZero{};
        return rep;
    }

    for (std::size_t i = 1; i <= steps; ++i) {
        if (!margin_ok(grid(i), sp)) {
            double T = bisect_last_true(grid(i - 1), grid(i), [&](double x) { return margin_ok(x, sp); });
            rep.disc_negative_until = T;
            rep.sign_change_found = true;
            rep.verdict = verdict::HorizonCertified{T};
            return rep;
        }
    }

    rep.disc_negative_until = x_max;
    if (rep.asymptotically_favorable)
        rep.verdict = verdict::GloballyCertified{};
    else
        rep.verdict = verdict::HorizonCertified{x_max};
    return rep;
}

double paper_n1_bound(double m1, double m2, double M) {
    double m2M = std::pow(m2, M);
    double num = m2 + m1 * M * m2M;
    double frac = num * num / (2.0 * (m1 * m1 - 2.0) * m2M * m2M) + 0.5;
    return std::max(frac, 1.0);
}

PaperParamsReport paper_params(double s, const PaperRuleOverrides& ov, double x_max) {
    if (!(s >= 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": s >= 1 required");
    PaperParamsReport rep;
    SurfaceParams& sp = rep.params;
    sp.s = s;
    sp.N = 1.0;
    sp.M = ov.M.value_or(std::max(s / 2.0, 1.0));
    sp.m1 = ov.m1.value_or(2.0);
    sp.m2 = ov.m2.value_or(2.0);
    sp.n2 = ov.n2.value_or(1.0);
    if (!(sp.m1 > std::sqrt(2.0))) throw Error(std::string(msg::kInvalidArgument) + ": m1 > sqrt(2) required");
    rep.n1_bound = paper_n1_bound(sp.m1, sp.m2, sp.M);
    sp.n1 = ov.n1.value_or(rep.n1_bound + 1.0);
    sp.validate();

    rep.checks = {
        {"M >= max{s/2, 1}", sp.M >= std::max(s / 2.0, 1.0)},
        {"m1 > sqrt(2)", sp.m1 > std::sqrt(2.0)},
        {"m2 > max{n2, 1}", sp.m2 > std::max(sp.n2, 1.0)},
        {"n2 > 0", sp.n2 > 0.0},
        {"N = 1", sp.N == 1.0},
        {"n1 > n1_bound", sp.n1 > rep.n1_bound},
    };
    rep.all_rules_hold = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.satisfied; });
    rep.feasibility = certified_horizon(sp, x_max);
    return rep;
}

MembershipResult omega_region_membership(double rho0, double d0, const SurfaceParams& sp, RegionMode mode) {
    require_positive_density(rho0);
    MembershipResult r;
    r.n_star = sp.n1 * sp.n2;
    r.n_zero = n_of(0.0, sp);
    r.slope = sp.m1 * std::pow(sp.m2, sp.M);
    r.intercept = mode == RegionMode::Theorem ? r.n_star : r.n_zero;
    if (mode == RegionMode::Theorem && !(d0 > 0.0)) {
        r.failed = "d > 0";
        return r;
    }
    if (!(d0 > r.slope * rho0 + r.intercept)) {
        r.failed = mode == RegionMode::Theorem ? "d > m* rho + n*" : "b > m(0) a + n(0)";
        return r;
    }
    r.inside = true;
    return r;
}

namespace {

struct SampleOutcome {
    bool rejected = false;
    bool completed = true;
    double min_F = std::numeric_limits<double>::infinity();
    std::vector<InvarianceViolation> violations;
};

SampleOutcome run_invariance_sample(const SurfaceParams& sp, double a0, double b0, double T,
                                    const IntegratorConfig& cfg, const RhsFn& rhs) {
    SampleOutcome out;
    if (!(a0 > 0.0) || !(surface_F(a0, b0, 1.0, sp) > 0.0)) {
        out.rejected = true;
        return out;
    }
    std::vector<double> y0{a0, b0, 1.0};
    static const std::vector<std::string> names{"a", "b", "B"};
    Trajectory tr = integrate(rhs, y0, 0.0, T, cfg, {}, names);
    out.completed = tr.completed();
    if (!out.completed)
        out.violations.push_back({a0, b0, tr.t_end(), "status:" + status_name(tr.status), tr.final_state()[1]});

    bool seen_F = false, seen_b = false, seen_a = false;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& y = tr.states[i];
        double F = surface_F(y[0], y[1], y[2], sp);
        out.min_F = std::min(out.min_F, F);
        if (F <= -1e-9 && !seen_F) {
            out.violations.push_back({a0, b0, tr.times[i], "F", F});
            seen_F = true;
        }
        if (!(y[1] > 0.0) && !seen_b) {
            out.violations.push_back({a0, b0, tr.times[i], "b", y[1]});
            seen_b = true;
        }
        if (y[0] > a0 * (1.0 + 1e-12) && !seen_a) {
            out.violations.push_back({a0, b0, tr.times[i], "a", y[0]});
            seen_a = true;
        }
    }
    return out;
}

InvarianceReport aggregate(const std::vector<SampleOutcome>& outcomes) {
    InvarianceReport rep;
    rep.samples = outcomes.size();
    rep.min_F = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) {
        if (o.rejected) {
            ++rep.rejected;
            continue;
        }
        ++rep.integrated;
        if (!o.completed) ++rep.non_completed;
        rep.min_F = std::min(rep.min_F, o.min_F);
        rep.violations.insert(rep.violations.end(), o.violations.begin(), o.violations.end());
    }
    return rep;
}

}  // namespace

InvarianceReport verify_invariance_from(const SurfaceParams& sp, const std::vector<std::pair<double, double>>& initials,
                                        double T, const IntegratorConfig& cfg) {
    sp.validate();
    Params p;
    p.s = sp.s;
    RhsFn rhs = aux_poly_system(p);
    std::vector<SampleOutcome> outcomes(initials.size());
    parallel_for(initials.size(), [&](std::size_t i) {
        outcomes[i] = run_invariance_sample(sp, initials[i].first, initials[i].second, T, cfg, rhs);
    });
    return aggregate(outcomes);
}

InvarianceReport verify_invariance(const SurfaceParams& sp, std::size_t sample_count, double T, std::uint64_t seed,
                                   const IntegratorConfig& cfg, const InvarianceBox& box) {
    sp.validate();
    if (!(T > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": T must be positive");
    FeasibilityReport cert = certified_horizon(sp, T);
    if (cert.sign_change_found) throw Error(msg::kHorizonNotCertified);

    std::vector<std::pair<double, double>> initials(sample_count);
    const double m0 = m_of(0.0, sp), n0 = n_of(0.0, sp);
    for (std::size_t i = 0; i < sample_count; ++i) {
        Rng rng(seed, i);
        double a = rng.uniform_open_closed(0.0, box.a_max);
        double F = rng.uniform_open_closed(0.0, box.F_max);
        initials[i] = {a, m0 * a + n0 + F};
    }
    return verify_invariance_from(sp, initials, T, cfg);
}

}  // namespace rct

#include "rct/comparison.hpp"

#include <algorithm>
#include <cmath>

#include "rct/error.hpp"
#include "rct/parallel.hpp"

namespace rct {

namespace {

const std::vector<std::string> kJointNames{"rho", "d", "a", "b"};
const std::vector<std::string> kExpNames{"a", "b"};

double relative_drift(double e, double e0) { return std::abs(e - e0) / std::max(1.0, std::abs(e0)); }

}  // namespace

OrderingReport coupled_compare(const ClosedState& closed0, double a0, double b0, const ForcingSignal& A,
                               const Params& p, double T, const IntegratorConfig& cfg) {
    p.validate();
    cfg.validate();
    if (!(T > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": T must be positive");
    if (!(b0 < closed0.d) || !(closed0.rho > 0.0) || !(closed0.rho < a0)) throw Error(msg::kOrderingPrecondition);
    if (!envelope_respecting(A, p, T)) throw Error(msg::kEnvelopeViolated);

    const double k_abs = std::abs(p.k);
    RhsFn rhs = [&A, p, k_abs](double t, std::span<const double> y, std::span<double> dy) {
        double av = A(t);
        if (!std::isfinite(av)) throw Error(msg::kForcingFailed);
        double rho = y[0], d = y[1], a = y[2], b = y[3];
        double fl = std::pow(p.alpha * t + p.beta, p.s);
        dy[0] = -rho * d;
        dy[1] = -0.5 * d * d + av * rho * rho + p.k * (rho - p.c_b);
        dy[2] = -b * a;
        dy[3] = -0.5 * b * b - fl * a * a - k_abs * a;
    };

    std::vector<double> y0{closed0.rho, closed0.d, a0, b0};
    std::vector<double> bps = A.breakpoints();
    OrderingReport rep;
    rep.joint = integrate_segmented(rhs, y0, 0.0, T, bps, cfg, {}, kJointNames);
    rep.status = rep.joint.status;
    rep.t_end = rep.joint.t_end();
    rep.min_d_minus_b = std::numeric_limits<double>::infinity();
    rep.min_a_minus_rho = std::numeric_limits<double>::infinity();

    bool seen_db = false, seen_ar = false;
    for (std::size_t i = 0; i < rep.joint.times.size(); ++i) {
        const auto& y = rep.joint.states[i];
        double t = rep.joint.times[i];
        double db = y[1] - y[3], ar = y[2] - y[0];
        if (db < rep.min_d_minus_b) {
            rep.min_d_minus_b = db;
            rep.t_min_d_minus_b = t;
        }
        if (ar < rep.min_a_minus_rho) {
            rep.min_a_minus_rho = ar;
            rep.t_min_a_minus_rho = t;
        }
        if (db < -kOrderingTolerance && !seen_db) {
            rep.violations.push_back({t, "d-b", db});
            seen_db = true;
        }
        if (ar < -kOrderingTolerance && !seen_ar) {
            rep.violations.push_back({t, "a-rho", ar});
            seen_ar = true;
        }
    }
    return rep;
}

double d_upper_bound_w(double d0, double rho_M, double w, double k, double c_b) {
    if (!(rho_M > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": rho_M must be positive");
    // max of the convex w rho^2 + k (rho - c_b) over (0, rho_M] sits at an end
    double inner = std::max({0.0, -k * c_b, w * rho_M * rho_M + k * (rho_M - c_b)});
    return std::max(d0, std::sqrt(2.0 * inner));
}

double d_upper_bound(double d0, double rho_M, double omega0, double rho0, double k, double c_b) {
    if (!(rho0 > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": rho0 must be positive");
    return d_upper_bound_w(d0, rho_M, a_cap(omega0, rho0), k, c_b);
}

ForcingSignal random_envelope_signal(Rng& rng, const Params& p, double w, double horizon, int max_pieces) {
    if (max_pieces < 1 || !(horizon > 0.0)) throw Error(msg::kInvalidArgument);
    int pieces = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_pieces)));
    forcing::Piecewise pw;
    for (int i = 1; i < pieces; ++i) pw.breakpoints.push_back(rng.uniform(0.0, horizon));
    std::sort(pw.breakpoints.begin(), pw.breakpoints.end());
    pw.breakpoints.erase(std::unique(pw.breakpoints.begin(), pw.breakpoints.end()), pw.breakpoints.end());
    double start = 0.0;
    for (std::size_t i = 0; i <= pw.breakpoints.size(); ++i) {
        pw.values.push_back(rng.uniform(envelope_floor(start, p), w));
        if (i < pw.breakpoints.size()) start = pw.breakpoints[i];
    }
    return ForcingSignal(std::move(pw), w);
}

ComparisonScenario comparison_scenario(std::uint64_t seed, std::uint64_t index) {
    Rng rng(seed, index);
    ComparisonScenario sc;
    sc.index = index;
    sc.params.k = rng.coin() ? 1.0 : -1.0;
    sc.params.c_b = 0.0;
    sc.params.s = rng.uniform(1.0, 3.0);
    sc.params.alpha = rng.uniform(0.5, 1.5);
    sc.params.beta = rng.uniform(0.5, 1.5);
    sc.closed0.rho = rng.uniform_open_closed(0.1, 3.0);
    sc.a0 = sc.closed0.rho + rng.uniform_open_closed(0.0, 2.0);
    sc.closed0.d = rng.uniform(-3.0, 3.0);
    sc.b0 = sc.closed0.d - rng.uniform_open_closed(0.0, 2.0);
    double omega0 = rng.uniform(0.0, 3.0);
    sc.w = a_cap(omega0, sc.closed0.rho);
    sc.T = 10.0;
    sc.A = random_envelope_signal(rng, sc.params, sc.w, sc.T);
    return sc;
}

ComparisonBatchReport verify_comparison_indices(const std::vector<std::uint64_t>& indices, std::uint64_t seed,
                                                const IntegratorConfig& cfg) {
    std::vector<OrderingReport> reports(indices.size());
    parallel_for(indices.size(), [&](std::size_t i) {
        auto sc = comparison_scenario(seed, indices[i]);
        reports[i] = coupled_compare(sc.closed0, sc.a0, sc.b0, sc.A, sc.params, sc.T, cfg);
        reports[i].joint = {};
    });

    ComparisonBatchReport out;
    out.scenarios = indices.size();
    out.min_d_minus_b = std::numeric_limits<double>::infinity();
    out.min_a_minus_rho = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (std::holds_alternative<BlowUp>(r.status)) ++out.blowups;
        out.min_d_minus_b = std::min(out.min_d_minus_b, r.min_d_minus_b);
        out.min_a_minus_rho = std::min(out.min_a_minus_rho, r.min_a_minus_rho);
        if (!r.ordered()) out.failures.push_back({indices[i], r.violations});
    }
    return out;
}

ComparisonBatchReport verify_comparison(std::size_t count, std::uint64_t seed, const IntegratorConfig& cfg) {
    std::vector<std::uint64_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    return verify_comparison_indices(idx, seed, cfg);
}

// ---- exponential system ----

std::string region_name(RegionLabel r) {
    switch (r) {
        case RegionLabel::OmegaB: return "Omega_B";
        case RegionLabel::OmegaM: return "Omega_M";
        case RegionLabel::OmegaT: return "Omega_T";
    }
    return "?";
}

RegionLabel classify_exp_region(double a, double b) {
    if (!(a > 0.0) || std::isnan(b)) throw Error(msg::kOutsideDomain);
    if (b < 0.0) return RegionLabel::OmegaB;
    if (b < 0.5) return RegionLabel::OmegaM;
    return RegionLabel::OmegaT;
}

namespace {

// Bound in the middle region started at time t_e from b <= b_e, a >= a_e:
//   b(t_e + tau) <= g(tau) = b_e - K (e^{c tau} - 1)/c,  K = e^{t_e} a_e^2,  c = 1 - 2 b_e.
struct MiddleStage {
    double b_e = 0.0;
    double K = 0.0;
    double c = 0.0;

    double growth(double tau) const { return std::abs(c) < 1e-12 ? tau : std::expm1(c * tau) / c; }
    double g(double tau) const { return b_e - K * growth(tau); }

    // first tau with g <= 0; inf when g stays positive
    double zero() const {
        if (b_e <= 0.0) return 0.0;
        if (std::abs(c) < 1e-12) return b_e / K;
        double arg = c * b_e / K;
        if (1.0 + arg <= 0.0) return std::numeric_limits<double>::infinity();
        return std::log1p(arg) / c;
    }

    // restart the b < 0 bound from tau: blow-up by tau - 2/g(tau)
    double total(double tau) const {
        double gv = g(tau);
        if (!(gv < 0.0)) return std::numeric_limits<double>::infinity();
        return tau - 2.0 / gv;
    }
};

struct StageChoice {
    double tau = 0.0;
    double total = std::numeric_limits<double>::infinity();
};

StageChoice best_restart(const MiddleStage& st) {
    StageChoice best;
    double tau0 = st.zero();
    if (!std::isfinite(tau0)) return best;
    if (st.b_e < 0.0) best = {0.0, st.total(0.0)};

    const int n = 400;
    double lo = std::log(1e-10 * std::max(1.0, tau0)), hi = std::log(200.0);
    std::vector<double> taus(n);
    int jbest = -1;
    for (int j = 0; j < n; ++j) {
        taus[j] = tau0 + std::exp(lo + (hi - lo) * j / (n - 1));
        double v = st.total(taus[j]);
        if (v < best.total) {
            best = {taus[j], v};
            jbest = j;
        }
    }
    if (jbest < 0) return best;

    // golden section between the neighbours of the best grid point
    double a = taus[std::max(0, jbest - 1)], b = taus[std::min(n - 1, jbest + 1)];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = st.total(x1), f2 = st.total(x2);
    for (int it = 0; it < 100 && b - a > 1e-13 * std::max(1.0, b); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = st.total(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = st.total(x2);
        }
    }
    if (f1 < best.total) best = {x1, f1};
    if (f2 < best.total) best = {x2, f2};
    return best;
}

// Top region: b <= 2/(t + 2/b0) and a >= a0 ((2/b0)/(t + 2/b0))^2.
MiddleStage from_top(double a0, double b0, double t_e) {
    double s = t_e + 2.0 / b0;
    double a_e = a0 * std::pow((2.0 / b0) / s, 2.0);
    MiddleStage st;
    st.b_e = 2.0 / s;
    st.K = std::exp(t_e) * a_e * a_e;
    st.c = 1.0 - 2.0 * st.b_e;
    return st;
}

}  // namespace

BlowupCertificate blowup_certificate(double a0, double b0) {
    if (!(a0 > 0.0) || !std::isfinite(b0)) throw Error(msg::kOutsideDomain);
    BlowupCertificate cert;

    if (b0 < 0.0) {
        cert.t_bound = -2.0 / b0;
        cert.stages.push_back({RegionLabel::OmegaB, 0.0, cert.t_bound});
        cert.b_upper = [b0](double t) { return 2.0 / (t + 2.0 / b0); };
        return cert;
    }

    double t_e = 0.0;
    MiddleStage st;
    StageChoice choice;
    if (b0 < 0.5) {
        st = {b0, a0 * a0, 1.0 - 2.0 * b0};
        choice = best_restart(st);
    } else {
        // the top stage may hand over at any time; the handover at b = 1/2 is t = 4 - 2/b0
        double t_half = 4.0 - 2.0 / b0;
        const int n = 400;
        double span = t_half + 100.0;
        double best_total = std::numeric_limits<double>::infinity();
        auto consider = [&](double te) {
            double v = te + best_restart(from_top(a0, b0, te)).total;
            if (v < best_total) {
                best_total = v;
                t_e = te;
            }
        };
        for (int i = 0; i < n; ++i) consider(span * i / (n - 1));
        double h = span / (n - 1), centre = t_e;
        for (int i = -20; i <= 20; ++i)
            if (centre + h * i / 20.0 >= 0.0) consider(centre + h * i / 20.0);
        st = from_top(a0, b0, t_e);
        choice = best_restart(st);
        cert.stages.push_back({RegionLabel::OmegaT, 0.0, t_e});
    }

    if (!std::isfinite(choice.total)) throw Error(msg::kQuadratureNotConverged);
    double t_restart = t_e + choice.tau;
    cert.t_bound = t_e + choice.total;
    cert.stages.push_back({RegionLabel::OmegaM, t_e, t_restart});
    cert.stages.push_back({RegionLabel::OmegaB, t_restart, cert.t_bound});

    double g_r = st.g(choice.tau);
    cert.b_upper = [b0, t_e, st, t_restart, g_r](double t) {
        if (t < t_e) return 2.0 / (t + 2.0 / b0);
        if (t <= t_restart) return st.g(t - t_e);
        return 2.0 / (t - t_restart + 2.0 / g_r);
    };
    return cert;
}

ExpBlowupSample run_exp_blowup(double a0, double b0, const IntegratorConfig& cfg) {
    ExpBlowupSample s;
    s.a0 = a0;
    s.b0 = b0;
    auto cert = blowup_certificate(a0, b0);
    s.t_bound = cert.t_bound;
    double horizon = std::min(cert.t_bound + 1.0, 1000.0);
    std::vector<double> y0{a0, b0};
    Trajectory tr = integrate(aux_exp_system(), y0, 0.0, horizon, cfg, {}, kExpNames);
    s.status = tr.status;

    s.curve_excess = -std::numeric_limits<double>::infinity();
    int prev_region = 3;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        double t = tr.times[i], a = tr.states[i][0], b = tr.states[i][1];
        if (t < cert.t_bound) s.curve_excess = std::max(s.curve_excess, b - cert.b_upper(t));
        if (i > 0 && !(b < tr.states[i - 1][1])) s.b_decreasing = false;
        if (a > 0.0) {
            int r = static_cast<int>(classify_exp_region(a, b));
            // OmegaB < OmegaM < OmegaT in the enum
            if (r > prev_region) s.region_monotone = false;
            prev_region = r;
        } else {
            s.region_monotone = false;
        }
    }
    return s;
}

ExpBlowupReport verify_exp_blowup(std::size_t sample_count, std::uint64_t seed, const IntegratorConfig& cfg,
                                  const ExpSampleBox& box) {
    std::vector<std::pair<double, double>> inits(sample_count);
    for (std::size_t i = 0; i < sample_count; ++i) {
        Rng rng(seed, i);
        double a = rng.uniform_open_closed(box.a_min, box.a_max);
        double lo = box.b_min, hi = box.b_max;
        switch (i % 3) {
            case 0: hi = std::min(hi, 0.0); break;
            case 1: lo = std::max(lo, 0.0), hi = std::min(hi, 0.5); break;
            default: lo = std::max(lo, 0.5); break;
        }
        if (!(lo < hi)) lo = box.b_min, hi = box.b_max;
        inits[i] = {a, rng.uniform(lo, hi)};
    }

    ExpBlowupReport rep;
    rep.samples = sample_count;
    rep.runs.resize(sample_count);
    parallel_for(sample_count, [&](std::size_t i) { rep.runs[i] = run_exp_blowup(inits[i].first, inits[i].second, cfg); });

    for (const auto& r : rep.runs) {
        if (const auto* bu = std::get_if<BlowUp>(&r.status)) {
            ++rep.blowups;
            if (bu->t_lower > r.t_bound + 1e-3) ++rep.bound_exceeded;
        } else {
            ++rep.bound_exceeded;
        }
        rep.max_curve_excess = std::max(rep.max_curve_excess, r.curve_excess);
        if (r.b0 < 0.0) rep.max_negative_b0_excess = std::max(rep.max_negative_b0_excess, r.curve_excess);
        if (!r.region_monotone) ++rep.region_failures;
        if (!r.b_decreasing) ++rep.monotone_failures;
    }
    rep.blowup_fraction = sample_count ? static_cast<double>(rep.blowups) / static_cast<double>(sample_count) : 0.0;
    return rep;
}

// ---- classification ----

std::string behavior_name(Behavior b) {
    switch (b) {
        case Behavior::Convergent: return "Convergent";
        case Behavior::Oscillatory: return "Oscillatory";
        case Behavior::BlowUp: return "BlowUp";
        case Behavior::Undetermined: return "Undetermined";
    }
    return "?";
}

std::vector<Equilibrium> equilibria(double A, const Params& p) {
    std::vector<Equilibrium> out;
    // A rho^2 + k rho - k c_b = 0
    if (A == 0.0) {
        if (p.c_b > 0.0) out.push_back({p.c_b, 0.0});
    } else {
        double disc = p.k * p.k + 4.0 * A * p.k * p.c_b;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            // stable form of the two roots
            double q = -0.5 * (p.k + std::copysign(sq, p.k));
            double r1 = q / A;
            double r2 = q != 0.0 ? (-p.k * p.c_b) / q : r1;
            for (double r : {r1, r2})
                if (r > 0.0 && std::isfinite(r)) out.push_back({r, 0.0});
            if (out.size() == 2 && out[0].rho == out[1].rho) out.pop_back();
        }
    }
    double kc = p.k * p.c_b;
    if (kc <= 0.0) {
        double dd = std::sqrt(-2.0 * kc);
        out.push_back({0.0, dd});
        if (dd > 0.0) out.push_back({0.0, -dd});
    }
    return out;
}

BehaviorLabel classify_trajectory(const ClosedState& init, double A, const Params& p, double T,
                                  const IntegratorConfig& cfg, const ClassifierConfig& cc) {
    require_positive_density(init.rho);
    p.validate();
    if (!(T > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": T must be positive");

    std::vector<double> y0{init.rho, init.d};
    static const std::vector<std::string> names{"rho", "d"};
    Trajectory tr = integrate(closed_system(ForcingSignal::constant(A), p), y0, 0.0, T, cfg, {}, names);

    BehaviorLabel out;
    out.status = tr.status;
    out.rho_max = -std::numeric_limits<double>::infinity();
    out.d_max = -std::numeric_limits<double>::infinity();
    const double e0 = first_integral(init, A, p);
    int last_sign = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        double rho = tr.states[i][0], d = tr.states[i][1];
        out.rho_max = std::max(out.rho_max, rho);
        out.d_max = std::max(out.d_max, d);
        int sg = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sg != 0) {
            if (last_sign != 0 && sg != last_sign) ++out.sign_changes;
            last_sign = sg;
        }
        if (rho > 0.0) out.energy_drift = std::max(out.energy_drift, relative_drift(first_integral({rho, d}, A, p), e0));
    }

    if (const auto* bu = std::get_if<BlowUp>(&tr.status)) {
        out.label = Behavior::BlowUp;
        out.t_lower = bu->t_lower;
        return out;
    }
    if (!tr.completed()) return out;

    auto eqs = equilibria(A, p);
    const auto& fin = tr.states.back();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : eqs) {
        double dist = std::hypot(fin[0] - e.rho, fin[1] - e.d);
        if (dist < best) {
            best = dist;
            out.equilibrium = e;
        }
    }
    out.final_distance = best;

    if (out.equilibrium) {
        double t_tail = T * (1.0 - cc.tail_fraction);
        bool stays = true;
        for (std::size_t i = 0; i < tr.times.size() && stays; ++i) {
            if (tr.times[i] < t_tail) continue;
            double dist = std::hypot(tr.states[i][0] - out.equilibrium->rho, tr.states[i][1] - out.equilibrium->d);
            if (!(dist <= cc.delta)) stays = false;
        }
        if (stays) {
            out.label = Behavior::Convergent;
            return out;
        }
    }
    if (out.sign_changes >= cc.min_sign_changes && out.energy_drift < cc.drift_tol) out.label = Behavior::Oscillatory;
    return out;
}

std::vector<double> Axis::values() const {
    if (list) return *list;
    if (!(step > 0.0) || !(hi >= lo)) throw Error(std::string(msg::kInvalidArgument) + ": bad grid axis");
    auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
    return v;
}

std::vector<SweepCell> sweep(const SweepGrid& grid, const std::vector<double>& A_values, const Params& p, double T,
                             const IntegratorConfig& cfg, const ClassifierConfig& cc) {
    auto rhos = grid.rho.values();
    auto ds = grid.d.values();
    for (double r : rhos)
        if (!(r > 0.0)) throw Error(msg::kDensityPositivity);
    std::vector<SweepCell> cells;
    cells.reserve(A_values.size() * rhos.size() * ds.size());
    for (double A : A_values)
        for (double r : rhos)
            for (double d : ds) cells.push_back({r, d, A, {}});
    parallel_for(cells.size(), [&](std::size_t i) {
        cells[i].behavior = classify_trajectory({cells[i].rho0, cells[i].d0}, cells[i].A, p, T, cfg, cc);
    });
    return cells;
}

// ---- conservation ----

ConservationCase conservation_case(std::uint64_t seed, std::uint64_t index) {
    Rng rng(seed, index);
    ConservationCase c;
    c.index = index;
    c.init.rho = rng.uniform(0.1, 5.0);
    c.init.d = rng.uniform(-3.0, 3.0);
    c.A = rng.uniform(-5.0, 2.0);
    c.params.k = rng.coin() ? 1.0 : -1.0;
    c.params.c_b = rng.coin() ? 1.0 : 0.0;
    return c;
}

ConservationRun run_conservation_case(const ConservationCase& c, const IntegratorConfig& cfg) {
    ConservationRun run;
    run.input = c;
    std::vector<double> y0{c.init.rho, c.init.d};
    static const std::vector<std::string> names{"rho", "d"};
    Trajectory tr = integrate(closed_system(ForcingSignal::constant(c.A), c.params), y0, 0.0, c.T, cfg, {}, names);
    run.status = tr.status;
    const double e0 = first_integral(c.init, c.A, c.params);
    run.rho_max = c.init.rho;
    run.d_max = c.init.d;
    for (const auto& y : tr.states) {
        run.rho_max = std::max(run.rho_max, y[0]);
        run.d_max = std::max(run.d_max, y[1]);
        if (y[0] > 0.0) run.drift = std::max(run.drift, relative_drift(first_integral({y[0], y[1]}, c.A, c.params), e0));
    }
    run.d_bound = d_upper_bound_w(c.init.d, run.rho_max, std::max(c.A, 0.0), c.params.k, c.params.c_b);
    return run;
}

ConservationReport verify_conservation(std::size_t count, std::uint64_t seed, const IntegratorConfig& cfg) {
    ConservationReport rep;
    const std::size_t limit = 50 * std::max<std::size_t>(count, 1);
    std::size_t next = 0;
    // batches keep the result independent of the thread count
    while (rep.completed < count && next < limit) {
        std::size_t batch = std::min(limit - next, std::max<std::size_t>(count - rep.completed, 8));
        std::vector<ConservationRun> runs(batch);
        parallel_for(batch, [&](std::size_t i) { runs[i] = run_conservation_case(conservation_case(seed, next + i), cfg); });
        for (auto& r : runs) {
            if (rep.completed == count) break;
            ++rep.attempted;
            if (!std::holds_alternative<Completed>(r.status)) continue;
            ++rep.completed;
            rep.max_drift = std::max(rep.max_drift, r.drift);
            rep.max_bound_excess = std::max(rep.max_bound_excess, r.d_max - r.d_bound);
            rep.runs.push_back(std::move(r));
        }
        next += batch;
    }
    return rep;
}

}  // namespace rct

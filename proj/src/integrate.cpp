#include "rct/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "rct/error.hpp"

namespace rct {

namespace {

// Dormand–Prince 5(4) tableau with Hairer's continuous extension.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMaxShrink = 5.0;   // h_new >= h / 5
constexpr double kMaxGrow = 0.1;     // h_new <= h * 10

constexpr double kEventTol = 1e-10;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Stepper {
    const RhsFn& rhs;
    std::size_t n;
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp, y1, yerr;

    Stepper(const RhsFn& f, std::size_t dim)
        : rhs(f), n(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim),
          ytmp(dim), y1(dim), yerr(dim) {}

    // One trial step from (t, y) with k1 = f(t, y) already set.
    // Returns false if any stage produced a non-finite value.
    bool step(double t, std::span<const double> y, double h) {
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        rhs(t + h, y1, k7);
        for (std::size_t i = 0; i < n; ++i)
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        return all_finite(k2) && all_finite(k3) && all_finite(k4) && all_finite(k5) &&
               all_finite(k6) && all_finite(k7) && all_finite(y1);
    }

    double error_norm(std::span<const double> y, const IntegratorConfig& cfg) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sk = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            double r = yerr[i] / sk;
            sum += r * r;
        }
        return std::sqrt(sum / static_cast<double>(n));
    }

    std::vector<double> dense_coefficients(std::span<const double> y, double h) const {
        std::vector<double> r(5 * n);
        for (std::size_t i = 0; i < n; ++i) {
            double dy = y1[i] - y[i];
            double bspl = h * k1[i] - dy;
            r[i] = y[i];
            r[n + i] = dy;
            r[2 * n + i] = bspl;
            r[3 * n + i] = dy - h * k7[i] - bspl;
            r[4 * n + i] =
                h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        return r;
    }
};

double interpolate(std::span<const double> r, std::size_t n, std::size_t i, double theta) {
    double theta1 = 1.0 - theta;
    return r[i] + theta * (r[n + i] + theta1 * (r[2 * n + i] + theta * (r[3 * n + i] + theta1 * r[4 * n + i])));
}

void interpolate_all(std::span<const double> r, std::size_t n, double theta, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = interpolate(r, n, i, theta);
}

double initial_step(const RhsFn& rhs, double t0, std::span<const double> y0, std::span<const double> f0,
                    double span, const IntegratorConfig& cfg) {
    const std::size_t n = y0.size();
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.atol + cfg.rtol * std::abs(y0[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    dnf /= static_cast<double>(n);
    dny /= static_cast<double>(n);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, cfg.max_step, span});

    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h * f0[i];
    rhs(t0 + h, y1, f1);
    if (!all_finite(f1)) return std::max(cfg.min_step, h * 1e-3);

    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.atol + cfg.rtol * std::abs(y0[i]);
        double r = (f1[i] - f0[i]) / sk;
        der2 += r * r;
    }
    der2 = std::sqrt(der2 / static_cast<double>(n)) / h;
    double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::max(cfg.min_step, std::min({100.0 * h, h1, cfg.max_step, span}));
}

std::string component_name(std::span<const std::string> names, std::size_t i) {
    if (i < names.size()) return names[i];
    return "y" + std::to_string(i);
}

// Locates the root of g on a single step's continuous extension by bisection.
double locate_event(const EventFn& ev, std::span<const double> r, std::size_t n, double ta, double tb,
                    double ga, double gb) {
    if (gb == 0.0) return tb;
    std::vector<double> y(n);
    const double t0 = ta, h = tb - ta;
    double lo = ta, hi = tb, glo = ga;
    for (int iter = 0; iter < 200 && hi - lo > kEventTol; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        interpolate_all(r, n, (mid - t0) / h, y);
        double gm = ev.g(mid, y);
        if (gm == 0.0) return mid;
        if ((glo < 0.0) == (gm < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool crosses(double ga, double gb) {
    return (ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0) || (gb == 0.0 && ga != 0.0);
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw Error(std::string(msg::kInvalidArgument) + ": tolerances must be positive");
    if (!(min_step > 0.0) || !(min_step < max_step))
        throw Error(std::string(msg::kInvalidArgument) + ": require 0 < min_step < max_step");
    if (!(blowup_magnitude > 1.0)) throw Error(std::string(msg::kInvalidArgument) + ": blowup_magnitude must exceed 1");
    if (max_steps == 0) throw Error(std::string(msg::kInvalidArgument) + ": max_steps must be positive");
}

std::string status_name(const TrajectoryStatus& status) {
    if (std::holds_alternative<Completed>(status)) return "Completed";
    if (std::holds_alternative<BlowUp>(status)) return "BlowUp";
    return "EventStopped";
}

Trajectory integrate(const RhsFn& rhs, std::span<const double> initial, double t0, double t1,
                     const IntegratorConfig& cfg, std::span<const EventFn> events,
                     std::span<const std::string> names) {
    cfg.validate();
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
        throw Error(std::string(msg::kInvalidArgument) + ": empty time span");
    if (initial.empty() || !all_finite(initial))
        throw Error(std::string(msg::kInvalidArgument) + ": initial state must be finite and nonempty");

    const std::size_t n = initial.size();
    Trajectory tr;
    tr.times.push_back(t0);
    tr.states.emplace_back(initial.begin(), initial.end());

    auto magnitude_check = [&](std::span<const double> y) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(y[i]) > cfg.blowup_magnitude) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };

    if (auto c = magnitude_check(initial); c >= 0) {
        tr.status = BlowUp{t0, component_name(names, static_cast<std::size_t>(c)), "magnitude"};
        return tr;
    }

    Stepper st(rhs, n);
    rhs(t0, initial, st.k1);
    if (!all_finite(st.k1)) {
        tr.status = BlowUp{t0, "", "non-finite rhs"};
        return tr;
    }

    std::vector<double> y(initial.begin(), initial.end());
    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t0, y);

    double t = t0;
    double h = initial_step(rhs, t0, y, st.k1, t1 - t0, cfg);
    double facold = 1e-4;
    bool rejected_last = false;

    for (;;) {
        if (tr.step_stats.accepted >= cfg.max_steps) {
            tr.status = EventStopped{kMaxStepsEvent, t, "max_steps exceeded"};
            return tr;
        }
        h = std::min(h, cfg.max_step);
        bool last = false;
        if (t + 1.01 * h >= t1) {
            h = t1 - t;
            last = true;
        }

        if (!st.step(t, y, h)) {
            ++tr.step_stats.rejected;
            h *= 0.25;
            rejected_last = true;
            if (h < cfg.min_step) {
                tr.status = BlowUp{t, "", "non-finite rhs"};
                return tr;
            }
            continue;
        }

        double err = st.error_norm(y, cfg);
        double fac11 = std::pow(err, kExpo);

        if (!(err <= 1.0)) {
            ++tr.step_stats.rejected;
            double shrink = std::min(kMaxShrink, fac11 / kSafety);
            h /= std::isfinite(shrink) ? shrink : kMaxShrink;
            rejected_last = true;
            if (h < cfg.min_step) {
                tr.status = BlowUp{t, "", "step size collapse"};
                return tr;
            }
            continue;
        }

        // Accepted.
        ++tr.step_stats.accepted;
        facold = std::max(err, 1e-4);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(kMaxGrow, std::min(kMaxShrink, fac / kSafety));
        double h_next = h / fac;
        if (rejected_last) h_next = std::min(h_next, h);
        rejected_last = false;

        double t_new = last ? t1 : t + h;
        auto dense = st.dense_coefficients(y, h);

        // Event location on this step.
        if (!events.empty()) {
            std::vector<std::tuple<double, int>> hits;
            std::vector<double> g_new(events.size());
            for (std::size_t e = 0; e < events.size(); ++e) {
                g_new[e] = events[e].g(t_new, st.y1);
                if (crosses(g_prev[e], g_new[e])) {
                    double te = locate_event(events[e], dense, n, t, t_new, g_prev[e], g_new[e]);
                    hits.emplace_back(te, static_cast<int>(e));
                }
            }
            std::sort(hits.begin(), hits.end());
            const std::tuple<double, int>* terminal = nullptr;
            for (const auto& hit : hits) {
                if (events[static_cast<std::size_t>(std::get<1>(hit))].terminal) {
                    terminal = &hit;
                    break;
                }
            }
            std::vector<double> ye(n);
            for (const auto& hit : hits) {
                if (terminal && std::get<0>(hit) > std::get<0>(*terminal)) break;
                double te = std::get<0>(hit);
                interpolate_all(dense, n, (te - t) / h, ye);
                tr.events.push_back(EventHit{std::get<1>(hit), te, ye});
                if (terminal && &hit == terminal) break;
            }
            if (terminal) {
                double te = std::get<0>(*terminal);
                if (te > t) {
                    // Redo the step so the final node and its extension are exact RK output.
                    double he = te - t;
                    st.step(t, y, he);
                    tr.times.push_back(te);
                    tr.states.push_back(st.y1);
                    tr.dense.push_back(st.dense_coefficients(y, he));
                }
                tr.status = EventStopped{std::get<1>(*terminal), te, events[static_cast<std::size_t>(std::get<1>(*terminal))].name};
                return tr;
            }
            g_prev = std::move(g_new);
        }

        tr.times.push_back(t_new);
        tr.states.push_back(st.y1);
        tr.dense.push_back(std::move(dense));
        t = t_new;
        y = st.y1;
        st.k1 = st.k7;

        if (auto c = magnitude_check(y); c >= 0) {
            tr.status = BlowUp{t, component_name(names, static_cast<std::size_t>(c)), "magnitude"};
            return tr;
        }
        if (!all_finite(st.k1)) {
            tr.status = BlowUp{t, "", "non-finite rhs"};
            return tr;
        }
        if (last) {
            tr.status = Completed{};
            return tr;
        }
        h = h_next;
    }
}

Trajectory integrate_segmented(const RhsFn& rhs, std::span<const double> initial, double t0, double t1,
                               std::span<const double> breakpoints, const IntegratorConfig& cfg,
                               std::span<const EventFn> events, std::span<const std::string> names) {
    std::vector<double> cuts;
    for (double b : breakpoints)
        if (b > t0 && b < t1) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(t1);

    Trajectory out;
    std::vector<double> y(initial.begin(), initial.end());
    double a = t0;
    IntegratorConfig seg_cfg = cfg;
    for (double b : cuts) {
        // Right-continuous inputs: stages at the segment end must see the left limit.
        const double b_left = std::nextafter(b, a);
        RhsFn left_rhs = [&rhs, b_left](double t, std::span<const double> yy, std::span<double> dy) {
            rhs(std::min(t, b_left), yy, dy);
        };
        Trajectory piece = integrate(b == t1 ? rhs : left_rhs, y, a, b, seg_cfg, events, names);
        if (out.times.empty()) {
            out = std::move(piece);
        } else {
            out.times.insert(out.times.end(), piece.times.begin() + 1, piece.times.end());
            out.states.insert(out.states.end(), piece.states.begin() + 1, piece.states.end());
            out.dense.insert(out.dense.end(), piece.dense.begin(), piece.dense.end());
            out.events.insert(out.events.end(), piece.events.begin(), piece.events.end());
            out.step_stats.accepted += piece.step_stats.accepted;
            out.step_stats.rejected += piece.step_stats.rejected;
            out.status = piece.status;
        }
        if (!out.completed()) return out;
        if (out.step_stats.accepted >= cfg.max_steps) {
            out.status = EventStopped{kMaxStepsEvent, out.t_end(), "max_steps exceeded"};
            return out;
        }
        seg_cfg.max_steps = cfg.max_steps - out.step_stats.accepted;
        y = out.final_state();
        a = b;
    }
    return out;
}

std::vector<double> dense_eval(const Trajectory& traj, double t) {
    if (traj.times.empty() || !(t >= traj.t_begin() && t <= traj.t_end())) throw Error(msg::kOutOfRange);
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    auto idx = static_cast<std::size_t>(it - traj.times.begin());
    if (it != traj.times.end() && *it == t) return traj.states[idx];
    std::size_t step = idx - 1;
    const std::size_t n = traj.dim();
    double h = traj.times[step + 1] - traj.times[step];
    std::vector<double> out(n);
    interpolate_all(traj.dense[step], n, (t - traj.times[step]) / h, out);
    return out;
}

double dense_eval(const Trajectory& traj, double t, std::size_t component) {
    if (traj.times.empty() || !(t >= traj.t_begin() && t <= traj.t_end())) throw Error(msg::kOutOfRange);
    if (component >= traj.dim()) throw Error(std::string(msg::kInvalidArgument) + ": component index");
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    auto idx = static_cast<std::size_t>(it - traj.times.begin());
    if (it != traj.times.end() && *it == t) return traj.states[idx][component];
    std::size_t step = idx - 1;
    double h = traj.times[step + 1] - traj.times[step];
    return interpolate(traj.dense[step], traj.dim(), component, (t - traj.times[step]) / h);
}

}  // namespace rct

#include <chrono>
#include <cmath>

#include "doctest.h"
#include "rct/comparison.hpp"
#include "rct/error.hpp"

using namespace rct;

namespace {

Params kc(double k, double c_b) {
    Params p;
    p.k = k;
    p.c_b = c_b;
    return p;
}

Params with_s(double k, double s) {
    Params p = kc(k, 0.0);
    p.s = s;
    return p;
}

}  // namespace

TEST_CASE("coupled_compare keeps the ordering under the envelope floor") {
    IntegratorConfig cfg;
    for (double k : {1.0, -1.0}) {
        for (double s : {1.0, 2.0}) {
            Params p = with_s(k, s);
            ForcingSignal floor_signal(forcing::PolyFloor{1.0, 1.0, s});
            auto rep = coupled_compare({1.0, 5.0}, 1.5, 4.5, floor_signal, p, 10.0, cfg);
            CHECK(rep.ordered());
            CHECK(rep.min_d_minus_b > -kOrderingTolerance);
            CHECK(rep.min_a_minus_rho > -kOrderingTolerance);
            CHECK(rep.joint.dim() == 4);
        }
    }
}

TEST_CASE("coupled_compare at the upper cap") {
    IntegratorConfig cfg;
    double w = a_cap(1.0, 1.0);
    CHECK(w == 0.5);
    for (double k : {1.0, -1.0}) {
        ForcingSignal at_cap(forcing::Constant{w}, w);
        auto rep = coupled_compare({1.0, 5.0}, 1.5, 4.5, at_cap, kc(k, 0.0), 10.0, cfg);
        CHECK(rep.ordered());
    }
}

TEST_CASE("coupled_compare errors") {
    IntegratorConfig cfg;
    auto A = ForcingSignal::constant(0.0);
    CHECK_THROWS_WITH_AS(coupled_compare({1.0, 5.0}, 1.5, 5.0, A, Params{}, 1.0, cfg), "ordering precondition failed",
                         Error);
    CHECK_THROWS_WITH_AS(coupled_compare({1.0, 5.0}, 1.0, 4.0, A, Params{}, 1.0, cfg), "ordering precondition failed",
                         Error);
    CHECK_THROWS_WITH_AS(coupled_compare({1.0, 5.0}, 1.5, 4.0, ForcingSignal::constant(-5.0), Params{}, 1.0, cfg),
                         "envelope violated", Error);
    ForcingSignal over(forcing::Constant{1.0}, 0.5);
    // clamped to the cap, so still inside
    CHECK_NOTHROW(coupled_compare({1.0, 5.0}, 1.5, 4.0, over, Params{}, 1.0, cfg));
}

TEST_CASE("property: ordering holds over randomized scenarios") {
    IntegratorConfig cfg;
    auto rep = verify_comparison(1000, 7, cfg);
    CHECK(rep.scenarios == 1000);
    CHECK(rep.failures.empty());
    CHECK(rep.min_d_minus_b > -kOrderingTolerance);
    CHECK(rep.min_a_minus_rho > -kOrderingTolerance);

    auto again = verify_comparison_indices({3, 17, 999}, 7, cfg);
    CHECK(again.scenarios == 3);
    CHECK(again.failures.empty());

    Rng rng(1);
    Params p = with_s(1.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        auto sig = random_envelope_signal(rng, p, 0.7, 10.0);
        CHECK(envelope_respecting(sig, p, 10.0));
    }
}

TEST_CASE("d_upper_bound worked values") {
    // k = -1, rho_M = 1, w = 1/2
    CHECK(d_upper_bound(0.3, 1.0, 1.0, 1.0, -1.0) == doctest::Approx(0.3));
    CHECK(d_upper_bound(-2.0, 1.0, 1.0, 1.0, -1.0) == 0.0);
    CHECK(d_upper_bound(0.0, 2.0, 0.0, 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(d_upper_bound(1e6, 3.0, 2.0, 1.0, 1.0) == 1e6);
    // background term
    CHECK(d_upper_bound_w(0.0, 0.5, 0.0, -1.0, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(d_upper_bound(0.0, 0.0, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("property: divergence stays under the bound") {
    IntegratorConfig cfg;
    Rng rng(99);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        Params p = kc(rng.coin() ? 1.0 : -1.0, rng.coin() ? 1.0 : 0.0);
        double A = rng.uniform(-2.0, 1.0);
        ClosedState init{rng.uniform_open_closed(0.0, 4.0), rng.uniform(-3.0, 3.0)};
        auto lab = classify_trajectory(init, A, p, 10.0, cfg);
        double bound = d_upper_bound_w(init.d, lab.rho_max, std::max(A, 0.0), p.k, p.c_b);
        CHECK(lab.d_max <= bound + 1e-6);
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("exp regions") {
    CHECK(classify_exp_region(1.0, -0.5) == RegionLabel::OmegaB);
    CHECK(classify_exp_region(1.0, 0.0) == RegionLabel::OmegaM);
    CHECK(classify_exp_region(1.0, 0.5) == RegionLabel::OmegaT);
    CHECK(classify_exp_region(1.0, 0.4999) == RegionLabel::OmegaM);
    CHECK(region_name(RegionLabel::OmegaT) == "Omega_T");
    CHECK_THROWS_WITH_AS(classify_exp_region(0.0, 1.0), "outside domain", Error);
    CHECK_THROWS_WITH_AS(classify_exp_region(-1.0, 1.0), "outside domain", Error);
}

TEST_CASE("blow-up certificate closed forms") {
    auto c1 = blowup_certificate(1.0, -1.0);
    CHECK(c1.t_bound == doctest::Approx(2.0));
    CHECK(c1.b_upper(0.0) == doctest::Approx(-1.0));
    CHECK(c1.b_upper(1.0) == doctest::Approx(-2.0));
    CHECK(blowup_certificate(1.0, -2.0).t_bound == doctest::Approx(1.0));

    // b0 = 0: bound -(e^t - 1), restart minimizes tau + 2/(e^tau - 1) at e^tau = 2 + sqrt 3
    auto c0 = blowup_certificate(1.0, 0.0);
    double expect = std::log(2.0 + std::sqrt(3.0)) + 2.0 / (1.0 + std::sqrt(3.0));
    CHECK(c0.t_bound == doctest::Approx(expect).epsilon(1e-9));
    CHECK(c0.stages.size() == 2);

    auto ct = blowup_certificate(1.0, 2.0);
    CHECK(std::isfinite(ct.t_bound));
    CHECK(ct.stages.front().region == RegionLabel::OmegaT);
    CHECK(ct.b_upper(0.0) == doctest::Approx(2.0));

    CHECK_THROWS_AS(blowup_certificate(0.0, 1.0), Error);
}

TEST_CASE("property: every sampled start blows up within its certificate") {
    IntegratorConfig cfg;
    auto rep = verify_exp_blowup(500, 3, cfg);
    CHECK(rep.samples == 500);
    CHECK(rep.blowup_fraction == 1.0);
    CHECK(rep.max_negative_b0_excess <= 1e-6);
    CHECK(rep.max_curve_excess <= 1e-6);
    CHECK(rep.bound_exceeded == 0);
    CHECK(rep.region_failures == 0);
    CHECK(rep.monotone_failures == 0);

    auto one = run_exp_blowup(1.0, -1.0, cfg);
    REQUIRE(std::holds_alternative<BlowUp>(one.status));
    CHECK(std::get<BlowUp>(one.status).t_lower <= 2.0 + 1e-3);
}

TEST_CASE("equilibria") {
    auto e = equilibria(-1.0, kc(1.0, 0.0));
    REQUIRE(e.size() == 2);
    CHECK(e[0].rho == doctest::Approx(1.0));
    CHECK(e[1].rho == 0.0);
    CHECK(e[1].d == 0.0);

    auto top = equilibria(0.0, kc(-1.0, 1.0));
    REQUIRE(top.size() == 3);
    CHECK(top[0].rho == doctest::Approx(1.0));
    CHECK(top[1].d == doctest::Approx(std::sqrt(2.0)));

    // 0.1 rho^2 - rho + 1 = 0
    auto two = equilibria(0.1, kc(-1.0, 1.0));
    CHECK(two.size() == 4);
    for (const auto& q : two)
        if (q.rho > 0.0) CHECK(std::abs(0.1 * q.rho * q.rho - (q.rho - 1.0)) < 1e-12);
}

TEST_CASE("classify_trajectory worked examples") {
    IntegratorConfig cfg;
    Params bottom = kc(1.0, 0.0);
    auto fixed = classify_trajectory({1.0, 0.0}, -1.0, bottom, 20.0, cfg);
    CHECK(fixed.label == Behavior::Convergent);
    CHECK(fixed.final_distance < 1e-12);

    auto blow = classify_trajectory({5.0, -3.0}, -1.0, bottom, 20.0, cfg);
    CHECK(blow.label == Behavior::BlowUp);
    REQUIRE(blow.t_lower.has_value());
    CHECK(std::holds_alternative<BlowUp>(blow.status));

    // saddle at rho = 1; from the left of it the orbit falls into the origin without turning
    auto left = classify_trajectory({0.5, 0.0}, -1.0, bottom, 20.0, cfg);
    CHECK(left.label != Behavior::BlowUp);
    CHECK(left.sign_changes <= 1);

    // attractive force with A > 0: a center at rho = 1/A
    auto osc = classify_trajectory({0.5, 0.0}, 1.0, kc(-1.0, 0.0), 20.0, cfg);
    CHECK(osc.label == Behavior::Oscillatory);
    CHECK(osc.sign_changes >= 3);
    CHECK(osc.energy_drift < 1e-4);

    // background density pulls rho to zero with d -> sqrt 2
    auto conv = classify_trajectory({0.5, 1.0}, 0.0, kc(-1.0, 1.0), 20.0, cfg);
    CHECK(conv.label == Behavior::Convergent);
    REQUIRE(conv.equilibrium.has_value());
    CHECK(conv.equilibrium->d == doctest::Approx(std::sqrt(2.0)));

    CHECK_THROWS_WITH_AS(classify_trajectory({0.0, 0.0}, 0.0, bottom, 1.0, cfg), "density positivity violated",
                         Error);
}

TEST_CASE("classifier labels are stable under halved tolerances") {
    IntegratorConfig cfg, fine;
    fine.rtol = cfg.rtol / 2;
    fine.atol = cfg.atol / 2;
    struct Case {
        ClosedState init;
        double A;
        Params p;
    };
    std::vector<Case> cases{{{1.0, 0.0}, -1.0, kc(1.0, 0.0)},
                            {{5.0, -3.0}, -1.0, kc(1.0, 0.0)},
                            {{0.5, 0.0}, -1.0, kc(1.0, 0.0)},
                            {{0.5, 0.0}, 1.0, kc(-1.0, 0.0)},
                            {{0.5, 1.0}, 0.0, kc(-1.0, 1.0)}};
    for (const auto& c : cases)
        CHECK(classify_trajectory(c.init, c.A, c.p, 20.0, cfg).label ==
              classify_trajectory(c.init, c.A, c.p, 20.0, fine).label);
}

TEST_CASE("sweep") {
    IntegratorConfig cfg;
    SweepGrid grid;
    CHECK(grid.rho.values().size() == 10);
    CHECK(grid.d.values().size() == 13);
    CHECK(sweep(grid, {}, Params{}, 20.0, cfg).empty());

    auto cells = sweep(grid, {0.0}, kc(-1.0, 1.0), 20.0, cfg);
    CHECK(cells.size() == 130);
    bool convergent = false;
    for (const auto& c : cells) convergent |= c.behavior.label == Behavior::Convergent;
    CHECK(convergent);

    auto again = sweep(grid, {0.0}, kc(-1.0, 1.0), 20.0, cfg);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i].behavior.label == again[i].behavior.label);

    SweepGrid bad;
    bad.rho.lo = 0.0;
    CHECK_THROWS_AS(sweep(bad, {0.0}, Params{}, 1.0, cfg), Error);
}

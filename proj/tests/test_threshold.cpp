#include <cmath>
#include <limits>

#include "doctest.h"
#include "rct/error.hpp"
#include "rct/rng.hpp"
#include "rct/threshold.hpp"

using namespace rct;

namespace {

SurfaceParams worked() { return SurfaceParams{}; }

SurfaceParams small_region() {
    SurfaceParams sp;
    sp.m1 = 2.0;
    sp.m2 = 2.0;
    sp.M = 1.0;
    sp.n1 = 2.0;
    sp.n2 = 1.0;
    return sp;
}

// root of 21 x^2 - 1756 x - 9877, i.e. (x+1)^2 (x+10)^2 D(x) = 0 for the default surface
double quadratic_root() { return (1756.0 + std::sqrt(1756.0 * 1756.0 + 4.0 * 21.0 * 9877.0)) / 42.0; }

}  // namespace

TEST_CASE("surface functions, worked values") {
    SurfaceParams sp;
    sp.m1 = 2.0;
    sp.m2 = 3.0;
    sp.n1 = 1.0;
    sp.n2 = 2.0;
    CHECK(m_of(0.0, sp) == doctest::Approx(6.0));
    CHECK(dm_of(0.0, sp) == doctest::Approx(2.0));
    CHECK(n_of(0.0, sp) == doctest::Approx(0.5));
    CHECK(dn_of(0.0, sp) == doctest::Approx(-0.25));
    CHECK(m_of(5.0, worked()) == doctest::Approx(150.0));

    // F at a = 1, b = 110, B = 1 for the default surface: 110 - 100 - 1
    CHECK(surface_F(1.0, 110.0, 1.0, worked()) == doctest::Approx(9.0));
    CHECK(surface_F(0.0, 100.0, 1.0, worked()) == doctest::Approx(99.0));
}

TEST_CASE("discriminant of the default surface at zero") {
    auto d = discriminant(0.0, worked());
    CHECK(d.leading == doctest::Approx(4999.0));
    CHECK(d.constant == doctest::Approx(0.5));
    CHECK(d.D == doctest::Approx(-9877.0));
    CHECK(transversality_margin(0.0, 0.0, worked()) == doctest::Approx(0.5));
    CHECK(transversality_margin(1.0, 0.0, worked()) == doctest::Approx(4988.5));
}

TEST_CASE("certified horizon matches the closed-form root") {
    auto rep = certified_horizon(worked(), 200.0);
    REQUIRE(std::holds_alternative<verdict::HorizonCertified>(rep.verdict));
    CHECK(rep.sign_change_found);
    CHECK(rep.certified_T() == doctest::Approx(quadratic_root()).epsilon(1e-7));
    CHECK(std::abs(rep.certified_T() - 88.9091) < 1e-4);
    CHECK(!rep.asymptotically_favorable);
    CHECK(!rep.leading_ok_until.has_value());
    CHECK(rep.disc_negative_until <= rep.x_max);

    auto short_scan = certified_horizon(worked(), 50.0);
    REQUIRE(std::holds_alternative<verdict::HorizonCertified>(short_scan.verdict));
    CHECK(short_scan.certified_T() == 50.0);
    CHECK(!short_scan.sign_change_found);
    CHECK(short_scan.samples.front().x == 0.0);
    CHECK(short_scan.samples.back().x == 50.0);
}

TEST_CASE("infeasible and global verdicts") {
    auto sp = worked();
    sp.n1 = 2.0;  // constant term vanishes at zero
    auto rep = certified_horizon(sp, 100.0);
    CHECK(std::holds_alternative<verdict::InfeasibleAtZero>(rep.verdict));
    CHECK(rep.certified_T() == 0.0);
    CHECK(verdict_name(rep.verdict) == "InfeasibleAtZero");

    // N = 1/2: the constant term dominates and D -> -inf
    SurfaceParams g;
    g.m1 = 10;
    g.m2 = 10;
    g.M = 1;
    g.n1 = 1;
    g.n2 = 1;
    g.N = 0.5;
    auto d0 = discriminant(0.0, g);
    if (d0.D < 0.0) {
        auto grep = certified_horizon(g, 200.0);
        CHECK(grep.asymptotically_favorable);
    }
}

TEST_CASE("leading coefficient can fail before the discriminant check") {
    SurfaceParams sp = worked();
    sp.s = 3.0;  // (x+1)^3 overtakes 50 (x+10)^2
    auto rep = certified_horizon(sp, 200.0);
    REQUIRE(rep.leading_ok_until.has_value());
    CHECK(*rep.leading_ok_until < 200.0);
    CHECK(rep.disc_negative_until <= *rep.leading_ok_until + 1e-9);
    // the leading coefficient is positive just left of the reported point
    CHECK(discriminant(*rep.leading_ok_until, sp).leading > 0.0);
    CHECK(discriminant(*rep.leading_ok_until + 2e-6, sp).leading <= 0.0);
}

TEST_CASE("parameter rules") {
    auto r1 = paper_params(1.0);
    CHECK(r1.params.M == 1.0);
    CHECK(r1.params.m1 == 2.0);
    CHECK(r1.params.m2 == 2.0);
    CHECK(r1.params.n2 == 1.0);
    CHECK(r1.n1_bound == doctest::Approx(2.75));
    CHECK(r1.params.n1 == doctest::Approx(3.75));
    CHECK(r1.all_rules_hold);
    // the rules force n1 > 2, so the constant term at zero is negative
    CHECK(std::holds_alternative<verdict::InfeasibleAtZero>(r1.feasibility.verdict));

    CHECK(paper_params(2.0).params.M == 1.0);
    CHECK(paper_params(4.0).params.M == 2.0);

    PaperRuleOverrides ov;
    ov.n1 = 1.0;
    auto r2 = paper_params(1.0, ov);
    CHECK(!r2.all_rules_hold);

    ov = {};
    ov.m1 = 1.0;
    CHECK_THROWS_AS(paper_params(1.0, ov), Error);
    CHECK_THROWS_AS(paper_params(0.5), Error);
}

TEST_CASE("region membership") {
    auto sp = small_region();
    auto in = omega_region_membership(1.0, 7.0, sp);
    CHECK(in.inside);
    CHECK(in.failed.empty());
    CHECK(in.slope == doctest::Approx(4.0));
    CHECK(in.n_star == doctest::Approx(2.0));
    auto out = omega_region_membership(1.0, 6.0, sp);
    CHECK(!out.inside);
    CHECK(!out.failed.empty());
    CHECK(!omega_region_membership(1.0, -1.0, sp).inside);

    auto aux = omega_region_membership(1.0, 5.5, sp, RegionMode::Aux);
    CHECK(aux.intercept == doctest::Approx(2.0));
    CHECK(!aux.inside);
    CHECK(omega_region_membership(1.0, 6.5, sp, RegionMode::Aux).inside);

    CHECK_THROWS_WITH_AS(omega_region_membership(-1.0, 7.0, sp), "density positivity violated", Error);
}

TEST_CASE("property: points on the surface have F = 0") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        SurfaceParams sp;
        sp.m1 = rng.uniform(1.5, 20.0);
        sp.m2 = rng.uniform(0.5, 20.0);
        sp.M = rng.uniform(1.0, 3.0);
        sp.n1 = rng.uniform(0.1, 5.0);
        sp.n2 = rng.uniform(0.1, 5.0);
        double a = rng.uniform(0.0, 10.0), x = rng.uniform(0.0, 10.0);
        double b = m_of(x, sp) * a + n_of(x, sp);
        CHECK(std::abs(surface_F(a, b, x + 1.0, sp)) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("property: certified region keeps Q positive for all a >= 0") {
    auto sp = worked();
    auto rep = certified_horizon(sp, 200.0);
    double T = rep.certified_T();
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        double x = rng.uniform(0.0, T);
        double a = rng.uniform(0.0, 100.0);
        CHECK(transversality_margin(a, x, sp) > 0.0);
    }
}

// with N = 1 the constant term is (n1 - n1^2/2)/(x+n2)^2, largest at n1 = 1
TEST_CASE("property: horizon grows with the constant term") {
    double prev = 0.0;
    for (double n1 : {1.9, 1.75, 1.5, 1.25, 1.0}) {
        auto sp = worked();
        sp.n1 = n1;
        double T = certified_horizon(sp, 400.0).certified_T();
        CHECK(T >= prev - 1e-6);
        prev = T;
    }
}

TEST_CASE("invariance of the region above the surface") {
    IntegratorConfig cfg;
    auto rep = verify_invariance(worked(), 500, 80.0, 2024, cfg);
    CHECK(rep.samples == 500);
    CHECK(rep.integrated + rep.rejected == 500);
    CHECK(rep.integrated > 0);
    CHECK(rep.violations.empty());
    CHECK(rep.min_F > -1e-9);

    auto again = verify_invariance(worked(), 20, 80.0, 2024, cfg);
    auto first = verify_invariance(worked(), 20, 80.0, 2024, cfg);
    CHECK(again.min_F == first.min_F);

    CHECK_THROWS_WITH_AS(verify_invariance(worked(), 10, 100.0, 1, cfg), "horizon not certified", Error);

    // a start below the surface is rejected, not integrated
    auto explicit_rep = verify_invariance_from(worked(), {{1.0, 50.0}, {1.0, 110.0}}, 10.0, cfg);
    CHECK(explicit_rep.rejected == 1);
    CHECK(explicit_rep.integrated == 1);
}

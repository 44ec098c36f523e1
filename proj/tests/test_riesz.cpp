#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rct/error.hpp"
#include "rct/riesz.hpp"
#include "rct/rng.hpp"

using namespace rct;

namespace {

constexpr double kPi = std::numbers::pi;

DensityField single(Vec2 c, double m, double s) { return DensityField{{{c, m, s}}, 0.0}; }

DensityField pair() { return DensityField{{{{0.0, 0.0}, 1.0, 0.4}, {{1.5, -0.5}, 2.0, 0.6}}, 0.0}; }

// f1 of one bump via I_2: the angular integral of cos 2t exp(z cos(t - psi)) is 2 pi I_2(z) cos 2 psi.
double bessel_f1(const GaussianBump& b, Vec2 x, double k) {
    double dx = x[0] - b.center[0], dy = x[1] - b.center[1];
    double D = std::hypot(dx, dy), psi = std::atan2(dy, dx);
    double amp = b.mass / (2.0 * kPi * b.sigma * b.sigma), s2 = b.sigma * b.sigma;
    auto f = [&](double r) {
        if (r == 0.0) return 0.0;
        double z = r * D / s2;
        return amp * std::exp(-(r * r + D * D) / (2.0 * s2)) * 2.0 * kPi * std::cyl_bessel_i(2.0, z) / r;
    };
    // composite Simpson
    double R = D + 12.0 * b.sigma;
    int n = 200000;
    double h = R / n, sum = f(0.0) + f(R);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    double c = sum * h / 3.0 * std::cos(2.0 * psi);
    return k / kPi * -c;
}

}  // namespace

TEST_CASE("kernels") {
    CHECK(kernel_f1({1.0, 0.0}) == -1.0);
    CHECK(kernel_f1({2.0, 2.0}) == 0.0);
    CHECK(kernel_f1({-3.0, 3.0}) == 0.0);
    CHECK(kernel_f2({1.0, 1.0}) == -0.5);
    CHECK(kernel_f2({1.0, 0.0}) == 0.0);
    CHECK_THROWS_WITH_AS(kernel_f1({0.0, 0.0}), "kernel singularity", Error);
    CHECK_THROWS_WITH_AS(kernel_f2({0.0, 0.0}), "kernel singularity", Error);
}

TEST_CASE("property: kernels average to zero on circles") {
    Rng rng(4);
    const int n = 256;
    for (int i = 0; i < 1000; ++i) {
        double r = std::exp(rng.uniform(-5.0, 5.0));
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < n; ++j) {
            double th = 2.0 * kPi * j / n;
            s1 += kernel_f1({r * std::cos(th), r * std::sin(th)});
            s2 += kernel_f2({r * std::cos(th), r * std::sin(th)});
        }
        // relative to the kernel size 1/r^2
        CHECK(std::abs(s1 / n) * r * r < 1e-12);
        CHECK(std::abs(s2 / n) * r * r < 1e-12);
    }
}

TEST_CASE("centered bump gives zero") {
    auto d = single({0.3, -0.2}, 1.0, 0.5);
    CHECK(std::abs(riesz_pv(d, {0.3, -0.2}, RieszWhich::F1, 1.0)) < 1e-8);
    CHECK(std::abs(riesz_pv(d, {0.3, -0.2}, RieszWhich::F2, 1.0)) < 1e-8);
}

TEST_CASE("far field of a narrow bump") {
    double sigma = 0.05, m = 2.0;
    auto d = single({0.0, 0.0}, m, sigma);
    for (double k : {1.0, -1.0}) {
        for (double r : {10 * sigma, 20 * sigma, 40 * sigma}) {
            double expect = -k * m / (kPi * r * r);
            double f1 = riesz_pv(d, {r, 0.0}, RieszWhich::F1, k);
            CHECK(std::abs(f1 - expect) <= 0.01 * std::abs(expect));
            CHECK(std::abs(riesz_pv(d, {r, 0.0}, RieszWhich::F2, k)) <= 1e-3 * std::abs(expect));
        }
    }
}

TEST_CASE("Bessel reference for one bump") {
    GaussianBump b{{0.2, -0.1}, 1.5, 0.3};
    DensityField d{{b}, 0.0};
    for (Vec2 x : {Vec2{1.2, 0.4}, Vec2{-0.5, 0.3}, Vec2{0.2, 0.6}}) {
        double ref = bessel_f1(b, x, 1.0);
        double got = riesz_pv(d, x, RieszWhich::F1, 1.0);
        CHECK(std::abs(got - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("self-convergence against four times the nodes") {
    auto d = pair();
    Vec2 x{0.7, 0.2};
    QuadratureConfig q;
    auto base = riesz_pv_estimate(d, x, RieszWhich::F1, 1.0, q);
    QuadratureConfig hi;
    hi.n_theta = 4 * q.n_theta;
    hi.panels = 4 * static_cast<int>(std::ceil((std::hypot(1.5 - 0.7, -0.5 - 0.2) + 8 * 0.6) / 0.2));
    double ref = riesz_pv(d, x, RieszWhich::F1, 1.0, hi);
    CHECK(std::abs(base.value - ref) <= 1e-6 * std::abs(ref));
    CHECK(base.tail_bound < 1e-10);

    double f2 = riesz_pv(d, x, RieszWhich::F2, 1.0);
    double f2_ref = riesz_pv(d, x, RieszWhich::F2, 1.0, hi);
    CHECK(std::abs(f2 - f2_ref) <= 1e-6 * std::abs(f2_ref));

    QuadratureConfig rich;
    rich.richardson = true;
    CHECK(std::abs(riesz_pv(d, x, RieszWhich::F1, 1.0, rich) - ref) <= 1e-6 * std::abs(ref));
}

TEST_CASE("riesz_matrix identities") {
    DensityField zero;
    auto Z = riesz_matrix(zero, {0.0, 0.0});
    CHECK(Z[0][0] == 0.0);
    CHECK(Z[0][1] == 0.0);
    CHECK(Z[1][1] == 0.0);

    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
        DensityField d = pair();
        d.background = rng.uniform(0.0, 1.0);
        Vec2 x{rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 1.0)};
        auto R = riesz_matrix(d, x);
        CHECK(R[0][1] == R[1][0]);
        CHECK(std::abs(R[0][0] + R[1][1] - d(x)) < 1e-6);
        double f1 = riesz_pv(d, x, RieszWhich::F1, -1.0);
        CHECK(std::abs(-1.0 * (R[0][0] - R[1][1]) - f1) < 1e-8);
        double f2 = riesz_pv(d, x, RieszWhich::F2, 1.0);
        CHECK(std::abs(2.0 * R[0][1] - f2) < 1e-8);
    }
}

TEST_CASE("property: translation, parity, linearity") {
    Rng rng(12);
    QuadratureConfig fixed;
    fixed.panels = 120;
    fixed.r_out = 7.0;
    for (int i = 0; i < 10; ++i) {
        auto d = pair();
        Vec2 x{rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 1.0)};
        Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        for (auto which : {RieszWhich::F1, RieszWhich::F2}) {
            double a = riesz_pv(d, x, which, 1.0);
            double b = riesz_pv(d.shifted(v), {x[0] + v[0], x[1] + v[1]}, which, 1.0);
            CHECK(std::abs(a - b) < 1e-8);

            DensityField first{{d.components[0]}, 0.0}, second{{d.components[1]}, 0.0};
            double sum = riesz_pv(first, x, which, 1.0, fixed) + riesz_pv(second, x, which, 1.0, fixed);
            CHECK(std::abs(riesz_pv(d, x, which, 1.0, fixed) - sum) < 1e-10);
        }

        // mirror pair across the horizontal line through x
        double off = rng.uniform(0.3, 1.5), dx = rng.uniform(-1.0, 1.0);
        DensityField sym{{{{x[0] + dx, x[1] + off}, 1.0, 0.4}, {{x[0] + dx, x[1] - off}, 1.0, 0.4}}, 0.0};
        CHECK(std::abs(riesz_pv(sym, x, RieszWhich::F2, 1.0)) < 1e-8);
        // and across the vertical one
        DensityField sym2{{{{x[0] + off, x[1] + dx}, 1.0, 0.4}, {{x[0] - off, x[1] + dx}, 1.0, 0.4}}, 0.0};
        CHECK(std::abs(riesz_pv(sym2, x, RieszWhich::F2, 1.0)) < 1e-8);
    }
}

TEST_CASE("configuration errors and non-convergence") {
    auto d = pair();
    QuadratureConfig q;
    q.n_theta = 15;
    CHECK_THROWS_AS(riesz_pv(d, {0.0, 0.0}, RieszWhich::F1, 1.0, q), Error);
    q = {};
    q.eps = 2.0;
    q.r_out = 1.0;
    CHECK_THROWS_AS(riesz_pv(d, {0.0, 0.0}, RieszWhich::F1, 1.0, q), Error);

    DensityField bad{{{{0.0, 0.0}, -1.0, 1.0}}, 0.0};
    CHECK_THROWS_AS(riesz_pv(bad, {0.0, 0.0}, RieszWhich::F1, 1.0), Error);

    // one coarse panel across a narrow far bump, no refinement allowed
    QuadratureConfig coarse;
    coarse.n_theta = 16;
    coarse.panels = 1;
    coarse.max_refinements = 0;
    coarse.rel_tol = 1e-12;
    CHECK_THROWS_WITH_AS(riesz_pv(single({5.0, 1.0}, 1.0, 0.01), {0.0, 0.0}, RieszWhich::F1, 1.0, coarse),
                         "quadrature not converged", Error);
}

TEST_CASE("initial_A") {
    auto a = initial_A(2.0, 0.0, 0.0, 1.0);
    CHECK(a.value == 2.0);
    CHECK(a.admissible);
    a = initial_A(0.0, 1.0, 0.0, 1.0);
    CHECK(a.value == -0.5);
    CHECK(a.admissible);
    a = initial_A(0.0, 2.0, 0.0, 1.0);
    CHECK(a.value == -2.0);
    CHECK(!a.admissible);
    Params p;
    p.beta = 2.0;
    p.s = 1.0;
    CHECK(initial_A(0.0, 2.0, 0.0, 1.0, p).admissible);
    CHECK_THROWS_WITH_AS(initial_A(1.0, 0.0, 0.0, 0.0), "density positivity violated", Error);
}

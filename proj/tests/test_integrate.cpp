#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rct/error.hpp"
#include "rct/integrate.hpp"

using namespace rct;

namespace {

RhsFn decay() {
    return [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
}

RhsFn square() {
    return [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
}

RhsFn oscillator() {
    return [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
}

double endpoint_error(double rtol, double atol) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = atol;
    std::vector<double> y0{1.0};
    auto tr = integrate(decay(), y0, 0.0, 1.0, cfg);
    return std::abs(tr.final_state()[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("exponential decay reaches e^-1") {
    std::vector<double> y0{1.0};
    auto tr = integrate(decay(), y0, 0.0, 1.0, IntegratorConfig{});
    CHECK(tr.completed());
    CHECK(tr.t_end() == 1.0);
    CHECK(std::abs(tr.final_state()[0] - std::exp(-1.0)) < 1e-8);
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("y' = y^2 blows up just before t = 1") {
    std::vector<double> y0{1.0};
    auto tr = integrate(square(), y0, 0.0, 2.0, IntegratorConfig{});
    REQUIRE(tr.blew_up());
    const auto& bu = std::get<BlowUp>(tr.status);
    CHECK(bu.t_lower >= 0.999);
    CHECK(bu.t_lower <= 1.0);
    CHECK(std::abs(tr.final_state()[0]) > 1e8);
    CHECK(bu.component == "y0");
}

TEST_CASE("harmonic oscillator zero crossings") {
    std::vector<double> y0{1.0, 0.0};
    std::vector<EventFn> events{{[](double, std::span<const double> y) { return y[0]; }, false, "zero"}};
    auto tr = integrate(oscillator(), y0, 0.0, 10.0, IntegratorConfig{}, events);
    CHECK(tr.completed());
    REQUIRE(tr.events.size() == 3);
    for (std::size_t n = 0; n < tr.events.size(); ++n) {
        double expected = std::numbers::pi / 2.0 + static_cast<double>(n) * std::numbers::pi;
        CHECK(std::abs(tr.events[n].t - expected) < 1e-8);
    }
}

TEST_CASE("terminal events stop at the earliest crossing, ties by listed order") {
    std::vector<double> y0{1.0, 0.0};
    auto g = [](double, std::span<const double> y) { return y[0]; };
    std::vector<EventFn> events{{[](double t, std::span<const double>) { return t - 3.0; }, true, "late"},
                                {g, true, "zero_a"},
                                {g, true, "zero_b"}};
    auto tr = integrate(oscillator(), y0, 0.0, 10.0, IntegratorConfig{}, events);
    REQUIRE(std::holds_alternative<EventStopped>(tr.status));
    const auto& es = std::get<EventStopped>(tr.status);
    CHECK(es.event_id == 1);
    CHECK(std::abs(es.t_event - std::numbers::pi / 2.0) < 1e-8);
    CHECK(tr.t_end() == es.t_event);
    CHECK(std::abs(tr.final_state()[0]) < 1e-8);
}

TEST_CASE("dense output") {
    std::vector<double> y0{1.0};
    auto tr = integrate(decay(), y0, 0.0, 3.0, IntegratorConfig{});

    SUBCASE("stored nodes are returned exactly") {
        for (std::size_t i = 0; i < tr.times.size(); ++i) CHECK(dense_eval(tr, tr.times[i]) == tr.states[i]);
    }
    SUBCASE("midpoints match the analytic solution") {
        for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
            double tm = 0.5 * (tr.times[i] + tr.times[i + 1]);
            CHECK(std::abs(dense_eval(tr, tm, 0) - std::exp(-tm)) < 1e-7);
        }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_WITH_AS(dense_eval(tr, 3.5), "out of range", Error);
        CHECK_THROWS_AS(dense_eval(tr, -0.1), Error);
    }
}

TEST_CASE("constant rhs interpolates linearly") {
    RhsFn f = [](double, std::span<const double>, std::span<double> dy) {
        dy[0] = 2.0;
        dy[1] = -0.5;
    };
    std::vector<double> y0{1.0, 3.0};
    IntegratorConfig cfg;
    cfg.max_step = 0.7;
    auto tr = integrate(f, y0, 0.0, 5.0, cfg);
    for (double t = 0.0; t <= 5.0; t += 0.0371) {
        auto y = dense_eval(tr, t);
        CHECK(y[0] == doctest::Approx(1.0 + 2.0 * t).epsilon(1e-14));
        CHECK(y[1] == doctest::Approx(3.0 - 0.5 * t).epsilon(1e-14));
    }
}

TEST_CASE("tightening tolerances reduces the endpoint error") {
    // The controller is tolerance-proportional: halving rtol/atol roughly halves
    // the error, so a 4x reduction needs a 4x tighter tolerance.
    double coarse = endpoint_error(1e-6, 1e-9);
    double fine = endpoint_error(0.5e-6, 0.5e-9);
    double finer = endpoint_error(0.25e-6, 0.25e-9);
    CHECK(fine < coarse);
    CHECK(coarse / finer >= 4.0);
}

TEST_CASE("order check with step-limited integration") {
    // Loose tolerances so max_step dictates h; halving h must cut the error
    // by far more than 4x for a fifth-order method.
    auto err_at = [](double h) {
        IntegratorConfig cfg;
        cfg.rtol = 1e-2;
        cfg.atol = 1e-2;
        cfg.max_step = h;
        std::vector<double> y0{1.0};
        auto tr = integrate(decay(), y0, 0.0, 1.0, cfg);
        return std::abs(tr.final_state()[0] - std::exp(-1.0));
    };
    double e1 = err_at(0.1), e2 = err_at(0.05);
    CHECK(e1 / e2 >= 4.0);
    CHECK(e1 / e2 > 20.0);
}

TEST_CASE("blow-up time bounded by the Riccati comparison") {
    // b' = -b^2/2 - 1 <= -b^2/2, so blow-up happens before -2/b0.
    RhsFn f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -0.5 * y[0] * y[0] - 1.0; };
    for (double b0 : {-0.5, -1.0, -3.0}) {
        std::vector<double> y0{b0};
        auto tr = integrate(f, y0, 0.0, 20.0, IntegratorConfig{});
        REQUIRE(tr.blew_up());
        CHECK(std::get<BlowUp>(tr.status).t_lower <= -2.0 / b0);
    }
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    std::vector<double> y0{0.3, -1.2};
    auto a = integrate(oscillator(), y0, 0.0, 7.0, IntegratorConfig{});
    auto b = integrate(oscillator(), y0, 0.0, 7.0, IntegratorConfig{});
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.dense == b.dense);
}

TEST_CASE("step budget exhaustion reports EventStopped") {
    IntegratorConfig cfg;
    cfg.max_steps = 5;
    std::vector<double> y0{1.0, 0.0};
    auto tr = integrate(oscillator(), y0, 0.0, 100.0, cfg);
    REQUIRE(std::holds_alternative<EventStopped>(tr.status));
    CHECK(std::get<EventStopped>(tr.status).event_id == kMaxStepsEvent);
    CHECK(tr.step_stats.accepted == 5);
}

TEST_CASE("non-finite rhs is reported as blow-up at the last accepted time") {
    RhsFn f = [](double t, std::span<const double>, std::span<double> dy) {
        dy[0] = t < 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> y0{0.0};
    auto tr = integrate(f, y0, 0.0, 1.0, IntegratorConfig{});
    REQUIRE(tr.blew_up());
    CHECK(std::get<BlowUp>(tr.status).t_lower <= 0.5);
    CHECK(std::get<BlowUp>(tr.status).t_lower == tr.t_end());
}

TEST_CASE("segmented integration restarts at discontinuities") {
    RhsFn f = [](double t, std::span<const double>, std::span<double> dy) { dy[0] = t < 1.0 ? 1.0 : -2.0; };
    std::vector<double> y0{0.0};
    std::vector<double> cuts{1.0};
    auto tr = integrate_segmented(f, y0, 0.0, 3.0, cuts, IntegratorConfig{});
    CHECK(tr.completed());
    CHECK(tr.final_state()[0] == doctest::Approx(1.0 - 4.0).epsilon(1e-12));
    CHECK(dense_eval(tr, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
    CHECK(tr.dense.size() + 1 == tr.times.size());
}

TEST_CASE("config validation") {
    IntegratorConfig cfg;
    cfg.min_step = 1.0;
    cfg.max_step = 0.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.blowup_magnitude = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    std::vector<double> y0{1.0};
    CHECK_THROWS_AS(integrate(decay(), y0, 1.0, 1.0, IntegratorConfig{}), Error);
}

#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace rct {

struct Params;

namespace forcing {

struct Constant {
    double value = 0.0;
};

/// A(t) = -(alpha t + beta)^s, the polynomial envelope itself.
struct PolyFloor {
    double alpha = 1.0;
    double beta = 1.0;
    double s = 1.0;
};

/// A(t) = -alpha e^{beta t}.
struct ExpFloor {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Right-continuous step function: values[0] on (-inf, breakpoints[0]),
/// values[i] on [breakpoints[i-1], breakpoints[i]). values.size() == breakpoints.size() + 1.
struct Piecewise {
    std::vector<double> breakpoints;
    std::vector<double> values;
};

/// Linear interpolation through (times[i], values[i]); clamps outside.
struct Tabulated {
    std::vector<double> times;
    std::vector<double> values;
};

using Shape = std::variant<Constant, PolyFloor, ExpFloor, Piecewise, Tabulated>;

}  // namespace forcing

/// Time-dependent coefficient A(t) (or a prescribed forcing f_i(t) when no
/// cap is set). With a cap w, evaluations are clamped to min(A(t), w).
class ForcingSignal {
public:
    ForcingSignal() = default;
    ForcingSignal(forcing::Shape shape, std::optional<double> cap = std::nullopt);

    static ForcingSignal constant(double value) { return ForcingSignal(forcing::Constant{value}); }

    double operator()(double t) const;

    /// Times where the signal is not smooth (piecewise jumps, table knots).
    std::vector<double> breakpoints() const;

    const forcing::Shape& shape() const { return shape_; }
    const std::optional<double>& cap() const { return cap_; }
    bool is_constant() const { return std::holds_alternative<forcing::Constant>(shape_); }

private:
    forcing::Shape shape_ = forcing::Constant{};
    std::optional<double> cap_;
};

/// -(alpha t + beta)^s from the configuration.
double envelope_floor(double t, const Params& p);

/// Checks -(alpha t + beta)^s <= A(t) <= cap at breakpoints (both sides) and
/// on a uniform grid of `samples` points over [0, horizon].
bool envelope_respecting(const ForcingSignal& a, const Params& p, double horizon, int samples = 2001);

/// Prescribed forcings of the eta and xi equations.
struct PrescribedF {
    ForcingSignal f1;
    ForcingSignal f2;
};

}  // namespace rct

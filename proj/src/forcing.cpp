#include "rct/forcing.hpp"

#include <algorithm>
#include <cmath>

#include "rct/dynamics.hpp"
#include "rct/error.hpp"

namespace rct {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_shape(const forcing::Shape& shape) {
    std::visit(overloaded{
                   [](const forcing::Constant&) {},
                   [](const forcing::PolyFloor& f) {
                       if (!(f.alpha > 0.0) || !(f.beta > 0.0) || !(f.s >= 1.0))
                           throw Error(std::string(msg::kInvalidArgument) + ": poly floor needs alpha, beta > 0, s >= 1");
                   },
                   [](const forcing::ExpFloor& f) {
                       if (!(f.alpha > 0.0) || !(f.beta > 0.0))
                           throw Error(std::string(msg::kInvalidArgument) + ": exp floor needs alpha, beta > 0");
                   },
                   [](const forcing::Piecewise& f) {
                       if (f.values.size() != f.breakpoints.size() + 1)
                           throw Error(std::string(msg::kInvalidArgument) + ": piecewise needs one more value than breakpoints");
                       if (!std::is_sorted(f.breakpoints.begin(), f.breakpoints.end()) ||
                           std::adjacent_find(f.breakpoints.begin(), f.breakpoints.end()) != f.breakpoints.end())
                           throw Error(std::string(msg::kInvalidArgument) + ": piecewise breakpoints must increase");
                   },
                   [](const forcing::Tabulated& f) {
                       if (f.times.empty() || f.times.size() != f.values.size())
                           throw Error(std::string(msg::kInvalidArgument) + ": tabulated needs matching nonempty times/values");
                       for (std::size_t i = 1; i < f.times.size(); ++i)
                           if (!(f.times[i] > f.times[i - 1]))
                               throw Error(std::string(msg::kInvalidArgument) + ": tabulated times must increase");
                   },
               },
               shape);
}

}  // namespace

ForcingSignal::ForcingSignal(forcing::Shape shape, std::optional<double> cap)
    : shape_(std::move(shape)), cap_(cap) {
    check_shape(shape_);
}

double ForcingSignal::operator()(double t) const {
    double v = std::visit(
        overloaded{
            [](const forcing::Constant& f) { return f.value; },
            [t](const forcing::PolyFloor& f) { return -std::pow(f.alpha * t + f.beta, f.s); },
            [t](const forcing::ExpFloor& f) { return -f.alpha * std::exp(f.beta * t); },
            [t](const forcing::Piecewise& f) {
                auto it = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), t);
                return f.values[static_cast<std::size_t>(it - f.breakpoints.begin())];
            },
            [t](const forcing::Tabulated& f) {
                if (t <= f.times.front()) return f.values.front();
                if (t >= f.times.back()) return f.values.back();
                auto it = std::upper_bound(f.times.begin(), f.times.end(), t);
                auto i = static_cast<std::size_t>(it - f.times.begin());
                double w = (t - f.times[i - 1]) / (f.times[i] - f.times[i - 1]);
                return f.values[i - 1] + w * (f.values[i] - f.values[i - 1]);
            },
        },
        shape_);
    if (cap_) v = std::min(v, *cap_);
    return v;
}

std::vector<double> ForcingSignal::breakpoints() const {
    if (const auto* pw = std::get_if<forcing::Piecewise>(&shape_)) return pw->breakpoints;
    if (const auto* tab = std::get_if<forcing::Tabulated>(&shape_)) return tab->times;
    return {};
}

double envelope_floor(double t, const Params& p) { return -std::pow(p.alpha * t + p.beta, p.s); }

bool envelope_respecting(const ForcingSignal& a, const Params& p, double horizon, int samples) {
    auto ok = [&](double t) {
        double v = a(t);
        if (!std::isfinite(v)) return false;
        if (v < envelope_floor(t, p)) return false;
        if (a.cap() && v > *a.cap()) return false;
        return true;
    };
    for (int i = 0; i < samples; ++i) {
        double t = horizon * static_cast<double>(i) / static_cast<double>(std::max(1, samples - 1));
        if (!ok(t)) return false;
    }
    for (double b : a.breakpoints()) {
        if (b < 0.0 || b > horizon) continue;
        if (!ok(b) || !ok(std::nextafter(b, -1e300))) return false;
    }
    return true;
}

}  // namespace rct

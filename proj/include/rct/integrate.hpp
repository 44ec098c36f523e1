#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rct {

/// Right-hand side y' = f(t, y), written into dydt.
using RhsFn = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Scalar event function; a root is located at every sign change.
struct EventFn {
    std::function<double(double t, std::span<const double> y)> g;
    bool terminal = false;
    std::string name;
};

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-12;
    double blowup_magnitude = 1e8;
    std::size_t max_steps = 2'000'000;

    /// Throws rct::Error when the invariants on the fields do not hold.
    void validate() const;
};

struct Completed {};

struct BlowUp {
    double t_lower = 0.0;
    std::string component;
    std::string reason;
};

struct EventStopped {
    /// Index into the event list, or kMaxStepsEvent when the step budget ran out.
    int event_id = 0;
    double t_event = 0.0;
    std::string diagnostic;
};

inline constexpr int kMaxStepsEvent = -1;

using TrajectoryStatus = std::variant<Completed, BlowUp, EventStopped>;

struct EventHit {
    int event_id = 0;
    double t = 0.0;
    std::vector<double> state;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Dense solution. Step i spans [times[i], times[i+1]] and its continuous
/// extension is stored in dense[i] as 5*dim coefficients.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> dense;
    std::vector<EventHit> events;
    TrajectoryStatus status = Completed{};
    StepStats step_stats;

    std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    const std::vector<double>& final_state() const { return states.back(); }

    bool completed() const { return std::holds_alternative<Completed>(status); }
    bool blew_up() const { return std::holds_alternative<BlowUp>(status); }
};

/// Dormand–Prince 5(4) with PI step control, dense output, event location
/// and blow-up detection. `names` labels components in BlowUp reports
/// (defaults to "y0", "y1", ...).
Trajectory integrate(const RhsFn& rhs, std::span<const double> initial, double t0, double t1,
                     const IntegratorConfig& cfg, std::span<const EventFn> events = {},
                     std::span<const std::string> names = {});

/// Integrates across known discontinuities of the rhs by restarting at each
/// breakpoint inside (t0, t1). The pieces are concatenated into one record.
Trajectory integrate_segmented(const RhsFn& rhs, std::span<const double> initial, double t0, double t1,
                               std::span<const double> breakpoints, const IntegratorConfig& cfg,
                               std::span<const EventFn> events = {},
                               std::span<const std::string> names = {});

/// Interpolated state at t; returns the stored state exactly at a node.
/// Throws rct::Error("out of range") outside [t_begin, t_end].
std::vector<double> dense_eval(const Trajectory& traj, double t);

/// Single component of dense_eval.
double dense_eval(const Trajectory& traj, double t, std::size_t component);

std::string status_name(const TrajectoryStatus& status);

}  // namespace rct

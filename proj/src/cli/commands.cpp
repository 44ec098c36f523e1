#include "rct/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rct/cli/config.hpp"
#include "rct/cli/output.hpp"
#include "rct/cli/presets.hpp"
#include "rct/comparison.hpp"
#include "rct/error.hpp"
#include "rct/riesz.hpp"
#include "rct/threshold.hpp"

namespace rct::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void ensure_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

// trajectory.csv -> trajectory_3.csv
std::string indexed_name(const std::string& name, std::size_t i) {
    auto dot = name.find_last_of('.');
    auto slash = name.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return name + "_" + std::to_string(i);
    return name.substr(0, dot) + "_" + std::to_string(i) + name.substr(dot);
}

json status_json(const TrajectoryStatus& st) {
    json j{{"status", status_name(st)}};
    if (const auto* b = std::get_if<BlowUp>(&st)) {
        j["t_lower"] = num(b->t_lower);
        j["component"] = b->component;
        j["reason"] = b->reason;
    } else if (const auto* e = std::get_if<EventStopped>(&st)) {
        j["event_id"] = e->event_id;
        j["t_event"] = num(e->t_event);
        j["diagnostic"] = e->diagnostic;
    }
    return j;
}

void emit_json(const json& j, const std::optional<std::string>& out_file, Streams io) {
    std::string text = j.dump(2);
    if (out_file) {
        write_text_file(*out_file, text);
        io.out << "wrote " << *out_file << "\n";
    } else {
        io.out << text << "\n";
    }
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + item + "' is not a number");
        }
    }
    return out;
}

// Shared error mapping: configuration problems and precondition failures are exit 1.
int guarded(Streams io, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        io.err << "error: " << e.what() << "\n";
    } catch (const rct::Error& e) {
        io.err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
    }
    return kExitConfig;
}

// ---- simulate ----

struct RunSetup {
    RhsFn rhs;
    std::vector<double> breakpoints;
    std::vector<std::string> names;
};

RunSetup setup_run(const ScenarioConfig& c) {
    RunSetup s;
    switch (c.system) {
        case System::Closed:
            s.rhs = closed_system(c.forcing, c.params);
            s.breakpoints = c.forcing.breakpoints();
            s.names = {"rho", "d"};
            break;
        case System::Spectral: {
            s.rhs = spectral_system(c.f, c.params);
            s.breakpoints = c.f.f1.breakpoints();
            auto b2 = c.f.f2.breakpoints();
            s.breakpoints.insert(s.breakpoints.end(), b2.begin(), b2.end());
            std::sort(s.breakpoints.begin(), s.breakpoints.end());
            s.breakpoints.erase(std::unique(s.breakpoints.begin(), s.breakpoints.end()), s.breakpoints.end());
            s.names = {"rho", "d", "omega", "eta", "xi"};
            break;
        }
        case System::AuxPoly:
            s.rhs = aux_poly_system(c.params);
            s.names = {"a", "b", "B"};
            break;
        case System::AuxExp:
            s.rhs = aux_exp_system();
            s.names = {"a", "b"};
            break;
    }
    return s;
}

std::string trajectory_csv(const ScenarioConfig& c, const RunSetup& s, const Trajectory& tr, const std::string& hash) {
    std::ostringstream os;
    std::vector<std::string> header{"t"};
    header.insert(header.end(), s.names.begin(), s.names.end());
    const bool with_E = c.system == System::Closed && c.forcing.is_constant();
    const bool with_A = c.system == System::Spectral;
    if (with_E) header.push_back("E");
    if (with_A) header.push_back("A");
    CsvWriter w(os, hash, header);

    std::optional<RhoPath> path;
    SpectralState init;
    if (with_A) {
        path = rho_path_from(tr, 0);
        const auto& y0 = tr.states.front();
        init = {y0[0], y0[1], y0[2], y0[3], y0[4]};
    }
    const double a_const = with_E ? c.forcing(0.0) : 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        w.cell(tr.times[i]);
        for (double v : tr.states[i]) w.cell(v);
        if (with_E) w.cell(first_integral({tr.states[i][0], tr.states[i][1]}, a_const, c.params));
        if (with_A) w.cell(reconstruct_A(init, *path, c.f, tr.times[i]));
        w.end_row();
    }
    return os.str();
}

// ---- verify suites ----

struct SuiteResult {
    json summary;
    json violations = json::array();
};

IntegratorConfig conservation_cfg() {
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-13;
    return cfg;
}

json scenario_json(const ComparisonScenario& sc) {
    const auto* pw = std::get_if<forcing::Piecewise>(&sc.A.shape());
    return {{"rho0", sc.closed0.rho}, {"d0", sc.closed0.d}, {"a0", sc.a0},        {"b0", sc.b0},
            {"k", sc.params.k},       {"c_b", sc.params.c_b}, {"s", sc.params.s}, {"alpha", sc.params.alpha},
            {"beta", sc.params.beta}, {"w", sc.w},            {"T", sc.T},
            {"A", {{"breakpoints", pw ? pw->breakpoints : std::vector<double>{}},
                   {"values", pw ? pw->values : std::vector<double>{}}}}};
}

ComparisonScenario scenario_from_json(const json& j) {
    Fields f(j, "/inputs");
    ComparisonScenario sc;
    sc.closed0 = {f.number("rho0"), f.number("d0")};
    sc.a0 = f.number("a0");
    sc.b0 = f.number("b0");
    sc.params.k = f.number("k");
    sc.params.c_b = f.number("c_b");
    sc.params.s = f.number("s");
    sc.params.alpha = f.number("alpha");
    sc.params.beta = f.number("beta");
    sc.w = f.number("w");
    sc.T = f.number("T");
    const json* a = f.child("A");
    if (!a) fail_at("/inputs/A", "missing required field");
    Fields af(*a, "/inputs/A");
    sc.A = ForcingSignal(forcing::Piecewise{af.numbers("breakpoints"), af.numbers("values")}, sc.w);
    af.finish();
    f.finish();
    return sc;
}

json ordering_violations_json(const std::vector<OrderingViolation>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back({{"t", x.t}, {"kind", x.kind}, {"value", x.value}});
    return out;
}

SuiteResult suite_comparison(std::uint64_t seed, std::size_t count) {
    IntegratorConfig cfg;
    auto rep = verify_comparison(count, seed, cfg);
    SuiteResult r;
    r.summary = {{"scenarios", rep.scenarios},
                 {"blowups", rep.blowups},
                 {"min_d_minus_b", num(rep.min_d_minus_b)},
                 {"min_a_minus_rho", num(rep.min_a_minus_rho)},
                 {"threshold", -kOrderingTolerance}};
    for (const auto& f : rep.failures) {
        auto sc = comparison_scenario(seed, f.index);
        r.violations.push_back({{"index", f.index},
                                {"seed", seed},
                                {"inputs", scenario_json(sc)},
                                {"violations", ordering_violations_json(f.violations)}});
    }
    return r;
}

std::optional<json> replay_comparison(const json& item) {
    if (!item.contains("inputs")) throw ConfigError("replay item lacks 'inputs'");
    auto sc = scenario_from_json(item["inputs"]);
    auto rep = coupled_compare(sc.closed0, sc.a0, sc.b0, sc.A, sc.params, sc.T, IntegratorConfig{});
    if (rep.ordered()) return std::nullopt;
    json out = item;
    out["violations"] = ordering_violations_json(rep.violations);
    return out;
}

SurfaceParams invariance_surface() { return SurfaceParams{}; }
constexpr double kInvarianceT = 80.0;

json surface_json(const SurfaceParams& sp) {
    return {{"m1", sp.m1}, {"m2", sp.m2}, {"M", sp.M}, {"n1", sp.n1}, {"n2", sp.n2}, {"N", sp.N}, {"s", sp.s}};
}

SurfaceParams surface_from_json(const json& j, const std::string& path) {
    Fields f(j, path);
    SurfaceParams sp;
    sp.m1 = f.number("m1");
    sp.m2 = f.number("m2");
    sp.M = f.number("M");
    sp.n1 = f.number("n1");
    sp.n2 = f.number("n2");
    sp.N = f.number("N");
    sp.s = f.number("s");
    f.finish();
    return sp;
}

json invariance_items(const InvarianceReport& rep, const SurfaceParams& sp, double T) {
    json out = json::array();
    for (const auto& v : rep.violations)
        out.push_back({{"a0", v.a0},
                       {"b0", v.b0},
                       {"t", v.t},
                       {"kind", v.kind},
                       {"value", num(v.value)},
                       {"surface", surface_json(sp)},
                       {"T", T}});
    return out;
}

SuiteResult suite_invariance(std::uint64_t seed, std::size_t count) {
    auto sp = invariance_surface();
    auto cert = certified_horizon(sp, 200.0);
    auto rep = verify_invariance(sp, count, kInvarianceT, seed, IntegratorConfig{});
    SuiteResult r;
    r.summary = {{"surface", surface_json(sp)},
                 {"T", kInvarianceT},
                 {"T_cert", num(cert.certified_T())},
                 {"samples", rep.samples},
                 {"rejected", rep.rejected},
                 {"integrated", rep.integrated},
                 {"non_completed", rep.non_completed},
                 {"min_F", num(rep.min_F)}};
    r.violations = invariance_items(rep, sp, kInvarianceT);
    return r;
}

std::optional<json> replay_invariance(const json& item) {
    Fields f(item, "/violation");
    double a0 = f.number("a0"), b0 = f.number("b0"), T = f.number("T");
    const json* s = f.child("surface");
    if (!s) fail_at("/violation/surface", "missing required field");
    auto sp = surface_from_json(*s, "/violation/surface");
    auto rep = verify_invariance_from(sp, {{a0, b0}}, T, IntegratorConfig{});
    auto items = invariance_items(rep, sp, T);
    if (items.empty()) return std::nullopt;
    return items.front();
}

json exp_item(const ExpBlowupSample& s) {
    json j{{"a0", s.a0},
           {"b0", s.b0},
           {"t_bound", num(s.t_bound)},
           {"curve_excess", num(s.curve_excess)},
           {"region_monotone", s.region_monotone},
           {"b_decreasing", s.b_decreasing}};
    j.update(status_json(s.status));
    return j;
}

bool exp_sample_fails(const ExpBlowupSample& s) {
    const auto* bu = std::get_if<BlowUp>(&s.status);
    if (!bu) return true;
    if (bu->t_lower > s.t_bound + 1e-3) return true;
    return s.curve_excess > 1e-6 || !s.region_monotone || !s.b_decreasing;
}

SuiteResult suite_expblowup(std::uint64_t seed, std::size_t count) {
    auto rep = verify_exp_blowup(count, seed, IntegratorConfig{});
    SuiteResult r;
    r.summary = {{"samples", rep.samples},
                 {"blowups", rep.blowups},
                 {"blowup_fraction", rep.blowup_fraction},
                 {"max_negative_b0_excess", num(rep.max_negative_b0_excess)},
                 {"max_curve_excess", num(rep.max_curve_excess)},
                 {"bound_exceeded", rep.bound_exceeded},
                 {"region_failures", rep.region_failures},
                 {"monotone_failures", rep.monotone_failures}};
    for (const auto& s : rep.runs)
        if (exp_sample_fails(s)) r.violations.push_back(exp_item(s));
    return r;
}

std::optional<json> replay_expblowup(const json& item) {
    Fields f(item, "/violation");
    auto s = run_exp_blowup(f.number("a0"), f.number("b0"), IntegratorConfig{});
    if (!exp_sample_fails(s)) return std::nullopt;
    return exp_item(s);
}

SuiteResult suite_riesz(std::uint64_t seed, std::size_t count) {
    auto rep = verify_riesz(count, seed);
    SuiteResult r;
    r.summary = {{"center_f1", rep.center_f1},
                 {"center_f2", rep.center_f2},
                 {"max_trace_residual", rep.max_trace_residual},
                 {"far_field_rel_error", rep.far_field_rel_error},
                 {"points", rep.trace_points.size()}};
    if (rep.center_f1 >= 1e-8 || rep.center_f2 >= 1e-8)
        r.violations.push_back({{"check", "center"}, {"seed", seed}, {"f1", rep.center_f1}, {"f2", rep.center_f2}});
    if (rep.far_field_rel_error > 0.01)
        r.violations.push_back({{"check", "far_field"}, {"seed", seed}, {"rel_error", rep.far_field_rel_error}});
    for (const auto& p : rep.trace_points)
        if (p.residual >= 1e-6)
            r.violations.push_back({{"check", "trace"}, {"x", {p.x[0], p.x[1]}}, {"residual", p.residual}});
    return r;
}

std::optional<json> replay_riesz(const json& item) {
    Fields f(item, "/violation");
    std::string check = f.string("check");
    if (check == "trace") {
        auto x = f.numbers("x");
        if (x.size() != 2) fail_at("/violation/x", "expected [x1, x2]");
        auto d = reference_density();
        auto R = riesz_matrix(d, {x[0], x[1]});
        double res = std::abs(R[0][0] + R[1][1] - d({x[0], x[1]}));
        if (res < 1e-6) return std::nullopt;
        return json{{"check", "trace"}, {"x", x}, {"residual", res}};
    }
    auto rep = verify_riesz(0, 0);
    if (check == "center") {
        if (rep.center_f1 < 1e-8 && rep.center_f2 < 1e-8) return std::nullopt;
        return json{{"check", "center"}, {"f1", rep.center_f1}, {"f2", rep.center_f2}};
    }
    if (check == "far_field") {
        if (rep.far_field_rel_error <= 0.01) return std::nullopt;
        return json{{"check", "far_field"}, {"rel_error", rep.far_field_rel_error}};
    }
    fail_at("/violation/check", "unknown check '" + check + "'");
}

json conservation_item(const ConservationRun& r, std::uint64_t seed) {
    const auto& c = r.input;
    return {{"index", c.index},
            {"seed", seed},
            {"inputs",
             {{"rho0", c.init.rho}, {"d0", c.init.d}, {"A", c.A}, {"k", c.params.k}, {"c_b", c.params.c_b}, {"T", c.T}}},
            {"drift", r.drift},
            {"d_max", r.d_max},
            {"d_bound", r.d_bound}};
}

bool conservation_fails(const ConservationRun& r) {
    return !(r.drift < kDriftTolerance) || r.d_max > r.d_bound + kBoundTolerance;
}

SuiteResult suite_conservation(std::uint64_t seed, std::size_t count) {
    auto cfg = conservation_cfg();
    auto rep = verify_conservation(count, seed, cfg);
    SuiteResult r;
    r.summary = {{"requested", count},
                 {"attempted", rep.attempted},
                 {"completed", rep.completed},
                 {"max_drift", rep.max_drift},
                 {"max_bound_excess", num(rep.max_bound_excess)},
                 {"rtol", cfg.rtol},
                 {"atol", cfg.atol}};
    if (rep.completed < count)
        r.violations.push_back({{"check", "completed_runs"}, {"seed", seed}, {"completed", rep.completed}});
    for (const auto& run : rep.runs)
        if (conservation_fails(run)) r.violations.push_back(conservation_item(run, seed));
    return r;
}

std::optional<json> replay_conservation(const json& item) {
    Fields f(item, "/violation");
    if (f.has("check")) {
        // batch-level shortfall: rerun the batch
        std::uint64_t seed = f.seed("seed", 0);
        auto n = static_cast<std::size_t>(f.integer("completed", 0));
        auto rep = verify_conservation(n + 1, seed, conservation_cfg());
        if (rep.completed > n) return std::nullopt;
        return item;
    }
    const json* in = f.child("inputs");
    if (!in) fail_at("/violation/inputs", "missing required field");
    Fields i(*in, "/violation/inputs");
    ConservationCase c;
    c.index = static_cast<std::uint64_t>(f.integer("index", 0));
    c.init = {i.number("rho0"), i.number("d0")};
    c.A = i.number("A");
    c.params.k = i.number("k");
    c.params.c_b = i.number("c_b");
    c.T = i.number("T");
    auto run = run_conservation_case(c, conservation_cfg());
    if (!conservation_fails(run)) return std::nullopt;
    return conservation_item(run, f.seed("seed", 0));
}

struct Suite {
    std::size_t default_count;
    std::function<SuiteResult(std::uint64_t, std::size_t)> run;
    std::function<std::optional<json>(const json&)> replay;
};

const std::map<std::string, Suite>& suites() {
    static const std::map<std::string, Suite> s{
        {"comparison", {1000, suite_comparison, replay_comparison}},
        {"invariance", {500, suite_invariance, replay_invariance}},
        {"expblowup", {500, suite_expblowup, replay_expblowup}},
        {"riesz", {20, suite_riesz, replay_riesz}},
        {"conservation", {100, suite_conservation, replay_conservation}},
    };
    return s;
}

json certify_report(const SurfaceParams& sp, const FeasibilityReport& fr, const std::string& mode,
                    const std::optional<PaperParamsReport>& paper) {
    auto d0 = discriminant(0.0, sp);
    json samples = json::array();
    for (const auto& s : fr.samples) samples.push_back({{"x", s.x}, {"D", num(s.D)}, {"leading", num(s.leading)}});
    json j{{"schema", "riccati-ct.certify/1"},
           {"tool_version", kToolVersion},
           {"mode", mode},
           {"params", surface_json(sp)},
           {"x_max", fr.x_max},
           {"D0", num(d0.D)},
           {"leading0", num(d0.leading)},
           {"constant0", num(d0.constant)},
           {"verdict", verdict_name(fr.verdict)},
           {"T_cert", num(fr.certified_T())},
           {"T_cert_infinite", std::isinf(fr.certified_T())},
           {"disc_negative_until", fr.disc_negative_until},
           {"leading_ok_until", fr.leading_ok_until ? json(*fr.leading_ok_until) : json(nullptr)},
           {"sign_change_found", fr.sign_change_found},
           {"asymptotically_favorable", fr.asymptotically_favorable},
           {"n1_bound", paper_n1_bound(sp.m1, sp.m2, sp.M)},
           {"n1_bound_formula", "max{ (m2 + m1 M m2^M)^2 / (2 (m1^2 - 2) m2^(2M)) + 1/2, 1 }"},
           {"samples", samples}};
    if (paper) {
        json checks = json::array();
        for (const auto& c : paper->checks) checks.push_back({{"rule", c.rule}, {"satisfied", c.satisfied}});
        j["paper_rule"] = {{"s", sp.s}, {"n1_bound", paper->n1_bound}, {"checks", checks},
                           {"all_rules_hold", paper->all_rules_hold}};
    } else {
        j["paper_rule"] = nullptr;
    }
    j["hash"] = config_hash(j);
    return j;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir, Streams io) {
    return guarded(io, [&] {
        auto t0 = Clock::now();
        ScenarioConfig c = parse_scenario(load_json_file(config_path));
        const std::string hash = config_hash(c.raw);
        ensure_dir(out_dir);
        RunSetup setup = setup_run(c);

        json runs = json::array();
        bool blew_up = false;
        for (std::size_t i = 0; i < c.initials.size(); ++i) {
            Trajectory tr = integrate_segmented(setup.rhs, c.initials[i], 0.0, c.horizon, setup.breakpoints,
                                                c.integrator, {}, setup.names);
            std::string name = c.initials.size() == 1 ? c.output.csv : indexed_name(c.output.csv, i);
            write_text_file(join_path(out_dir, name), trajectory_csv(c, setup, tr, hash));
            json r = status_json(tr.status);
            r["index"] = i;
            r["t_end"] = tr.t_end();
            r["accepted_steps"] = tr.step_stats.accepted;
            r["rejected_steps"] = tr.step_stats.rejected;
            r["csv"] = name;
            runs.push_back(r);
            blew_up |= tr.blew_up();

            io.out << "run " << i << ": " << status_name(tr.status);
            if (const auto* b = std::get_if<BlowUp>(&tr.status)) io.out << " t_lower=" << format_double(b->t_lower);
            io.out << " t_end=" << format_double(tr.t_end()) << "\n";
        }

        json manifest{{"tool", "riccati-ct"},
                      {"tool_version", kToolVersion},
                      {"command", "simulate"},
                      {"config_hash", hash},
                      {"seed", c.seed},
                      {"system", system_name(c.system)},
                      {"wall_clock_seconds", seconds_since(t0)},
                      {"runs", runs},
                      {"config", c.raw}};
        write_text_file(join_path(out_dir, c.output.manifest), manifest.dump(2));
        return blew_up ? kExitBlowUp : kExitOk;
    });
}

int cmd_sweep(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
              const std::string& out_dir, Streams io) {
    return guarded(io, [&] {
        auto t0 = Clock::now();
        if (config_path.has_value() == preset.has_value())
            throw ConfigError("sweep needs exactly one of <config.json> or --preset");
        SweepConfig c = parse_sweep(preset ? preset_config(*preset) : load_json_file(*config_path));
        const std::string hash = config_hash(c.raw);
        ensure_dir(out_dir);

        auto cells = sweep(c.grid, c.A_values, c.params, c.horizon, c.integrator, c.classifier);
        std::ostringstream os;
        CsvWriter w(os, hash,
                    {"rho0", "d0", "A", "label", "sign_changes", "final_distance", "t_lower", "energy_drift",
                     "rho_max", "d_max", "eq_rho", "eq_d", "status"});
        std::map<std::string, std::size_t> counts;
        for (const auto& cell : cells) {
            const auto& b = cell.behavior;
            ++counts[behavior_name(b.label)];
            w.cell(cell.rho0).cell(cell.d0).cell(cell.A).cell(behavior_name(b.label));
            w.cell(static_cast<long long>(b.sign_changes)).cell(b.final_distance);
            w.cell(b.t_lower ? format_double(*b.t_lower) : std::string());
            w.cell(b.energy_drift).cell(b.rho_max).cell(b.d_max);
            w.cell(b.equilibrium ? format_double(b.equilibrium->rho) : std::string());
            w.cell(b.equilibrium ? format_double(b.equilibrium->d) : std::string());
            w.cell(status_name(b.status));
            w.end_row();
        }
        write_text_file(join_path(out_dir, c.output.csv), os.str());

        json manifest{{"tool", "riccati-ct"},
                      {"tool_version", kToolVersion},
                      {"command", "sweep"},
                      {"config_hash", hash},
                      {"seed", c.seed},
                      {"preset", c.preset},
                      {"wall_clock_seconds", seconds_since(t0)},
                      {"cells", cells.size()},
                      {"labels", counts},
                      {"csv", c.output.csv},
                      {"config", c.raw}};
        write_text_file(join_path(out_dir, c.output.manifest), manifest.dump(2));

        io.out << cells.size() << " cells";
        for (const auto& [label, n] : counts) io.out << ", " << label << " " << n;
        io.out << "\n";
        return kExitOk;
    });
}

int cmd_certify(const CertifyArgs& args, Streams io) {
    return guarded(io, [&] {
        if (args.paper_rule_s && args.params) throw ConfigError("--paper-rule and --params are exclusive");
        if (!(args.x_max > 0.0)) throw ConfigError("--xmax must be positive");
        SurfaceParams sp;
        std::optional<PaperParamsReport> paper;
        std::string mode = "params";
        if (args.paper_rule_s) {
            paper = paper_params(*args.paper_rule_s, {}, args.x_max);
            sp = paper->params;
            mode = "paper-rule";
        } else if (args.params) {
            auto v = parse_number_list(*args.params, "--params");
            if (v.size() != 7) throw ConfigError("--params expects m1,m2,M,n1,n2,N,s (7 numbers)");
            sp = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
        }
        sp.validate();
        FeasibilityReport fr = paper ? paper->feasibility : certified_horizon(sp, args.x_max);
        emit_json(certify_report(sp, fr, mode, paper), args.out_file, io);
        return std::holds_alternative<verdict::InfeasibleAtZero>(fr.verdict) ? kExitInfeasible : kExitOk;
    });
}

int cmd_verify(const VerifyArgs& args, Streams io) {
    return guarded(io, [&] {
        auto t0 = Clock::now();
        auto it = suites().find(args.suite);
        if (it == suites().end())
            throw ConfigError("unknown suite '" + args.suite + "' (comparison, invariance, expblowup, riesz, conservation)");
        const Suite& suite = it->second;

        json report{{"schema", "riccati-ct.verify/1"}, {"tool_version", kToolVersion}, {"suite", args.suite}};
        json violations = json::array();
        if (args.replay) {
            json prev = load_json_file(*args.replay);
            if (!prev.is_object() || !prev.contains("violations") || !prev["violations"].is_array())
                throw ConfigError(*args.replay + ": not a verify report");
            if (prev.value("suite", std::string()) != args.suite)
                throw ConfigError(*args.replay + ": report is for suite '" + prev.value("suite", std::string()) + "'");
            for (const auto& item : prev["violations"])
                if (auto still = suite.replay(item)) violations.push_back(*still);
            report["replayed_from"] = *args.replay;
            report["replayed"] = prev["violations"].size();
        } else {
            std::size_t count = args.count.value_or(suite.default_count);
            auto res = suite.run(args.seed, count);
            violations = res.violations;
            report["seed"] = args.seed;
            report["count"] = count;
            report["summary"] = res.summary;
        }
        report["passed"] = violations.empty();
        report["violation_count"] = violations.size();
        report["violations"] = violations;
        report["hash"] = config_hash(report);
        report["wall_clock_seconds"] = seconds_since(t0);
        emit_json(report, args.out_file, io);
        return violations.empty() ? kExitOk : kExitConfig;
    });
}

int cmd_riesz(const RieszArgs& args, Streams io) {
    return guarded(io, [&] {
        DensityConfig c = parse_density(load_json_file(args.density_path));
        auto at = parse_number_list(args.at, "--at");
        if (at.size() != 2) throw ConfigError("--at expects x1,x2");
        Vec2 x{at[0], at[1]};
        json out{{"schema", "riccati-ct.riesz/1"},
                 {"tool_version", kToolVersion},
                 {"density_hash", config_hash(c.raw)},
                 {"x", at},
                 {"rho", c.density(x)},
                 {"which", args.which}};
        if (args.which == "matrix") {
            auto R = riesz_matrix(c.density, x, c.quadrature);
            out["matrix"] = {{R[0][0], R[0][1]}, {R[1][0], R[1][1]}};
            out["trace_residual"] = std::abs(R[0][0] + R[1][1] - c.density(x));
        } else if (args.which == "f1" || args.which == "f2") {
            auto est = riesz_pv_estimate(c.density, x, args.which == "f1" ? RieszWhich::F1 : RieszWhich::F2, c.k,
                                         c.quadrature);
            out["k"] = c.k;
            out["value"] = est.value;
            out["relative_change"] = est.change;
            out["refinements"] = est.refinements;
            out["tail_bound"] = est.tail_bound;
        } else {
            throw ConfigError("--which must be f1, f2 or matrix");
        }
        emit_json(out, args.out_file, io);
        return kExitOk;
    });
}

int run(int argc, char** argv, Streams io) {
    CLI::App app{"Riccati-type characteristic dynamics: simulation, classification and certificates", "riccati-ct"};
    app.set_version_flag("--version", std::string("riccati-ct ") + kToolVersion);
    app.require_subcommand(1);

    std::string sim_config, sim_out = ".";
    auto* sim = app.add_subcommand("simulate", "integrate a scenario and write trajectory CSV + manifest");
    sim->add_option("config", sim_config, "scenario JSON")->required();
    sim->add_option("--out", sim_out, "output directory");

    std::string sweep_config, sweep_preset, sweep_out = ".";
    auto* sw = app.add_subcommand("sweep", "classify a grid of initial points");
    auto* sw_cfg = sw->add_option("config", sweep_config, "sweep JSON");
    auto* sw_pre = sw->add_option("--preset", sweep_preset, "fig1-top | fig1-mid | fig1-bottom");
    sw_cfg->excludes(sw_pre);
    sw->add_option("--out", sweep_out, "output directory");

    CertifyArgs cert;
    double paper_s = 0.0;
    std::string params_text, cert_out;
    auto* ce = app.add_subcommand("certify", "transversality certificate for a surface family");
    auto* ce_rule = ce->add_option("--paper-rule", paper_s, "use the parameter rules for this s");
    auto* ce_params = ce->add_option("--params", params_text, "m1,m2,M,n1,n2,N,s");
    ce_rule->excludes(ce_params);
    ce->add_option("--xmax", cert.x_max, "scan bound");
    auto* ce_out = ce->add_option("--out", cert_out, "write the report here instead of stdout");

    VerifyArgs ver;
    std::size_t ver_count = 0;
    std::string ver_replay, ver_out;
    auto* ve = app.add_subcommand("verify", "randomized property checks");
    ve->add_option("suite", ver.suite, "comparison | invariance | expblowup | riesz | conservation")->required();
    ve->add_option("--seed", ver.seed, "base seed");
    auto* ve_count = ve->add_option("--count", ver_count, "samples");
    auto* ve_replay = ve->add_option("--replay", ver_replay, "re-run the violations listed in a report");
    auto* ve_out = ve->add_option("--out", ver_out, "write the report here instead of stdout");

    RieszArgs rz;
    std::string rz_out;
    auto* ri = app.add_subcommand("riesz", "Riesz transform of a Gaussian-mixture density at a point");
    ri->add_option("density", rz.density_path, "density JSON")->required();
    ri->add_option("--at", rz.at, "x1,x2")->required();
    ri->add_option("--which", rz.which, "f1 | f2 | matrix");
    auto* ri_out = ri->add_option("--out", rz_out, "write the result here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, io.out, io.err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, io);
    if (sw->parsed()) {
        std::optional<std::string> cfg, pre;
        if (sw_cfg->count()) cfg = sweep_config;
        if (sw_pre->count()) pre = sweep_preset;
        return cmd_sweep(cfg, pre, sweep_out, io);
    }
    if (ce->parsed()) {
        if (ce_rule->count()) cert.paper_rule_s = paper_s;
        if (ce_params->count()) cert.params = params_text;
        if (ce_out->count()) cert.out_file = cert_out;
        return cmd_certify(cert, io);
    }
    if (ve->parsed()) {
        if (ve_count->count()) ver.count = ver_count;
        if (ve_replay->count()) ver.replay = ver_replay;
        if (ve_out->count()) ver.out_file = ver_out;
        return cmd_verify(ver, io);
    }
    if (ri->parsed()) {
        if (ri_out->count()) rz.out_file = rz_out;
        return cmd_riesz(rz, io);
    }
    return kExitConfig;
}

}  // namespace rct::cli

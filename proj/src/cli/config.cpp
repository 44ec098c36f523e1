#include "rct/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rct/cli/presets.hpp"
#include "rct/error.hpp"

namespace rct::cli {

void fail_at(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line:column
        std::size_t line = 1, col = 1;
        std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        auto pos = what.find("parse error");
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          (pos == std::string::npos ? what : what.substr(pos)));
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

Fields::Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_at(path_, "expected an object");
}

bool Fields::has(const std::string& key) const { return j_.contains(key); }

const json* Fields::child(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
}

double Fields::number(const std::string& key) {
    const json* v = child(key);
    if (!v) fail_at(path_of(key), "missing required field");
    if (!v->is_number()) fail_at(path_of(key), "expected a number");
    double d = v->get<double>();
    if (!std::isfinite(d)) fail_at(path_of(key), "expected a finite number");
    return d;
}

double Fields::number(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

std::optional<double> Fields::opt_number(const std::string& key) {
    if (!has(key)) {
        used_.insert(key);
        return std::nullopt;
    }
    return number(key);
}

long long Fields::integer(const std::string& key, long long fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail_at(path_of(key), "expected an integer");
    return v->get<long long>();
}

std::uint64_t Fields::seed(const std::string& key, std::uint64_t fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        fail_at(path_of(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

std::string Fields::string(const std::string& key) {
    const json* v = child(key);
    if (!v) fail_at(path_of(key), "missing required field");
    if (!v->is_string()) fail_at(path_of(key), "expected a string");
    return v->get<std::string>();
}

std::string Fields::string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : (used_.insert(key), fallback);
}

bool Fields::boolean(const std::string& key, bool fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail_at(path_of(key), "expected true or false");
    return v->get<bool>();
}

std::vector<double> Fields::numbers(const std::string& key) {
    const json* v = child(key);
    if (!v) fail_at(path_of(key), "missing required field");
    if (!v->is_array()) fail_at(path_of(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        if (!e.is_number() || !std::isfinite(e.get<double>()))
            fail_at(path_of(key) + "/" + std::to_string(i), "expected a finite number");
        out.push_back(e.get<double>());
    }
    return out;
}

void Fields::finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
        if (!used_.count(it.key())) fail_at(path_of(it.key()), "unknown key");
}

std::string system_name(System s) {
    switch (s) {
        case System::Closed: return "closed";
        case System::Spectral: return "spectral";
        case System::AuxPoly: return "aux_poly";
        case System::AuxExp: return "aux_exp";
    }
    return "?";
}

namespace {

// Library precondition failures surface as config errors at the given path.
template <class F>
auto checked(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const rct::Error& e) {
        fail_at(path, e.what());
    }
}

System parse_system(const std::string& s, const std::string& path) {
    if (s == "closed") return System::Closed;
    if (s == "spectral") return System::Spectral;
    if (s == "aux_poly") return System::AuxPoly;
    if (s == "aux_exp") return System::AuxExp;
    fail_at(path, "unknown system '" + s + "' (closed, spectral, aux_poly, aux_exp)");
}

OutputPaths parse_output(const json* j, const std::string& path, OutputPaths defaults) {
    if (!j) return defaults;
    Fields f(*j, path);
    defaults.csv = f.string("csv", defaults.csv);
    defaults.manifest = f.string("manifest", defaults.manifest);
    f.finish();
    return defaults;
}

std::vector<double> parse_initial(const json& j, const std::string& path, System sys) {
    Fields f(j, path);
    std::vector<double> y;
    switch (sys) {
        case System::Closed:
            y = {f.number("rho"), f.number("d")};
            if (!(y[0] > 0.0)) fail_at(f.path_of("rho"), "density must be positive");
            break;
        case System::Spectral:
            y = {f.number("rho"), f.number("d"), f.number("omega", 0.0), f.number("eta", 0.0), f.number("xi", 0.0)};
            if (!(y[0] > 0.0)) fail_at(f.path_of("rho"), "density must be positive");
            break;
        case System::AuxPoly:
            y = {f.number("a"), f.number("b"), f.number("B", 1.0)};
            if (!(y[0] > 0.0)) fail_at(f.path_of("a"), "a must be positive");
            if (!(y[2] > 0.0)) fail_at(f.path_of("B"), "B must be positive");
            break;
        case System::AuxExp:
            y = {f.number("a"), f.number("b")};
            if (!(y[0] > 0.0)) fail_at(f.path_of("a"), "a must be positive");
            break;
    }
    f.finish();
    return y;
}

Axis parse_axis(const json& j, const std::string& path) {
    Fields f(j, path);
    Axis a;
    if (f.has("values")) {
        a.list = f.numbers("values");
    } else {
        a.lo = f.number("lo");
        a.hi = f.number("hi");
        a.step = f.number("step");
        if (!(a.step > 0.0)) fail_at(f.path_of("step"), "step must be positive");
        if (!(a.hi >= a.lo)) fail_at(f.path_of("hi"), "hi must be >= lo");
    }
    f.finish();
    return a;
}

}  // namespace

Params parse_params(const json& j, const std::string& path) {
    Fields f(j, path);
    Params p;
    p.k = f.number("k", p.k);
    p.c_b = f.number("c_b", p.c_b);
    p.s = f.number("s", p.s);
    p.alpha = f.number("alpha", p.alpha);
    p.beta = f.number("beta", p.beta);
    f.finish();
    checked(path, [&] {
        p.validate();
        return 0;
    });
    return p;
}

IntegratorConfig parse_integrator(const json& j, const std::string& path) {
    Fields f(j, path);
    IntegratorConfig c;
    c.rtol = f.number("rtol", c.rtol);
    c.atol = f.number("atol", c.atol);
    if (auto ms = f.opt_number("max_step")) c.max_step = *ms;
    c.min_step = f.number("min_step", c.min_step);
    c.blowup_magnitude = f.number("blowup_magnitude", c.blowup_magnitude);
    long long steps = f.integer("max_steps", static_cast<long long>(c.max_steps));
    if (steps <= 0) fail_at(f.path_of("max_steps"), "must be positive");
    c.max_steps = static_cast<decltype(c.max_steps)>(steps);
    f.finish();
    checked(path, [&] {
        c.validate();
        return 0;
    });
    return c;
}

ForcingSignal parse_forcing(const json& j, const std::string& path) {
    if (j.is_number()) return checked(path, [&] { return ForcingSignal::constant(j.get<double>()); });
    Fields f(j, path);
    std::string type = f.string("type");
    std::optional<double> cap = f.opt_number("cap");
    forcing::Shape shape;
    if (type == "constant") {
        shape = forcing::Constant{f.number("value")};
    } else if (type == "poly_floor") {
        shape = forcing::PolyFloor{f.number("alpha", 1.0), f.number("beta", 1.0), f.number("s", 1.0)};
    } else if (type == "exp_floor") {
        shape = forcing::ExpFloor{f.number("alpha", 1.0), f.number("beta", 1.0)};
    } else if (type == "piecewise") {
        shape = forcing::Piecewise{f.numbers("breakpoints"), f.numbers("values")};
    } else if (type == "tabulated") {
        shape = forcing::Tabulated{f.numbers("times"), f.numbers("values")};
    } else {
        fail_at(f.path_of("type"), "unknown forcing type '" + type +
                                       "' (constant, poly_floor, exp_floor, piecewise, tabulated)");
    }
    f.finish();
    return checked(path, [&] { return ForcingSignal(shape, cap); });
}

ScenarioConfig parse_scenario(const json& j) {
    ScenarioConfig c;
    c.raw = j;
    Fields f(j, "");
    c.system = parse_system(f.string("system"), "/system");
    if (const json* p = f.child("params")) c.params = parse_params(*p, "/params");

    if (c.system == System::Closed) {
        const json* a = f.child("forcing");
        if (!a) fail_at("/forcing", "missing required field");
        c.forcing = parse_forcing(*a, "/forcing");
    }
    if (c.system == System::Spectral) {
        if (const json* f1 = f.child("f1")) c.f.f1 = parse_forcing(*f1, "/f1");
        if (const json* f2 = f.child("f2")) c.f.f2 = parse_forcing(*f2, "/f2");
    }

    const json* init = f.child("initial");
    if (!init) fail_at("/initial", "missing required field");
    if (init->is_array()) {
        if (init->empty()) fail_at("/initial", "needs at least one state");
        for (std::size_t i = 0; i < init->size(); ++i)
            c.initials.push_back(parse_initial((*init)[i], "/initial/" + std::to_string(i), c.system));
    } else {
        c.initials.push_back(parse_initial(*init, "/initial", c.system));
    }

    if (const json* ic = f.child("integrator")) c.integrator = parse_integrator(*ic, "/integrator");
    c.horizon = f.number("horizon");
    if (!(c.horizon > 0.0)) fail_at("/horizon", "must be positive");
    c.seed = f.seed("seed", 0);
    c.output = parse_output(f.child("output"), "/output", c.output);
    f.finish();
    return c;
}

SweepConfig parse_sweep(const json& j_in) {
    json j = j_in;
    // a preset supplies defaults; explicit keys override
    if (j.is_object() && j.contains("preset")) {
        if (!j["preset"].is_string()) fail_at("/preset", "expected a string");
        json base = preset_config(j["preset"].get<std::string>());
        base.merge_patch(j);
        // an axis given in full replaces the preset axis instead of merging into it
        if (j.contains("grid") && j["grid"].is_object())
            for (const char* axis : {"rho", "d"})
                if (j["grid"].contains(axis)) base["grid"][axis] = j["grid"][axis];
        j = base;
    }
    SweepConfig c;
    c.raw = j;
    Fields f(j, "");
    c.preset = f.string("preset", "");
    if (const json* p = f.child("params")) c.params = parse_params(*p, "/params");
    if (const json* g = f.child("grid")) {
        Fields gf(*g, "/grid");
        if (const json* r = gf.child("rho")) c.grid.rho = parse_axis(*r, "/grid/rho");
        if (const json* d = gf.child("d")) c.grid.d = parse_axis(*d, "/grid/d");
        gf.finish();
    }
    for (double r : c.grid.rho.values())
        if (!(r > 0.0)) fail_at("/grid/rho", "grid touches rho <= 0");
    c.A_values = f.numbers("A_values");
    c.horizon = f.number("horizon", c.horizon);
    if (!(c.horizon > 0.0)) fail_at("/horizon", "must be positive");
    if (const json* ic = f.child("integrator")) c.integrator = parse_integrator(*ic, "/integrator");
    if (const json* cc = f.child("classifier")) {
        Fields cf(*cc, "/classifier");
        c.classifier.delta = cf.number("delta", c.classifier.delta);
        c.classifier.tail_fraction = cf.number("tail_fraction", c.classifier.tail_fraction);
        c.classifier.min_sign_changes = static_cast<int>(cf.integer("min_sign_changes", c.classifier.min_sign_changes));
        c.classifier.drift_tol = cf.number("drift_tol", c.classifier.drift_tol);
        cf.finish();
        if (!(c.classifier.delta > 0.0)) fail_at("/classifier/delta", "must be positive");
        if (!(c.classifier.tail_fraction > 0.0 && c.classifier.tail_fraction <= 1.0))
            fail_at("/classifier/tail_fraction", "must be in (0, 1]");
    }
    c.seed = f.seed("seed", 0);
    c.output = parse_output(f.child("output"), "/output", c.output);
    f.finish();
    return c;
}

DensityConfig parse_density(const json& j) {
    DensityConfig c;
    c.raw = j;
    Fields f(j, "");
    const json* comps = f.child("components");
    if (!comps || !comps->is_array()) fail_at("/components", "expected an array of bumps");
    for (std::size_t i = 0; i < comps->size(); ++i) {
        std::string p = "/components/" + std::to_string(i);
        Fields b((*comps)[i], p);
        auto center = b.numbers("center");
        if (center.size() != 2) fail_at(b.path_of("center"), "expected [x, y]");
        GaussianBump g{{center[0], center[1]}, b.number("mass"), b.number("sigma")};
        b.finish();
        if (!(g.mass > 0.0)) fail_at(p + "/mass", "must be positive");
        if (!(g.sigma > 0.0)) fail_at(p + "/sigma", "must be positive");
        c.density.components.push_back(g);
    }
    c.density.background = f.number("background", 0.0);
    if (!(c.density.background >= 0.0)) fail_at("/background", "must be >= 0");
    c.k = f.number("k", 1.0);
    if (const json* q = f.child("quadrature")) {
        Fields qf(*q, "/quadrature");
        c.quadrature.n_theta = static_cast<int>(qf.integer("n_theta", c.quadrature.n_theta));
        c.quadrature.panels = static_cast<int>(qf.integer("panels", c.quadrature.panels));
        c.quadrature.r_out = qf.number("r_out", c.quadrature.r_out);
        c.quadrature.eps = qf.number("eps", c.quadrature.eps);
        c.quadrature.richardson = qf.boolean("richardson", c.quadrature.richardson);
        c.quadrature.max_refinements = static_cast<int>(qf.integer("max_refinements", c.quadrature.max_refinements));
        c.quadrature.rel_tol = qf.number("rel_tol", c.quadrature.rel_tol);
        qf.finish();
        checked("/quadrature", [&] {
            c.quadrature.validate();
            return 0;
        });
    }
    f.finish();
    return c;
}

}  // namespace rct::cli

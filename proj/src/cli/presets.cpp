#include "rct/cli/presets.hpp"

#include "rct/cli/config.hpp"

namespace rct::cli {

namespace {

nlohmann::json bundle(const std::string& name, double k, double c_b, std::vector<double> A) {
    return {
        {"preset", name},
        {"params", {{"k", k}, {"c_b", c_b}}},
        {"grid", {{"rho", {{"lo", 0.5}, {"hi", 5.0}, {"step", 0.5}}}, {"d", {{"lo", -3.0}, {"hi", 3.0}, {"step", 0.5}}}}},
        {"A_values", A},
        {"horizon", 20.0},
        {"seed", 0},
    };
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig1-top", "fig1-mid", "fig1-bottom"}; }

nlohmann::json preset_config(const std::string& name) {
    // attractive with background, attractive without, repulsive without
    if (name == "fig1-top") return bundle(name, -1.0, 1.0, {0.0, 0.2});
    if (name == "fig1-mid") return bundle(name, -1.0, 0.0, {1.0});
    if (name == "fig1-bottom") return bundle(name, 1.0, 0.0, {-1.0});
    throw ConfigError("unknown preset '" + name + "' (fig1-top, fig1-mid, fig1-bottom)");
}

}  // namespace rct::cli

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rct/comparison.hpp"
#include "rct/dynamics.hpp"
#include "rct/integrate.hpp"
#include "rct/riesz.hpp"

namespace rct::cli {

using json = nlohmann::json;

/// Bad or inconsistent configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses JSON text; syntax errors report source:line:column.
json parse_json_text(const std::string& text, const std::string& source);
json load_json_file(const std::string& path);

/// Typed access to one JSON object. Every key read is remembered; finish()
/// rejects anything left over.
class Fields {
public:
    Fields(const json& j, std::string path);

    bool has(const std::string& key) const;
    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::optional<double> opt_number(const std::string& key);
    long long integer(const std::string& key, long long fallback);
    std::uint64_t seed(const std::string& key, std::uint64_t fallback);
    std::string string(const std::string& key);
    std::string string(const std::string& key, const std::string& fallback);
    bool boolean(const std::string& key, bool fallback);
    std::vector<double> numbers(const std::string& key);
    /// Raw child; nullptr when absent.
    const json* child(const std::string& key);
    std::string path_of(const std::string& key) const { return path_ + "/" + key; }

    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

[[noreturn]] void fail_at(const std::string& path, const std::string& what);

enum class System { Closed, Spectral, AuxPoly, AuxExp };

std::string system_name(System s);

struct OutputPaths {
    std::string csv;
    std::string manifest;
};

struct ScenarioConfig {
    System system = System::Closed;
    Params params;
    ForcingSignal forcing;  ///< A(t) for the closed system
    PrescribedF f;          ///< spectral forcings
    std::vector<std::vector<double>> initials;
    IntegratorConfig integrator;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    OutputPaths output{"trajectory.csv", "manifest.json"};
    json raw;
};

struct SweepConfig {
    std::string preset;
    Params params;
    SweepGrid grid;
    std::vector<double> A_values;
    double horizon = 20.0;
    IntegratorConfig integrator;
    ClassifierConfig classifier;
    std::uint64_t seed = 0;
    OutputPaths output{"sweep.csv", "manifest.json"};
    json raw;
};

struct DensityConfig {
    DensityField density;
    QuadratureConfig quadrature;
    double k = 1.0;
    json raw;
};

Params parse_params(const json& j, const std::string& path);
IntegratorConfig parse_integrator(const json& j, const std::string& path);
ForcingSignal parse_forcing(const json& j, const std::string& path);

/// Validates everything a run needs; throws ConfigError.
ScenarioConfig parse_scenario(const json& j);
SweepConfig parse_sweep(const json& j);
DensityConfig parse_density(const json& j);

}  // namespace rct::cli

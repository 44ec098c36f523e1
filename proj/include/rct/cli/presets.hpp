#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace rct::cli {

/// Named sweep bundles for the three phase-plane figures.
std::vector<std::string> preset_names();

/// Full sweep configuration of a preset; throws ConfigError for unknown names.
nlohmann::json preset_config(const std::string& name);

}  // namespace rct::cli

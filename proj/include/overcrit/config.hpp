#pragma once

#include "overcrit/experiments.hpp"

#include <filesystem>
#include <string>

namespace overcrit {

// Top-level JSON configuration: {"model": {...}, "profile": {...}, "evolution": {...},
// "sweep": {...}}. Every section is optional and falls back to the reference defaults.
struct RunConfig {
    TwoBandModel model = TwoBandModel::reference();
    BumpProfile profile;
    EvolutionConfig evolution;
    SweepSpec sweep;
};

// Throws nlohmann::json::parse_error for malformed text and Error for bad values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

} // namespace overcrit

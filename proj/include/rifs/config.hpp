#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rifs/experiments.hpp"

namespace rifs {

/// Configuration files are JSON objects. A file either names a preset
///
///   {"preset": "sinai", "a": 0.5, "eps1": 0.1}
///   {"preset": "arratia", "theta": 4}
///
/// or spells out the "ifs", "measure" and "error" sections. The optional
/// sections "run", "estimators" and "sweep" apply to both forms. Unknown
/// keys are errors; every problem found is reported in one ConfigError.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text);

/// Canonical JSON tree; parse_config_text(serialize_config(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

/// SHA-256 (hex) of the canonical serialization.
std::string config_digest(const ExperimentConfig& cfg);

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string started_at;   // ISO 8601, UTC
    std::string finished_at;
    std::vector<std::string> outputs;
    bool success = false;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// Current UTC time as ISO 8601 with second resolution.
std::string utc_timestamp();

std::string tool_version();

} // namespace rifs

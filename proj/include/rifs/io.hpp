#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rifs/estimators.hpp"
#include "rifs/experiments.hpp"
#include "rifs/fourier.hpp"
#include "rifs/projection.hpp"

namespace rifs {

inline constexpr int kReportSchemaVersion = 1;

enum class BatchFormat { csv, binary };

/// Writes the values (one per line under a "value" header, or the compact
/// binary layout "RIFSBAT1", u64 count, little-endian doubles) and a JSON
/// side-car `<path>.json` with seeds, depth and tail bound.
void write_batch(const SampleBatch& batch, const std::filesystem::path& path, BatchFormat format = BatchFormat::csv);

/// Reads either layout (binary detected by its magic). A CSV may carry one
/// header line; every other line holds one number.
std::vector<double> read_batch_values(const std::filesystem::path& path);

nlohmann::json batch_metadata(const SampleBatch& batch);

/// "r,C" or "delta,N" rows.
std::string curve_csv(const DimensionEstimate& estimate);
std::string support_csv(std::span<const SupportPoint> curve);
std::string energy_csv(std::span<const EnergyEstimate> curve);
std::string transversality_csv(const TransversalityResult& result);

nlohmann::json estimate_to_json(const DimensionEstimate& estimate, bool with_curve = false);
nlohmann::json report_to_json(const ExperimentReport& report);
nlohmann::json sweep_to_json(const SweepResult& result);

/// One row per replica.
std::string report_csv(const ExperimentReport& report);
/// One row per grid point.
std::string sweep_csv(const SweepResult& result);

/// Pretty JSON with a trailing newline; no clock-dependent fields.
std::string dump_json(const nlohmann::json& value);

/// Writes via a temporary file and a rename; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace rifs

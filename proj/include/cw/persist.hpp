#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cw/experiments.hpp"

namespace cw::harness {

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// rates.csv contents: experiment,d,n,metric,estimate,stderr,replicas,seed
std::string csv_text(const metrics::RateReport& report);

/// Hex fingerprint of the canonical config echo together with the CSV contents.
std::string report_fingerprint(const ExperimentConfig& cfg, const std::string& csv);

nlohmann::json report_json(const ExperimentResult& result);
nlohmann::json manifest_json(const ExperimentResult& result, double total_seconds);

struct WrittenFiles {
  std::filesystem::path csv;
  std::filesystem::path report;
  std::filesystem::path manifest;
};

/// Sets result.report.fingerprint and writes rates.csv, report.json and manifest.json into dir.
WrittenFiles write_outputs(ExperimentResult& result, const std::filesystem::path& dir, double total_seconds);

}  // namespace cw::harness

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cw::harness {

enum class ExperimentKind { theorem1, theorem2, moments, kernel_diag };

std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::theorem1;
  std::size_t n = 2;
  /// Matrix widths d; for kernel-diag these are the cell counts m.
  std::vector<std::size_t> d_list;
  /// Chaos orders: one value for every row, or one per row.
  std::vector<int> orders{1};
  double hurst = 0.0;
  std::size_t replicas = 0;
  std::size_t grid_ratio = 8;
  std::size_t directions = 128;
  std::size_t quantile_grid = 4096;
  std::size_t bootstrap = 32;
  std::size_t block_dim = 1;
  /// kernel-diag: "projected", "matched" or "both".
  std::string grid = "both";
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  /// Execution only; never part of the fingerprint.
  unsigned workers = 1;

  /// Orders expanded to one per row.
  std::vector<int> row_orders() const;
};

/// Throws ConfigError on any invariant violation.
void validate(const ExperimentConfig& cfg);

/// Canonical JSON echo (excludes workers and out_dir).
nlohmann::json to_json(const ExperimentConfig& cfg);

/// key -> value settings, keys as the CLI flag names (without dashes).
using Settings = std::map<std::string, std::string>;

/// Flat `key = value` file; '#' starts a comment.
Settings read_settings_file(const std::filesystem::path& path);
/// A manifest.json (its "config" object) or a flat JSON object of settings.
Settings read_settings_json(const std::filesystem::path& path);
/// Either of the above, chosen by content.
Settings read_settings(const std::filesystem::path& path);

/// Applies settings on top of cfg; unknown keys and malformed values throw ConfigError.
void apply_settings(ExperimentConfig& cfg, const Settings& settings);

std::vector<std::size_t> parse_size_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace cw::harness

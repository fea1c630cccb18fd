#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cw::harness {

inline constexpr int kCriterionCount = 10;

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  unsigned workers = 1;
  /// Scratch directory for criteria that write run outputs.
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "chaoswishart-acceptance";
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<std::string> details;
  double seconds = 0.0;
};

std::string criterion_title(int id);
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// One line: "[PASS] 5 title: detail; detail (12.3 s)".
std::string format_result(const CriterionResult& r);

}  // namespace cw::harness

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cw/config.hpp"
#include "cw/metrics.hpp"

namespace cw::harness {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kRngName = "philox4x32-10/box-muller/v1";

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  metrics::RateReport report;
  std::vector<Check> checks;
  std::vector<StageTiming> stages;
  nlohmann::json substreams;
  std::vector<std::string> warnings;
};

ExperimentResult run_theorem1(const ExperimentConfig& cfg);
ExperimentResult run_theorem2(const ExperimentConfig& cfg);
ExperimentResult run_moments(const ExperimentConfig& cfg);
ExperimentResult run_kernel_diag(const ExperimentConfig& cfg);

/// Validates cfg and dispatches on its kind.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Expected squared-distance exponent of the Theorem 2 rates: 1 - 2H below
/// 3/4, 2H - 2 above; NaN at 3/4 where a log factor enters.
double theorem2_exponent(double h);

}  // namespace cw::harness

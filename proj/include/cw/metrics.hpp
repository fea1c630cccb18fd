#pragma once

// Empirical distances and estimators used by the rate experiments.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cw/random.hpp"

namespace cw::metrics {

inline constexpr std::size_t kDefaultQuantileGrid = 4096;
inline constexpr std::size_t kDefaultDirections = 128;

/// Replicas x dims samples, row-major.
class SampleSet {
 public:
  SampleSet(std::size_t dims, std::vector<double> data, std::string label = {}, std::uint64_t seed = 0);

  std::size_t dims() const noexcept { return dims_; }
  std::size_t replicas() const noexcept { return data_.size() / dims_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dims_, dims_}; }
  std::vector<double> column(std::size_t c) const;
  const std::string& label() const noexcept { return label_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t dims_;
  std::vector<double> data_;
  std::string label_;
  std::uint64_t seed_;
};

/// Exact W1 between two empirical laws on the line.
double w1_exact_1d(std::span<const double> a, std::span<const double> b);
double w1_exact_1d(const SampleSet& a, const SampleSet& b);

/// W1 between the empirical law of a and N(mean, var), on a uniform quantile
/// grid of `grid` midpoints clipped to [1/(2R), 1 - 1/(2R)].
double w1_gaussian_ref_1d(std::span<const double> a, double mean, double var,
                          std::size_t grid = kDefaultQuantileGrid);

struct SlicedOptions {
  std::size_t directions = kDefaultDirections;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;  // direction r uses substream (directions, index, r)
  unsigned workers = 1;
};

/// Mean over random unit directions of the exact 1-D W1 of the projections.
double sliced_w1(const SampleSet& a, const SampleSet& b, const SlicedOptions& options);

/// Sliced W1 against the centred Gaussian law with covariance `cov`: each
/// projection is compared with its exact normal marginal.
double sliced_w1_gaussian(const SampleSet& a, const Eigen::MatrixXd& cov, const SlicedOptions& options,
                          std::size_t grid = kDefaultQuantileGrid);

/// Unit direction r of a sliced estimate.
std::vector<double> sliced_direction(std::size_t dims, const SlicedOptions& options, std::size_t r);

struct Estimate {
  double estimate = 0.0;
  double stderr_est = 0.0;
};

/// p-th raw moment with its jackknife standard error.
Estimate moment_hat(std::span<const double> a, int p);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Weighted least squares of log y on log d, weights 1 / (stderr / y)^2. When
/// any stderr is zero the fit is unweighted and the slope error comes from the
/// residuals.
PowerFit fit_power_law(std::span<const double> ds, std::span<const double> ys, std::span<const double> stderrs);

/// Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const Eigen::MatrixXd& m);

struct RateRow {
  std::string experiment;
  std::size_t d = 0;
  std::size_t n = 0;
  std::string metric;
  double estimate = 0.0;
  double stderr_est = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
};

struct RateFit {
  std::string metric;
  PowerFit fit;
  std::size_t points = 0;
};

struct RateReport {
  std::vector<RateRow> rows;
  std::vector<RateFit> fits;
  std::string fingerprint;

  /// Fits log(estimate) against log(d) for every row of `metric`.
  const RateFit& fit_metric(const std::string& metric);
  const RateFit* find_fit(const std::string& metric) const;
};

}  // namespace cw::metrics

#pragma once

// Fractional Gaussian machinery: the fGn autocorrelation rho_H, the fBm
// covariance, and exact stationary Gaussian sampling by circulant embedding.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "cw/random.hpp"

namespace cw::fractional {

/// Hurst parameter in (0, 1).
class HurstParam {
 public:
  explicit HurstParam(double h);
  double value() const noexcept { return h_; }
  /// True when the Rosenblatt process is defined, i.e. H > 1/2.
  bool rosenblatt_valid() const noexcept { return h_ > 0.5; }
  /// Throws DomainError unless H > 1/2.
  void require_rosenblatt() const;

 private:
  double h_;
};

/// rho_H(k) = (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) / 2.
double rho(HurstParam h, long long k);

/// Cov(B^H_s, B^H_t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_cov(HurstParam h, double s, double t);

/// Exact sampler for a stationary Gaussian sequence of length n with a given
/// autocovariance r[0..n]. Uses the size-2n circulant embedding; when the
/// embedding has an eigenvalue below -1e-9 * max eigenvalue the sampler falls
/// back to a Cholesky factor of the n x n Toeplitz covariance.
///
/// The output is a fixed linear map of `noise_dim()` standard normals, so the
/// same noise vector always yields the same sequence.
class CirculantEmbedding {
 public:
  explicit CirculantEmbedding(std::vector<double> autocov);
  ~CirculantEmbedding();
  CirculantEmbedding(CirculantEmbedding&&) noexcept;
  CirculantEmbedding& operator=(CirculantEmbedding&&) noexcept;
  CirculantEmbedding(const CirculantEmbedding&) = delete;
  CirculantEmbedding& operator=(const CirculantEmbedding&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t noise_dim() const noexcept;
  bool uses_cholesky() const noexcept;
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  std::span<const double> autocovariance() const noexcept { return autocov_; }

  /// Maps `noise_dim()` standard normals to `size()` correlated values.
  void apply(std::span<const double> noise, std::span<double> out) const;
  std::vector<double> sample(Stream& stream) const;

 private:
  struct Impl;
  std::size_t n_;
  std::vector<double> autocov_;
  double min_eigenvalue_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

/// Unit-variance fGn: d increments of B^H on integer times.
std::vector<double> simulate_fgn(HurstParam h, std::size_t d, Stream& stream);

/// Cholesky-based fGn sampler (oracle for tests, d <= 2048).
std::vector<double> simulate_fgn_cholesky(HurstParam h, std::size_t d, Stream& stream);

}  // namespace cw::fractional

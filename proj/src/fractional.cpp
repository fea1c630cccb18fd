#include "cw/fractional.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include "cw/errors.hpp"

namespace cw::fractional {
namespace {

// The FFTW planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double abs_pow(double x, double p) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), p); }

std::vector<double> fgn_autocov(HurstParam h, std::size_t d) {
  std::vector<double> r(d + 1);
  for (std::size_t k = 0; k <= d; ++k) r[k] = rho(h, static_cast<long long>(k));
  return r;
}

}  // namespace

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw DomainError("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
  }
}

void HurstParam::require_rosenblatt() const {
  if (!rosenblatt_valid()) {
    throw DomainError("Rosenblatt quantities need H in (1/2, 1), got " + std::to_string(h_));
  }
}

double rho(HurstParam h, long long k) {
  const double x = static_cast<double>(k);
  const double two_h = 2.0 * h.value();
  return 0.5 * (abs_pow(x + 1.0, two_h) + abs_pow(x - 1.0, two_h) - 2.0 * abs_pow(x, two_h));
}

double fbm_cov(HurstParam h, double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0)) throw DomainError("fbm_cov: times must be non-negative");
  const double two_h = 2.0 * h.value();
  return 0.5 * (abs_pow(t, two_h) + abs_pow(s, two_h) - abs_pow(t - s, two_h));
}

struct CirculantEmbedding::Impl {
  // Circulant route.
  fftw_plan plan = nullptr;
  std::vector<double> scale;  // sqrt(lambda_k / N) or sqrt(lambda_k / 2N)
  // Cholesky route.
  Eigen::MatrixXd chol;
  bool cholesky = false;

  ~Impl() {
    if (plan != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

CirculantEmbedding::CirculantEmbedding(std::vector<double> autocov)
    : n_(autocov.empty() ? 0 : autocov.size() - 1), autocov_(std::move(autocov)), impl_(std::make_unique<Impl>()) {
  if (n_ == 0) throw DomainError("CirculantEmbedding: need autocovariance r[0..n] with n >= 1");
  for (double v : autocov_) {
    if (!std::isfinite(v)) throw DomainError("CirculantEmbedding: non-finite autocovariance");
  }
  const std::size_t big_n = 2 * n_;
  std::vector<double> row(big_n);
  for (std::size_t j = 0; j <= n_; ++j) row[j] = autocov_[j];
  for (std::size_t j = n_ + 1; j < big_n; ++j) row[j] = autocov_[big_n - j];

  std::vector<std::complex<double>> spectrum(n_ + 1);
  {
    std::lock_guard lock(planner_mutex());
    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(big_n), row.data(),
                                         reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
  }
  double max_eig = 0.0;
  min_eigenvalue_ = spectrum[0].real();
  for (const auto& s : spectrum) {
    max_eig = std::max(max_eig, s.real());
    min_eigenvalue_ = std::min(min_eigenvalue_, s.real());
  }

  if (min_eigenvalue_ < -1e-9 * std::max(max_eig, 1e-300)) {
    impl_->cholesky = true;
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = autocov_[static_cast<std::size_t>(std::abs(i - j))];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw DomainError("CirculantEmbedding: autocovariance is not positive definite");
    }
    impl_->chol = llt.matrixL();
    return;
  }

  impl_->scale.resize(n_ + 1);
  const double nn = static_cast<double>(big_n);
  for (std::size_t k = 0; k <= n_; ++k) {
    const double lambda = std::max(spectrum[k].real(), 0.0);
    const bool real_mode = (k == 0 || k == n_);
    impl_->scale[k] = std::sqrt(lambda / (real_mode ? nn : 2.0 * nn));
  }
  std::vector<std::complex<double>> in(n_ + 1);
  std::vector<double> out(big_n);
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_dft_c2r_1d(static_cast<int>(big_n), reinterpret_cast<fftw_complex*>(in.data()),
                                     out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

CirculantEmbedding::~CirculantEmbedding() = default;
CirculantEmbedding::CirculantEmbedding(CirculantEmbedding&&) noexcept = default;
CirculantEmbedding& CirculantEmbedding::operator=(CirculantEmbedding&&) noexcept = default;

std::size_t CirculantEmbedding::noise_dim() const noexcept { return impl_->cholesky ? n_ : 2 * n_; }

bool CirculantEmbedding::uses_cholesky() const noexcept { return impl_->cholesky; }

void CirculantEmbedding::apply(std::span<const double> noise, std::span<double> out) const {
  if (noise.size() != noise_dim()) throw DomainError("CirculantEmbedding::apply: noise dimension mismatch");
  if (out.size() != n_) throw DomainError("CirculantEmbedding::apply: output length mismatch");
  if (impl_->cholesky) {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::Map<const Eigen::VectorXd> z(noise.data(), n);
    Eigen::Map<Eigen::VectorXd> y(out.data(), n);
    y.noalias() = impl_->chol.triangularView<Eigen::Lower>() * z;
    return;
  }
  // Hermitian-symmetric spectral weights; noise layout: [w_0, w_n, re_1, im_1, ...].
  std::vector<std::complex<double>> w(n_ + 1);
  std::vector<double> full(2 * n_);
  const auto& s = impl_->scale;
  w[0] = {s[0] * noise[0], 0.0};
  w[n_] = {s[n_] * noise[1], 0.0};
  for (std::size_t k = 1; k < n_; ++k) w[k] = {s[k] * noise[2 * k], s[k] * noise[2 * k + 1]};
  fftw_execute_dft_c2r(impl_->plan, reinterpret_cast<fftw_complex*>(w.data()), full.data());
  std::copy_n(full.begin(), n_, out.begin());
}

std::vector<double> CirculantEmbedding::sample(Stream& stream) const {
  const auto noise = stream.normals(noise_dim());
  std::vector<double> out(n_);
  apply(noise, out);
  return out;
}

std::vector<double> simulate_fgn(HurstParam h, std::size_t d, Stream& stream) {
  if (d == 0) throw DomainError("simulate_fgn: d must be positive");
  const CirculantEmbedding embedding(fgn_autocov(h, d));
  return embedding.sample(stream);
}

std::vector<double> simulate_fgn_cholesky(HurstParam h, std::size_t d, Stream& stream) {
  if (d == 0) throw DomainError("simulate_fgn_cholesky: d must be positive");
  if (d > 2048) throw DomainError("simulate_fgn_cholesky: oracle limited to d <= 2048");
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = rho(h, std::abs(i - j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw DomainError("simulate_fgn_cholesky: covariance not positive definite");
  const auto z = stream.normals(d);
  Eigen::VectorXd y = llt.matrixL() * Eigen::Map<const Eigen::VectorXd>(z.data(), n);
  return {y.data(), y.data() + n};
}

}  // namespace cw::fractional

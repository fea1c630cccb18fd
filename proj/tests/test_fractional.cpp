#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cw/errors.hpp"
#include "cw/fractional.hpp"
#include "cw/parallel.hpp"
#include "cw/random.hpp"

using namespace cw;
using namespace cw::fractional;

TEST_CASE("Hurst parameter range") {
  CHECK_THROWS_AS(HurstParam(0.0), DomainError);
  CHECK_THROWS_AS(HurstParam(1.0), DomainError);
  CHECK_THROWS_AS(HurstParam(std::nan("")), DomainError);
  CHECK_FALSE(HurstParam(0.5).rosenblatt_valid());
  CHECK(HurstParam(0.51).rosenblatt_valid());
  CHECK_THROWS_AS(HurstParam(0.3).require_rosenblatt(), DomainError);
}

TEST_CASE("rho examples") {
  CHECK(rho(HurstParam(0.5), 1) == doctest::Approx(0.0).scale(1.0));
  CHECK(rho(HurstParam(0.75), 0) == 1.0);
  CHECK(rho(HurstParam(0.75), 1) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(rho(HurstParam(0.75), -3) == rho(HurstParam(0.75), 3));
  // Long-range decay rho(k) ~ H(2H-1) k^{2H-2}.
  const double h = 0.8;
  const long long k = 100000;
  CHECK(rho(HurstParam(h), k) == doctest::Approx(h * (2 * h - 1) * std::pow(k, 2 * h - 2)).epsilon(1e-4));
}

TEST_CASE("fBm covariance") {
  const HurstParam h(0.7);
  CHECK(fbm_cov(h, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(fbm_cov(h, 0.3, 0.8) == doctest::Approx(0.5 * (std::pow(0.3, 1.4) + std::pow(0.8, 1.4) - std::pow(0.5, 1.4))));
  CHECK(fbm_cov(h, 0.0, 0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(fbm_cov(h, -0.1, 0.5), DomainError);
}

TEST_CASE("circulant embedding factor reproduces the Toeplitz covariance") {
  for (double hv : {0.3, 0.6, 0.9, 0.99}) {
    const HurstParam h(hv);
    const std::size_t n = 24;
    std::vector<double> r(n + 1);
    for (std::size_t k = 0; k <= n; ++k) r[k] = rho(h, static_cast<long long>(k));
    const CirculantEmbedding emb(r);
    CHECK_FALSE(emb.uses_cholesky());
    CHECK(emb.min_eigenvalue() > 0.0);
    // Columns of the linear map noise -> output.
    std::vector<std::vector<double>> cols;
    std::vector<double> unit(emb.noise_dim(), 0.0), out(n);
    for (std::size_t c = 0; c < emb.noise_dim(); ++c) {
      unit[c] = 1.0;
      emb.apply(unit, out);
      unit[c] = 0.0;
      cols.push_back(out);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double cov = 0.0;
        for (const auto& col : cols) cov += col[i] * col[j];
        CHECK(cov == doctest::Approx(r[i > j ? i - j : j - i]).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("circulant embedding falls back to Cholesky for a non-embeddable sequence") {
  // A positive definite covariance whose minimal circulant extension is indefinite.
  std::vector<double> r{1.0, 0.02, 0.63, -0.5, 0.0};
  CirculantEmbedding emb(r);
  CHECK(emb.uses_cholesky());
  CHECK(emb.noise_dim() == 4);
  std::vector<double> unit(4, 0.0), out(4);
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < 4; ++c) {
    unit[c] = 1.0;
    emb.apply(unit, out);
    unit[c] = 0.0;
    cols.push_back(out);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double cov = 0.0;
      for (const auto& col : cols) cov += col[i] * col[j];
      CHECK(cov == doctest::Approx(r[i > j ? i - j : j - i]).scale(1.0));
    }
  }
}

TEST_CASE("circulant embedding rejects bad input") {
  CHECK_THROWS_AS(CirculantEmbedding(std::vector<double>{1.0}), DomainError);
  CHECK_THROWS_AS(CirculantEmbedding(std::vector<double>{1.0, 2.0, 1.0}), DomainError);
  CirculantEmbedding emb(std::vector<double>{1.0, 0.5, 0.25});
  std::vector<double> noise(3), out(2);
  CHECK_THROWS_AS(emb.apply(noise, out), DomainError);
}

TEST_CASE("fGn samplers agree with the correlation function") {
  const HurstParam h(0.75);
  const std::size_t d = 32, reps = 20000;
  std::vector<double> lag1_fft(reps), lag1_chol(reps), var_fft(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream s1(11, r), s2(12, r);
    const auto a = simulate_fgn(h, d, s1);
    const auto b = simulate_fgn_cholesky(h, d, s2);
    double l1 = 0.0, l2 = 0.0, v = 0.0;
    for (std::size_t j = 0; j + 1 < d; ++j) {
      l1 += a[j] * a[j + 1];
      l2 += b[j] * b[j + 1];
    }
    for (double x : a) v += x * x;
    lag1_fft[r] = l1 / (d - 1);
    lag1_chol[r] = l2 / (d - 1);
    var_fft[r] = v / d;
  }
  const auto f = mean_and_stderr(lag1_fft);
  const auto c = mean_and_stderr(lag1_chol);
  const auto v = mean_and_stderr(var_fft);
  const double target = rho(h, 1);
  CHECK(std::abs(f.mean - target) < 5 * f.se);
  CHECK(std::abs(c.mean - target) < 5 * c.se);
  CHECK(std::abs(v.mean - 1.0) < 5 * v.se);
  CHECK_THROWS_AS(simulate_fgn_cholesky(h, 4096, *std::make_unique<Stream>(1, 1)), DomainError);
}

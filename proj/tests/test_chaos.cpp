#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cw/chaos.hpp"
#include "cw/errors.hpp"
#include "cw/parallel.hpp"
#include "cw/random.hpp"

using namespace cw;
using namespace cw::chaos;

namespace {

// E[xi^k] for a standard normal.
double gaussian_moment(int k) {
  if (k % 2) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 0; j -= 2) m *= j;
  return m;
}

// Polynomial product and Gaussian expectation, coefficients in increasing degree.
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}
double poly_expect(const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * gaussian_moment(static_cast<int>(k));
  return s;
}

// H_n from the defining formula (-1)^n / n! e^{x^2/2} d^n/dx^n e^{-x^2/2}: the
// derivative is He_n(x) e^{-x^2/2}, with He_n built by He_{n+1} = x He_n - He_n'.
std::vector<double> he_poly(int n) {
  std::vector<double> p{1.0};
  for (int k = 0; k < n; ++k) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) next[i + 1] += p[i];
    for (std::size_t i = 1; i < p.size(); ++i) next[i - 1] -= static_cast<double>(i) * p[i];
    p = next;
  }
  return p;
}

std::vector<double> random_vec(Stream& s, std::size_t n, double scale = 1.0) {
  auto v = s.normals(n);
  for (double& x : v) x *= scale;
  return v;
}

}  // namespace

TEST_CASE("hermite examples") {
  CHECK(hermite(0, 7.3) == 1.0);
  for (double x : {-2.0, 0.0, 5.0}) CHECK(hermite(1, x) == x);
  CHECK(hermite(2, 0.0) == -0.5);
  CHECK_THROWS_AS(hermite(65, 0.0), DomainError);
  CHECK_THROWS_AS(hermite(-1, 0.0), DomainError);
}

TEST_CASE("hermite matches the derivative definition") {
  for (int n = 0; n <= 12; ++n) {
    const auto p = he_poly(n);
    const double nf = std::tgamma(n + 1.0);
    for (double x : {-3.1, -0.7, 0.0, 0.4, 2.5}) {
      double v = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) v += p[k] * std::pow(x, static_cast<double>(k));
      CHECK(hermite(n, x) == doctest::Approx(v / nf).epsilon(1e-12).scale(1.0 / nf));
    }
  }
  // Second derivative of e^{-x^2/2} by central differences at x = 0.8.
  const double x = 0.8, h = 1e-4;
  auto g = [](double t) { return std::exp(-t * t / 2); };
  const double d2 = (g(x + h) - 2 * g(x) + g(x - h)) / (h * h);
  CHECK(hermite(2, x) == doctest::Approx(d2 / (2 * g(x))).epsilon(1e-6));
}

TEST_CASE("hermite three-term recurrence") {
  for (int n = 1; n < 30; ++n) {
    for (double x = -10.0; x <= 10.0; x += 0.5) {
      const double lhs = (n + 1) * hermite(n + 1, x);
      const double rhs = x * hermite(n, x) - hermite(n - 1, x);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(x * hermite(n, x)) + std::abs(hermite(n - 1, x))));
    }
  }
}

TEST_CASE("tensor construction validates input") {
  CHECK_THROWS_AS(ChaosTensor(2, 3, std::vector<double>(8)), DomainError);
  CHECK_THROWS_AS(ChaosTensor(1, 2, {1.0, std::nan("")}), DomainError);
  CHECK(ChaosTensor(2, 3).flagged_symmetric());
}

TEST_CASE("symmetrize") {
  Stream s(1, 1);
  SUBCASE("symmetric input is unchanged") {
    const auto f = symmetrize(ChaosTensor(3, 4, random_vec(s, 64)));
    const auto g = symmetrize(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.coeffs()[i] == doctest::Approx(f.coeffs()[i]).epsilon(1e-14));
    CHECK(g.is_symmetric());
  }
  SUBCASE("two-permutation average") {
    std::vector<double> c(9, 0.0);
    c[1 * 3 + 2] = 1.0;
    const auto f = symmetrize(ChaosTensor(2, 3, c));
    const std::size_t i12[] = {1, 2}, i21[] = {2, 1};
    CHECK(f.at(i12) == 0.5);
    CHECK(f.at(i21) == 0.5);
    CHECK(f.flagged_symmetric());
  }
  SUBCASE("norm does not grow") {
    for (int t = 0; t < 100; ++t) {
      const int q = 1 + t % 3;
      const auto f = ChaosTensor(q, 4, random_vec(s, static_cast<std::size_t>(std::pow(4, q))));
      CHECK(symmetrize(f).norm() <= f.norm() * (1 + 1e-14));
    }
  }
}

TEST_CASE("contraction examples") {
  const std::size_t e11[] = {0, 0};
  const auto f = ChaosTensor::basis_product(3, e11);
  SUBCASE("r = 0 is the tensor product") {
    Stream s(2, 2);
    const auto a = ChaosTensor(1, 3, random_vec(s, 3));
    const auto b = ChaosTensor(2, 3, random_vec(s, 9));
    const auto c = contract(a, b, 0);
    const auto o = ChaosTensor::outer(a, b);
    REQUIRE(c.order() == 3);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.coeffs()[i] == o.coeffs()[i]);
  }
  SUBCASE("e1 x e1 contractions") {
    const auto c1 = contract(f, f, 1);
    CHECK(c1.order() == 2);
    CHECK(c1.at(e11) == 1.0);
    CHECK(c1.norm() == 1.0);
    const auto c2 = contract(f, f, 2);
    CHECK(c2.order() == 0);
    CHECK(c2.coeffs()[0] == 1.0);
  }
  SUBCASE("brute-force oracle") {
    Stream s(3, 3);
    const std::size_t m = 3;
    const auto a = ChaosTensor(3, m, random_vec(s, 27));
    const auto b = ChaosTensor(2, m, random_vec(s, 9));
    const auto c = contract(a, b, 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          double acc = 0.0;
          for (std::size_t l = 0; l < m; ++l) acc += a.coeffs()[(i * m + j) * m + l] * b.coeffs()[k * m + l];
          CHECK(c.coeffs()[(i * m + j) * m + k] == doctest::Approx(acc).epsilon(1e-14));
        }
      }
    }
  }
  SUBCASE("disjoint support gives an exact zero") {
    const std::size_t e22[] = {2, 2};
    const auto g = ChaosTensor::basis_product(4, e22);
    const std::size_t e00[] = {0, 1};
    const auto h = symmetrize(ChaosTensor::basis_product(4, e00));
    const auto c = contract(h, g, 1);
    for (double v : c.coeffs()) CHECK(v == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(contract(f, f, 3), DomainError);
    CHECK_THROWS_AS(contract(f, ChaosTensor(2, 4), 1), DomainError);
    CHECK_THROWS_AS(contract(f, f, -1), DomainError);
  }
  SUBCASE("contraction bound") {
    Stream s(4, 4);
    for (int t = 0; t < 60; ++t) {
      const int p = 1 + t % 3, q = 1 + (t / 3) % 3;
      const auto a = symmetrize(ChaosTensor(p, 4, random_vec(s, static_cast<std::size_t>(std::pow(4, p)))));
      const auto b = symmetrize(ChaosTensor(q, 4, random_vec(s, static_cast<std::size_t>(std::pow(4, q)))));
      for (int r = 0; r <= std::min(p, q); ++r) CHECK(contract(a, b, r).norm() <= a.norm() * b.norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("uz_independent examples") {
  const std::size_t e11[] = {0, 0}, e12[] = {0, 1}, e33[] = {2, 2}, e44[] = {3, 3};
  const auto f = ChaosTensor::basis_product(4, e11);
  CHECK_FALSE(uz_independent(f, f));
  CHECK(uz_independent(symmetrize(ChaosTensor::basis_product(4, e12)), ChaosTensor::basis_product(4, e33)));
  CHECK(uz_independent(ChaosTensor::basis_product(4, e33), ChaosTensor::basis_product(4, e44), 0.0));
}

TEST_CASE("order-1 and order-2 samplers") {
  Stream s(5, 5);
  const auto noise = GaussianNoise::draw(s, 4);
  CHECK(sample_I1(ChaosTensor(1, 4), noise) == 0.0);
  const std::size_t i1[] = {1};
  CHECK(sample_I1(ChaosTensor::basis_product(4, i1), noise) == noise.values[1]);
  CHECK(sample_I2(ChaosTensor(2, 4), noise) == 0.0);
  std::vector<double> a(16, 0.0);
  a[0 * 4 + 1] = a[1 * 4 + 0] = 0.5;
  CHECK(sample_I2(ChaosTensor(2, 4, a), noise) == doctest::Approx(noise.values[0] * noise.values[1]));
  const std::size_t i00[] = {0, 0};
  CHECK(sample_I2(ChaosTensor::basis_product(4, i00), noise) ==
        doctest::Approx(noise.values[0] * noise.values[0] - 1.0));
  std::vector<double> asym(16, 0.0);
  asym[1] = 1.0;
  CHECK_THROWS_AS(sample_I2(ChaosTensor(2, 4, asym), noise), DomainError);
  CHECK_THROWS_AS(sample_I1(ChaosTensor(1, 3), noise), DomainError);
}

TEST_CASE("sampler variances follow the isometry") {
  const std::size_t reps = 100000;
  const auto h = ChaosTensor::vector({1.0, 1.0, 0.0});  // |h|^2 = 2
  std::vector<double> a(9, 0.0);
  a[1] = a[3] = 0.5;
  const auto pair = ChaosTensor(2, 3, a);  // xi_0 xi_1, variance 1
  const std::size_t i00[] = {0, 0};
  const auto e11 = ChaosTensor::basis_product(3, i00);  // variance 2
  std::vector<double> v1(reps), v2(reps), v3(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Stream s(6, r);
    const auto noise = GaussianNoise::draw(s, 3);
    v1[r] = sample_I1(h, noise);
    v2[r] = sample_I2(pair, noise);
    v3[r] = sample_I2(e11, noise);
  }
  auto var = [](std::vector<double> v) {
    for (double& x : v) x *= x;
    return mean_and_stderr(v).mean;
  };
  CHECK(var(v1) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(var(v2) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(var(v3) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("rank-one chaos") {
  Stream s(7, 7);
  const auto noise = GaussianNoise::draw(s, 3);
  const auto h = ChaosTensor::vector({0.6, 0.0, 0.8});
  const double xi = 0.6 * noise.values[0] + 0.8 * noise.values[2];
  CHECK(sample_rank_one_chaos(1, h, noise) == doctest::Approx(sample_I1(h, noise)));
  CHECK(sample_rank_one_chaos(2, h, noise) == doctest::Approx(xi * xi - 1.0));
  CHECK(sample_rank_one_chaos(3, h, noise) == doctest::Approx(xi * xi * xi - 3 * xi));
  CHECK(unit_rank_one_chaos(3, xi) == doctest::Approx((xi * xi * xi - 3 * xi) / std::sqrt(6.0)));
  CHECK_THROWS_AS(sample_rank_one_chaos(2, ChaosTensor(1, 3), noise), DomainError);
  // Order 2 agrees with I_2 of the symmetric kernel h x h.
  const auto hh = ChaosTensor::tensor_power(h, 2);
  CHECK(sample_rank_one_chaos(2, h, noise) == doctest::Approx(sample_I2(hh, noise)));
}

TEST_CASE("m4 of rank-one chaos against a moment-expansion oracle") {
  for (int q = 1; q <= 8; ++q) {
    auto he = he_poly(q);
    const double var = std::tgamma(q + 1.0);  // E He_q^2 = q!
    const auto p2 = poly_mul(he, he);
    const double m4 = poly_expect(poly_mul(p2, p2)) / (var * var);
    CHECK(m4_of_rank_one_chaos(q) == doctest::Approx(m4).epsilon(1e-10));
  }
  CHECK(m4_of_rank_one_chaos(1) == doctest::Approx(3.0));
  CHECK(m4_of_rank_one_chaos(2) == doctest::Approx(15.0));
  CHECK(m4_of_rank_one_chaos(3) == doctest::Approx(93.0));
  CHECK_THROWS_AS(m4_of_rank_one_chaos(0), DomainError);
  CHECK_THROWS_AS(m4_of_rank_one_chaos(13), DomainError);
}

TEST_CASE("order-3 fourth moment by Monte Carlo") {
  const std::size_t reps = 1000000;
  std::vector<double> x4(reps);
  Stream s(8, 8);
  for (auto& v : x4) {
    const double x = unit_rank_one_chaos(3, s.normal());
    v = x * x * x * x;
  }
  CHECK(mean_and_stderr(x4).mean == doctest::Approx(93.0).epsilon(0.03));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cw/chaos.hpp"
#include "cw/errors.hpp"
#include "cw/parallel.hpp"
#include "cw/random.hpp"
#include "cw/wishart.hpp"

using namespace cw;
using namespace cw::wishart;

namespace {

EntryMatrix from_values(std::size_t n, std::size_t d, std::vector<double> v) {
  EntryMatrix x;
  x.n = n;
  x.d = d;
  x.entries = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), n, d);
  x.orders.assign(n, 1);
  return x;
}

}  // namespace

TEST_CASE("build_wishart examples") {
  CHECK(build_wishart(from_values(1, 1, {2.0})).w(0, 0) == 3.0);
  const double r = std::sqrt(2.0);
  CHECK(build_wishart(from_values(2, 2, {r, 0, 0, r})).w.norm() < 1e-15);

  // Integer matrix against explicit sums.
  const std::vector<double> v{3, -1, 4, 1, -5, 9, 2, -6, 5, 3, 5, -8, 9, 7, 9};
  const auto w = build_wishart(from_values(3, 5, v));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += v[i * 5 + k] * v[j * 5 + k];
      CHECK(w.w(i, j) == s / 5.0 - (i == j ? 1.0 : 0.0));
    }
  }
  CHECK(w.renorm == Renorm::none);
  CHECK(w.source_n == 3);
  CHECK(w.source_d == 5);
}

TEST_CASE("renormalisation") {
  const auto w = build_wishart(from_values(2, 2, {1, 2, 3, 4}));
  const auto c = renormalize(w, RenormMode::clt());
  CHECK(c.renorm == Renorm::clt);
  CHECK(renorm_factor(RenormMode::clt(), 100) == 10.0);
  CHECK((c.w - std::sqrt(2.0) * w.w).norm() < 1e-14);
  CHECK_THROWS_AS(renormalize(c, RenormMode::clt()), DomainError);
  CHECK(renorm_factor(RenormMode::rosenblatt(HurstParam(0.75)), 16) == doctest::Approx(0.757770).epsilon(1e-5));
  const auto rr = renormalize(w, RenormMode::rosenblatt(HurstParam(0.75)));
  CHECK(rr.h == 0.75);
  CHECK_THROWS_AS(renormalize(rr, RenormMode::rosenblatt(HurstParam(0.75))), DomainError);
}

TEST_CASE("half vectors") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 3;
  CHECK(half_vector(m) == std::vector<double>{1, 2, 3});
  CHECK(half_vector(Eigen::MatrixXd::Identity(3, 3)) == std::vector<double>{1, 0, 0, 1, 0, 1});
  for (std::size_t n = 1; n <= 8; ++n) {
    Stream s(31, n);
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = s.normal();
    const Eigen::MatrixXd sym = a + a.transpose();
    const auto hv = half_vector(sym);
    CHECK(hv.size() == n * (n + 1) / 2);
    CHECK(from_half_vector(hv) == sym);
  }
  m(0, 1) = 2.5;
  CHECK_THROWS_AS(half_vector(m), DomainError);
  CHECK_THROWS_AS(from_half_vector(std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("independent entries: Gaussian rows") {
  const std::vector<int> orders(4, 1);
  std::vector<double> sq;
  for (std::size_t r = 0; r < 1000; ++r) {
    Stream s(32, r);
    const auto x = gen_independent_entries(orders, 250, s);
    CHECK(x.regime == Regime::independent_chaos);
    for (Eigen::Index i = 0; i < x.entries.size(); ++i) sq.push_back(x.entries.data()[i] * x.entries.data()[i]);
  }
  CHECK(sq.size() == 1000000);
  CHECK(mean_and_stderr(sq).mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("independent entries: second-order rows") {
  for (std::size_t b : {1u, 3u}) {
    const std::vector<int> orders(2, 2);
    std::vector<double> p2, p4;
    for (std::size_t r = 0; r < 2000; ++r) {
      Stream s(33, r);
      const auto x = gen_independent_entries(orders, 100, s, b);
      for (Eigen::Index i = 0; i < x.entries.size(); ++i) {
        const double v = x.entries.data()[i];
        p2.push_back(v * v);
        p4.push_back(v * v * v * v);
      }
    }
    CHECK(mean_and_stderr(p2).mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(mean_and_stderr(p4).mean == doctest::Approx(chaos::m4_of_rank_one_chaos(2)).epsilon(0.03));
  }
  Stream s(33, 0);
  CHECK_THROWS_AS(gen_independent_entries(std::vector<int>{13}, 4, s), DomainError);
  CHECK_THROWS_AS(gen_independent_entries(std::vector<int>{0}, 4, s), DomainError);
}

TEST_CASE("independent entries have disjoint kernels") {
  const std::size_t n = 2, d = 3, b = 2;
  const std::size_t dim = independent_basis_dim(n, d, b);
  CHECK(dim == n * d * b);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto f = chaos::ChaosTensor::tensor_power(chaos::ChaosTensor::vector(independent_entry_direction(n, d, b, i, j)), 2);
      const auto g = chaos::ChaosTensor::tensor_power(
          chaos::ChaosTensor::vector(independent_entry_direction(n, d, b, (i + 1) % n, j)), 3);
      const auto c = chaos::contract(f, g, 1);
      double mx = 0.0;
      for (double v : c.coeffs()) mx = std::max(mx, std::abs(v));
      CHECK(mx == 0.0);
      CHECK(chaos::uz_independent(f, g, 0.0));
    }
  }
}

TEST_CASE("mixed orders warn") {
  Stream s(34, 0);
  const auto x = gen_independent_entries(std::vector<int>{1, 2}, 4, s);
  CHECK(x.warnings.size() == 1);
  Stream s2(34, 1);
  CHECK(gen_independent_entries(std::vector<int>{2, 2}, 4, s2).warnings.empty());
}

TEST_CASE("independent regime Wishart moments") {
  for (int q : {1, 2, 3}) {
    const std::vector<int> orders(2, q);
    const std::size_t d = 64;
    std::vector<double> diag, off;
    for (std::size_t r = 0; r < 20000; ++r) {
      Stream s(35, r);
      const auto w = renormalize(build_wishart(gen_independent_entries(orders, d, s)), RenormMode::clt());
      diag.push_back(w.w(0, 0) * w.w(0, 0));
      off.push_back(w.w(0, 1) * w.w(0, 1));
    }
    const auto a = mean_and_stderr(diag), b = mean_and_stderr(off);
    CHECK(std::abs(a.mean - (chaos::m4_of_rank_one_chaos(q) - 1)) < 5 * a.se);
    CHECK(std::abs(b.mean - 1.0) < 5 * b.se);
  }
}

TEST_CASE("GOE sampler") {
  Stream s0(36, 0);
  const auto z0 = sample_goe(4, 3.0, s0);
  CHECK(z0 == z0.transpose());
  std::vector<double> dv, c;
  for (std::size_t r = 0; r < 100000; ++r) {
    Stream s(36, r + 1);
    const auto z = sample_goe(3, 3.0, s);
    dv.push_back(z(0, 0) * z(0, 0));
    c.push_back(z(0, 1) * z(0, 2));
  }
  CHECK(mean_and_stderr(dv).mean == doctest::Approx(2.0).epsilon(0.03));
  const auto e = mean_and_stderr(c);
  CHECK(std::abs(e.mean) < 5 * e.se);
  CHECK_THROWS_AS(sample_goe(3, 1.0, s0), DomainError);
}

TEST_CASE("correlated entries") {
  const HurstParam h(0.75);
  const std::size_t n = 2, d = 16;
  const auto grid = rosenblatt::build_path_grid(h, d, 8);
  std::vector<double> var, lag1, cross;
  for (std::size_t r = 0; r < 6000; ++r) {
    Stream s(37, r);
    std::vector<rosenblatt::RosenblattPath> paths;
    const auto x = gen_correlated_entries(h, n, d, grid, s, &paths);
    CHECK(x.regime == Regime::correlated_rosenblatt);
    CHECK(paths.size() == n);
    for (std::size_t j = 0; j < d; ++j) var.push_back(x.entries(0, j) * x.entries(0, j));
    for (std::size_t j = 0; j + 1 < d; ++j) lag1.push_back(x.entries(0, j) * x.entries(0, j + 1));
    for (std::size_t j = 0; j < d; ++j) cross.push_back(x.entries(0, j) * x.entries(1, j));
  }
  CHECK(mean_and_stderr(var).mean == doctest::Approx(1.0).epsilon(0.03));
  CHECK(mean_and_stderr(lag1).mean == doctest::Approx(std::sqrt(2.0) - 1).epsilon(0.05));
  const auto c = mean_and_stderr(cross);
  CHECK(std::abs(c.mean) < 5 * c.se);
}

TEST_CASE("Rosenblatt diagonal sampler") {
  const HurstParam h(0.7);
  const auto grid = rosenblatt::KernelGrid::build(h, 256, {1.0});
  std::vector<double> v, c;
  for (std::size_t r = 0; r < 20000; ++r) {
    Stream s(38, r);
    const auto m = sample_rosenblatt_diag(3, h, grid, s);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(2, 1) == 0.0);
    v.push_back(m(0, 0) * m(0, 0));
    c.push_back(m(0, 0) * m(1, 1));
  }
  CHECK(mean_and_stderr(v).mean == doctest::Approx(1.0).epsilon(0.03));
  const auto e = mean_and_stderr(c);
  CHECK(std::abs(e.mean) < 5 * e.se);
}

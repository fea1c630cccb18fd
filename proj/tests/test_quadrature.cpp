#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cw/quadrature.hpp"

using namespace cw;

TEST_CASE("Gauss-Legendre on [0,1] is exact for degree 2n-1") {
  for (std::size_t n : {1u, 3u, 8u, 16u}) {
    const auto r = quad::gauss_legendre(n);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], static_cast<double>(k));
      CHECK(s == doctest::Approx(1.0 / static_cast<double>(k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Hermite reproduces Gaussian moments") {
  const auto r = quad::gauss_hermite(32);
  double fact = 1.0;  // (2k-1)!!
  for (int k = 0; k <= 15; ++k) {
    if (k > 0) fact *= 2 * k - 1;
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 2 * k);
    CHECK(s == doctest::Approx(fact).epsilon(1e-10));
  }
}

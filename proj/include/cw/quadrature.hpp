#pragma once

#include <cstddef>
#include <vector>

namespace cw::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [0, 1] (weights sum to 1).
Rule gauss_legendre(std::size_t n);

/// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E f(N(0,1)).
Rule gauss_hermite(std::size_t n);

}  // namespace cw::quad

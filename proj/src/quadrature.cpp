#include "cw/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cw/errors.hpp"

namespace cw::quad {
namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the squared
// first eigenvector components times the total mass.
Rule golub_welsch(std::size_t n, double (*offdiag_sq)(std::size_t), double mass) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(offdiag_sq(k));
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    rule.nodes[i] = eig.eigenvalues()(col);
    const double v0 = eig.eigenvectors()(0, col);
    rule.weights[i] = mass * v0 * v0;
  }
  return rule;
}

}  // namespace

Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  Rule rule = golub_welsch(
      n, [](std::size_t k) { const double kk = static_cast<double>(k); return kk * kk / (4.0 * kk * kk - 1.0); },
      2.0);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
    rule.weights[i] *= 0.5;
  }
  return rule;
}

Rule gauss_hermite(std::size_t n) {
  if (n == 0) throw DomainError("gauss_hermite: need at least one node");
  return golub_welsch(n, [](std::size_t k) { return static_cast<double>(k); }, 1.0);
}

}  // namespace cw::quad

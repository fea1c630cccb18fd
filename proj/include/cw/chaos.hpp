#pragma once

// Finite-basis Wiener chaos algebra.
//
// Kernels f in the q-th symmetric tensor power of H are stored as dense
// coefficient arrays over an M-dimensional orthonormal basis {e_1..e_M}; the
// isonormal process restricted to that basis is a vector of M independent
// standard normals. Hermite polynomials use the 1/n! normalisation
//   H_n(x) = (-1)^n / n! * exp(x^2/2) d^n/dx^n exp(-x^2/2),
// i.e. H_n = He_n / n! where He_n are the probabilists' polynomials.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cw/random.hpp"

namespace cw::chaos {

inline constexpr int kMaxHermiteDegree = 64;
inline constexpr int kMaxRankOneOrder = 12;
/// Dense tensors above this many coefficients are refused (1 GiB of doubles).
inline constexpr std::size_t kMaxTensorCoefficients = std::size_t{1} << 27;

/// H_n(x) under the 1/n! normalisation, via (n+1) H_{n+1} = x H_n - H_{n-1}.
double hermite(int n, double x);

class ChaosTensor {
 public:
  /// Zero tensor of the given order over an M-dimensional basis.
  ChaosTensor(int order, std::size_t basis_dim);
  ChaosTensor(int order, std::size_t basis_dim, std::vector<double> coeffs);

  /// Order-1 tensor (a vector h in H).
  static ChaosTensor vector(std::vector<double> h);
  /// e_{i_1} x ... x e_{i_q} (zero-based indices).
  static ChaosTensor basis_product(std::size_t basis_dim, std::span<const std::size_t> indices);
  static ChaosTensor tensor_power(const ChaosTensor& h, int q);
  static ChaosTensor outer(const ChaosTensor& f, const ChaosTensor& g);

  int order() const noexcept { return order_; }
  std::size_t basis_dim() const noexcept { return basis_dim_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  /// True when produced by symmetrize() (or verified symmetric at construction).
  bool flagged_symmetric() const noexcept { return symmetric_; }

  double at(std::span<const std::size_t> index) const;
  double norm() const noexcept;
  double inner(const ChaosTensor& other) const;
  /// Checks invariance under all index permutations to `rel_tol * max|coeff|`.
  bool is_symmetric(double rel_tol = 1e-12) const;

 private:
  friend ChaosTensor symmetrize(const ChaosTensor& f);

  int order_;
  std::size_t basis_dim_;
  std::vector<double> coeffs_;
  bool symmetric_ = false;
};

/// Average over all q! index permutations.
ChaosTensor symmetrize(const ChaosTensor& f);

/// r-th contraction: sums the trailing r indices of f against those of g.
/// The result has order p + q - 2r; r = 0 is the tensor product.
ChaosTensor contract(const ChaosTensor& f, const ChaosTensor& g, int r);

/// Ustunel-Zakai criterion: I_p(f) and I_q(g) are independent iff f (x)_1 g = 0.
/// Returns ||f (x)_1 g|| <= tol * ||f|| * ||g||.
bool uz_independent(const ChaosTensor& f, const ChaosTensor& g, double tol = 1e-10);

struct GaussianNoise {
  std::vector<double> values;
  std::uint64_t stream_id = 0;

  std::size_t dim() const noexcept { return values.size(); }
  static GaussianNoise draw(Stream& stream, std::size_t dim);
};

/// I_1(h) = W(h).
double sample_I1(const ChaosTensor& h, const GaussianNoise& noise);
/// I_2(A) = xi^T A xi - trace(A); A must be symmetric.
double sample_I2(const ChaosTensor& a, const GaussianNoise& noise);
/// I_q(h^{(x)q}) = q! ||h||^q H_q(W(h) / ||h||).
double sample_rank_one_chaos(int q, const ChaosTensor& h, const GaussianNoise& noise);

/// sqrt(q!) H_q(x): the unit-variance rank-one chaos evaluated at W(h) = x for ||h|| = 1.
double unit_rank_one_chaos(int q, double x);

/// E[X^4] of the unit-variance rank-one chaos of order q (Gauss-Hermite, exact).
double m4_of_rank_one_chaos(int q);

}  // namespace cw::chaos

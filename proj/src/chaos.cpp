#include "cw/chaos.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cw/errors.hpp"
#include "cw/quadrature.hpp"

namespace cw::chaos {
namespace {

std::size_t checked_power(std::size_t base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && out > kMaxTensorCoefficients / base) {
      throw ResourceError("tensor of order " + std::to_string(exponent) + " over basis dim " +
                          std::to_string(base) + " exceeds the coefficient budget");
    }
    out *= base;
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Decodes a flat row-major offset into a multi-index.
void decode(std::size_t flat, std::size_t dim, std::span<std::size_t> idx) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    idx[k] = flat % dim;
    flat /= dim;
  }
}

std::size_t encode(std::span<const std::size_t> idx, std::size_t dim) {
  std::size_t flat = 0;
  for (std::size_t i : idx) flat = flat * dim + i;
  return flat;
}

}  // namespace

double hermite(int n, double x) {
  if (n < 0 || n > kMaxHermiteDegree) {
    throw DomainError("hermite: degree " + std::to_string(n) + " outside [0, 64]");
  }
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = (x * cur - prev) / (k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

ChaosTensor::ChaosTensor(int order, std::size_t basis_dim)
    : order_(order), basis_dim_(basis_dim) {
  if (order < 0) throw DomainError("ChaosTensor: negative order");
  if (basis_dim == 0) throw DomainError("ChaosTensor: basis dimension must be positive");
  coeffs_.assign(checked_power(basis_dim, order), 0.0);
  symmetric_ = true;
}

ChaosTensor::ChaosTensor(int order, std::size_t basis_dim, std::vector<double> coeffs)
    : order_(order), basis_dim_(basis_dim), coeffs_(std::move(coeffs)) {
  if (order < 0) throw DomainError("ChaosTensor: negative order");
  if (basis_dim == 0) throw DomainError("ChaosTensor: basis dimension must be positive");
  if (coeffs_.size() != checked_power(basis_dim, order)) {
    throw DomainError("ChaosTensor: coefficient count does not match basis_dim^order");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("ChaosTensor: non-finite coefficient");
  }
  symmetric_ = order_ <= 1;
}

ChaosTensor ChaosTensor::vector(std::vector<double> h) {
  const std::size_t m = h.size();
  return ChaosTensor(1, m, std::move(h));
}

ChaosTensor ChaosTensor::basis_product(std::size_t basis_dim, std::span<const std::size_t> indices) {
  ChaosTensor t(static_cast<int>(indices.size()), basis_dim);
  for (std::size_t i : indices) {
    if (i >= basis_dim) throw DomainError("basis_product: index out of range");
  }
  t.coeffs_[encode(indices, basis_dim)] = 1.0;
  t.symmetric_ = t.is_symmetric();
  return t;
}

ChaosTensor ChaosTensor::outer(const ChaosTensor& f, const ChaosTensor& g) {
  return contract(f, g, 0);
}

ChaosTensor ChaosTensor::tensor_power(const ChaosTensor& h, int q) {
  if (h.order() != 1) throw DomainError("tensor_power: expects an order-1 tensor");
  if (q < 1) throw DomainError("tensor_power: q must be positive");
  ChaosTensor out = h;
  for (int k = 1; k < q; ++k) out = outer(out, h);
  out.symmetric_ = true;
  return out;
}

double ChaosTensor::at(std::span<const std::size_t> index) const {
  if (index.size() != static_cast<std::size_t>(order_)) throw DomainError("at: index arity mismatch");
  for (std::size_t i : index) {
    if (i >= basis_dim_) throw DomainError("at: index out of range");
  }
  return coeffs_[encode(index, basis_dim_)];
}

double ChaosTensor::norm() const noexcept {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return std::sqrt(s);
}

double ChaosTensor::inner(const ChaosTensor& other) const {
  if (other.order_ != order_ || other.basis_dim_ != basis_dim_) {
    throw DomainError("inner: tensors of different shape");
  }
  return std::inner_product(coeffs_.begin(), coeffs_.end(), other.coeffs_.begin(), 0.0);
}

bool ChaosTensor::is_symmetric(double rel_tol) const {
  if (order_ <= 1) return true;
  double scale = 0.0;
  for (double c : coeffs_) scale = std::max(scale, std::abs(c));
  const double tol = rel_tol * scale;
  std::vector<std::size_t> idx(static_cast<std::size_t>(order_));
  std::vector<std::size_t> perm(idx.size());
  for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
    decode(flat, basis_dim_, idx);
    // Adjacent transpositions generate the symmetric group.
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      perm = idx;
      std::swap(perm[k], perm[k + 1]);
      if (std::abs(coeffs_[encode(perm, basis_dim_)] - coeffs_[flat]) > tol) return false;
    }
  }
  return true;
}

ChaosTensor symmetrize(const ChaosTensor& f) {
  ChaosTensor out(f.order_, f.basis_dim_);
  const auto q = static_cast<std::size_t>(f.order_);
  if (q <= 1) {
    out.coeffs_ = f.coeffs_;
    return out;
  }
  std::vector<std::size_t> idx(q);
  std::vector<std::size_t> order(q);
  std::vector<std::size_t> permuted(q);
  const double inv = 1.0 / factorial(f.order_);
  for (std::size_t flat = 0; flat < f.coeffs_.size(); ++flat) {
    decode(flat, f.basis_dim_, idx);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double acc = 0.0;
    do {
      for (std::size_t k = 0; k < q; ++k) permuted[k] = idx[order[k]];
      acc += f.coeffs_[encode(permuted, f.basis_dim_)];
    } while (std::next_permutation(order.begin(), order.end()));
    out.coeffs_[flat] = acc * inv;
  }
  out.symmetric_ = true;
  return out;
}

ChaosTensor contract(const ChaosTensor& f, const ChaosTensor& g, int r) {
  if (f.basis_dim() != g.basis_dim()) throw DomainError("contract: basis dimension mismatch");
  if (r < 0 || r > std::min(f.order(), g.order())) {
    throw DomainError("contract: r = " + std::to_string(r) + " outside [0, min(p, q)]");
  }
  const std::size_t m = f.basis_dim();
  const int out_order = f.order() + g.order() - 2 * r;
  const auto rows = static_cast<Eigen::Index>(checked_power(m, f.order() - r));
  const auto cols = static_cast<Eigen::Index>(checked_power(m, g.order() - r));
  const auto inner = static_cast<Eigen::Index>(checked_power(m, r));
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> fm(f.coeffs().data(), rows, inner);
  Eigen::Map<const RowMat> gm(g.coeffs().data(), cols, inner);
  std::vector<double> coeffs(checked_power(m, out_order));
  Eigen::Map<RowMat> out(coeffs.data(), rows, cols);
  out.noalias() = fm * gm.transpose();
  return ChaosTensor(out_order, m, std::move(coeffs));
}

bool uz_independent(const ChaosTensor& f, const ChaosTensor& g, double tol) {
  if (!(tol >= 0.0)) throw DomainError("uz_independent: tolerance must be non-negative");
  if (f.order() < 1 || g.order() < 1) throw DomainError("uz_independent: orders must be positive");
  const double c = contract(f, g, 1).norm();
  return c <= tol * f.norm() * g.norm();
}

GaussianNoise GaussianNoise::draw(Stream& stream, std::size_t dim) {
  GaussianNoise out;
  out.values = stream.normals(dim);
  out.stream_id = stream.id();
  return out;
}

double sample_I1(const ChaosTensor& h, const GaussianNoise& noise) {
  if (h.order() != 1) throw DomainError("sample_I1: expects an order-1 kernel");
  if (h.basis_dim() != noise.dim()) throw DomainError("sample_I1: dimension mismatch");
  const auto c = h.coeffs();
  return std::inner_product(c.begin(), c.end(), noise.values.begin(), 0.0);
}

double sample_I2(const ChaosTensor& a, const GaussianNoise& noise) {
  if (a.order() != 2) throw DomainError("sample_I2: expects an order-2 kernel");
  if (a.basis_dim() != noise.dim()) throw DomainError("sample_I2: dimension mismatch");
  if (!a.flagged_symmetric() && !a.is_symmetric()) {
    throw DomainError("sample_I2: kernel is not symmetric; symmetrize first");
  }
  const auto m = static_cast<Eigen::Index>(a.basis_dim());
  Eigen::Map<const Eigen::MatrixXd> am(a.coeffs().data(), m, m);
  Eigen::Map<const Eigen::VectorXd> xi(noise.values.data(), m);
  return xi.dot(am * xi) - am.trace();
}

double sample_rank_one_chaos(int q, const ChaosTensor& h, const GaussianNoise& noise) {
  if (q < 1 || q > kMaxHermiteDegree) throw DomainError("sample_rank_one_chaos: order out of range");
  const double nh = h.norm();
  if (!(nh > 0.0)) throw DomainError("sample_rank_one_chaos: zero kernel");
  const double w = sample_I1(h, noise);
  return factorial(q) * std::pow(nh, q) * hermite(q, w / nh);
}

double unit_rank_one_chaos(int q, double x) {
  return std::sqrt(factorial(q)) * hermite(q, x);
}

double m4_of_rank_one_chaos(int q) {
  if (q < 1 || q > kMaxRankOneOrder) {
    throw DomainError("m4_of_rank_one_chaos: order must lie in [1, 12]");
  }
  // X^4 has degree 4q <= 48; 64 nodes integrate degree <= 127 exactly.
  static const quad::Rule rule = quad::gauss_hermite(64);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = unit_rank_one_chaos(q, rule.nodes[i]);
    acc += rule.weights[i] * x * x * x * x;
  }
  return acc;
}

}  // namespace cw::chaos

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "cw/errors.hpp"
#include "cw/quadrature.hpp"
#include "cw/rosenblatt.hpp"

namespace cw::rosenblatt {
namespace detail {

class GridBackend {
 public:
  virtual ~GridBackend() = default;
  virtual std::size_t nodes_per_cell() const noexcept = 0;
  virtual std::size_t node_count() const noexcept = 0;
  virtual std::size_t noise_dim() const noexcept = 0;
  virtual void node_values(std::span<const double> noise, std::span<double> out) const = 0;
  virtual double node_gram(std::size_t i, std::size_t j) const = 0;
  virtual Eigen::MatrixXd node_gram_block(std::size_t begin, std::size_t end) const = 0;
  virtual double hs_norm_sq(std::size_t nodes) const = 0;
  virtual Eigen::MatrixXd dense_kernel(std::size_t nodes, std::size_t cap) const = 0;
  virtual std::size_t factor_bytes() const noexcept = 0;
};

namespace {

void check_dense_cap(std::size_t dim, std::size_t cap) {
  const double bytes = static_cast<double>(dim) * static_cast<double>(dim) * sizeof(double);
  if (bytes > static_cast<double>(cap)) {
    throw ResourceError("dense kernel of dimension " + std::to_string(dim) + " exceeds the memory cap");
  }
}

// Stationary rows with Gram col(|i - j|), col(k) = delta^H sqrt(rho_H(k) / 2).
class MatchedBackend final : public GridBackend {
 public:
  MatchedBackend(HurstParam h, std::size_t m) : col_(make_col(h, m)), embedding_(col_) {}

  std::size_t nodes_per_cell() const noexcept override { return 1; }
  std::size_t node_count() const noexcept override { return embedding_.size(); }
  std::size_t noise_dim() const noexcept override { return embedding_.noise_dim(); }

  void node_values(std::span<const double> noise, std::span<double> out) const override {
    embedding_.apply(noise, out);
  }

  double node_gram(std::size_t i, std::size_t j) const override { return col_[i > j ? i - j : j - i]; }

  Eigen::MatrixXd node_gram_block(std::size_t begin, std::size_t end) const override {
    const auto n = static_cast<Eigen::Index>(end - begin);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = col_[static_cast<std::size_t>(std::abs(i - j))];
    }
    return g;
  }

  double hs_norm_sq(std::size_t n) const override {
    double acc = static_cast<double>(n) * col_[0] * col_[0];
    for (std::size_t k = 1; k < n; ++k) acc += 2.0 * static_cast<double>(n - k) * col_[k] * col_[k];
    return acc;
  }

  Eigen::MatrixXd dense_kernel(std::size_t nodes, std::size_t cap) const override {
    const std::size_t dim = noise_dim();
    check_dense_cap(dim, cap);
    // Columns of the factor E (Y = E xi), restricted to the first `nodes` rows.
    Eigen::MatrixXd e(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(dim));
    std::vector<double> unit(dim, 0.0);
    std::vector<double> y(node_count());
    for (std::size_t c = 0; c < dim; ++c) {
      unit[c] = 1.0;
      embedding_.apply(unit, y);
      unit[c] = 0.0;
      for (std::size_t r = 0; r < nodes; ++r) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = y[r];
    }
    return e.transpose() * e;
  }

  std::size_t factor_bytes() const noexcept override { return (col_.size() + 2 * noise_dim()) * sizeof(double); }

 private:
  static std::vector<double> make_col(HurstParam h, std::size_t m) {
    const double delta_h = std::pow(1.0 / static_cast<double>(m), h.value());
    std::vector<double> col(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      col[k] = delta_h * std::sqrt(fractional::rho(h, static_cast<long long>(k)) / 2.0);
    }
    return col;
  }

  std::vector<double> col_;
  fractional::CirculantEmbedding embedding_;
};

constexpr std::size_t kMaxOriginLevels = 1900;  // 2^{-950} stays a normal double

// The squared kernel carries y^{-H} near the origin, so the innermost cell [0, e]
// holds a share of order (e m)^{1-H}; pick e with that share below 1e-6.
std::size_t auto_origin_levels(HurstParam h) {
  const double levels = std::ceil(2.0 * std::log2(1e6) / (1.0 - h.value()));
  return static_cast<std::size_t>(std::clamp(levels, 8.0, static_cast<double>(kMaxOriginLevels)));
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows sqrt(d(H) w_u) <dK(u, .), e_j> on the orthonormal cell basis e_j = 1_{cell j} / sqrt|cell j|.
class ProjectedBackend final : public GridBackend {
 public:
  ProjectedBackend(HurstParam h, std::size_t m, const KernelGridOptions& opt)
      : m_(m), per_cell_(opt.nodes_per_cell) {
    if (per_cell_ == 0 || per_cell_ > 16) throw DomainError("kernel grid: nodes_per_cell must be in [1, 16]");
    if (opt.origin_levels > kMaxOriginLevels) {
      throw DomainError("kernel grid: origin_levels must be at most " + std::to_string(kMaxOriginLevels));
    }
    const double mm = static_cast<double>(m);
    const std::size_t levels = opt.origin_levels != 0 ? opt.origin_levels : auto_origin_levels(h);

    // y-cells: [0, 1/m] split geometrically into levels + 1 pieces, then the regular cells.
    std::vector<double> edges;
    edges.push_back(0.0);
    for (std::size_t l = levels; l >= 1; --l) edges.push_back(std::pow(2.0, -0.5 * static_cast<double>(l)) / mm);
    for (std::size_t j = 1; j <= m; ++j) edges.push_back(static_cast<double>(j) / mm);
    const std::size_t ny = edges.size() - 1;
    const std::size_t first_regular = levels + 1;  // index of the y-cell [1/m, 2/m]

    const std::size_t rows = m * per_cell_;
    const double bytes = static_cast<double>(rows) * static_cast<double>(ny) * sizeof(double);
    if (bytes > static_cast<double>(opt.memory_cap_bytes)) {
      throw ResourceError("kernel grid: factor of " + std::to_string(rows) + " x " + std::to_string(ny) +
                          " exceeds the memory cap");
    }
    rows_ = RowMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ny));

    const double hp = (h.value() + 1.0) / 2.0;
    const double alpha = hp - 0.5;
    const double c = kernel_constant(HurstParam(hp));
    const double d_h = make_constants(h).d_h;
    // B(1 - alpha, alpha) = pi / sin(pi alpha) by reflection.
    const double beta_const = std::numbers::pi / std::sin(std::numbers::pi * alpha);
    const double a_par = 1.0 - alpha;

    // int_0^x s^{-alpha} (1-s)^{alpha-1} ds / B, computed from whichever tail is accurate.
    auto lower = [&](double x) { return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : boost::math::ibeta(a_par, alpha, x)); };
    auto upper = [&](double x) { return x <= 0.0 ? 1.0 : (x >= 1.0 ? 0.0 : boost::math::ibetac(a_par, alpha, x)); };
    auto exact_cell = [&](double u, double a, double b) {
      const double xa = a / u;
      const double xb = std::min(b, u) / u;
      const double frac = xa > 0.5 ? upper(xa) - upper(xb) : lower(xb) - lower(xa);
      return c * std::pow(u, alpha) * beta_const * frac;
    };

    const quad::Rule unode = quad::gauss_legendre(per_cell_);
    const quad::Rule ynode = quad::gauss_legendre(6);
    constexpr std::size_t kNear = 4;  // regular cells closer than this (in cells) use the exact form

    // y^{-alpha} at the Gauss nodes of each regular cell j >= 1.
    std::vector<double> ypow(m * 6);
    for (std::size_t j = 1; j < m; ++j) {
      for (std::size_t q = 0; q < 6; ++q) ypow[j * 6 + q] = std::pow((static_cast<double>(j) + ynode.nodes[q]) / mm, -alpha);
    }
    // (u - y)^{alpha - 1} for u-node p in cell i and y-node q in cell j depends only on i - j.
    std::vector<double> lagpow(m * per_cell_ * 6);
    for (std::size_t lag = kNear; lag < m; ++lag) {
      for (std::size_t p = 0; p < per_cell_; ++p) {
        for (std::size_t q = 0; q < 6; ++q) {
          lagpow[(lag * per_cell_ + p) * 6 + q] =
              std::pow((static_cast<double>(lag) + unode.nodes[p] - ynode.nodes[q]) / mm, alpha - 1.0);
        }
      }
    }

    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < per_cell_; ++p) {
        const double u = (static_cast<double>(i) + unode.nodes[p]) / mm;
        const double w = unode.weights[p] / mm;
        const double row_scale = std::sqrt(d_h * w);
        const double u_alpha = c * std::pow(u, alpha);
        double* row = rows_.data() + (i * per_cell_ + p) * ny;
        for (std::size_t col = 0; col < ny; ++col) {
          const double a = edges[col];
          const double b = edges[col + 1];
          if (a >= u) break;
          double integral;
          const bool regular = col >= first_regular;
          const std::size_t j = regular ? col - first_regular + 1 : 0;
          if (regular && j >= kNear && i >= j + kNear) {
            const double* yp = &ypow[j * 6];
            const double* lp = &lagpow[((i - j) * per_cell_ + p) * 6];
            double s = 0.0;
            for (std::size_t q = 0; q < 6; ++q) s += ynode.weights[q] * yp[q] * lp[q];
            integral = u_alpha * s / mm;
          } else {
            integral = exact_cell(u, a, b);
          }
          row[col] = row_scale * integral / std::sqrt(b - a);
        }
      }
    }
  }

  std::size_t nodes_per_cell() const noexcept override { return per_cell_; }
  std::size_t node_count() const noexcept override { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t noise_dim() const noexcept override { return static_cast<std::size_t>(rows_.cols()); }

  void node_values(std::span<const double> noise, std::span<double> out) const override {
    if (noise.size() != noise_dim() || out.size() != node_count()) {
      throw DomainError("kernel grid: node_values dimension mismatch");
    }
    Eigen::Map<const Eigen::VectorXd> xi(noise.data(), rows_.cols());
    Eigen::Map<Eigen::VectorXd>(out.data(), rows_.rows()).noalias() = rows_ * xi;
  }

  double node_gram(std::size_t i, std::size_t j) const override {
    return rows_.row(static_cast<Eigen::Index>(i)).dot(rows_.row(static_cast<Eigen::Index>(j)));
  }

  Eigen::MatrixXd node_gram_block(std::size_t begin, std::size_t end) const override {
    const auto n = static_cast<Eigen::Index>(end - begin);
    const auto block = rows_.middleRows(static_cast<Eigen::Index>(begin), n);
    return block * block.transpose();
  }

  double hs_norm_sq(std::size_t nodes) const override {
    const auto n = static_cast<Eigen::Index>(nodes);
    if (n == 0) return 0.0;
    const auto block = rows_.topRows(n);
    Eigen::MatrixXd g;
    if (n <= rows_.cols()) {
      g = Eigen::MatrixXd::Zero(n, n);
      g.selfadjointView<Eigen::Lower>().rankUpdate(block);
    } else {
      g = Eigen::MatrixXd::Zero(rows_.cols(), rows_.cols());
      g.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    }
    double acc = 0.0;
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      acc += g(c, c) * g(c, c);
      for (Eigen::Index r = c + 1; r < g.rows(); ++r) acc += 2.0 * g(r, c) * g(r, c);
    }
    return acc;
  }

  Eigen::MatrixXd dense_kernel(std::size_t nodes, std::size_t cap) const override {
    check_dense_cap(noise_dim(), cap);
    const auto block = rows_.topRows(static_cast<Eigen::Index>(nodes));
    return block.transpose() * block;
  }

  std::size_t factor_bytes() const noexcept override { return static_cast<std::size_t>(rows_.size()) * sizeof(double); }

 private:
  std::size_t m_;
  std::size_t per_cell_;
  RowMatrix rows_;
};

}  // namespace
}  // namespace detail

KernelGrid::KernelGrid(HurstParam h, std::size_t m, std::vector<double> t_points, KernelGridOptions options,
                       std::shared_ptr<const detail::GridBackend> backend)
    : h_(h),
      constants_(make_constants(h)),
      m_(m),
      t_points_(std::move(t_points)),
      options_(options),
      backend_(std::move(backend)) {}

KernelGrid KernelGrid::build(HurstParam h, std::size_t m, std::vector<double> t_points,
                             const KernelGridOptions& options) {
  h.require_rosenblatt();
  if (m < 2) throw DomainError("kernel grid: need at least two cells");
  const double mm = static_cast<double>(m);
  for (std::size_t k = 0; k < t_points.size(); ++k) {
    const double t = t_points[k];
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("kernel grid: t-points must lie in (0, 1]");
    if (k > 0 && !(t > t_points[k - 1])) throw DomainError("kernel grid: t-points must be strictly increasing");
    const double scaled = t * mm;
    if (std::abs(scaled - std::round(scaled)) > 1e-9 * mm) {
      throw DomainError("kernel grid: t-point " + std::to_string(t) + " is not a multiple of 1/m");
    }
  }
  std::shared_ptr<const detail::GridBackend> backend;
  if (options.kind == GridKind::covariance_matched) {
    const double bytes = 6.0 * static_cast<double>(m) * sizeof(double);
    if (bytes > static_cast<double>(options.memory_cap_bytes)) throw ResourceError("kernel grid: exceeds the memory cap");
    backend = std::make_shared<detail::MatchedBackend>(h, m);
  } else {
    backend = std::make_shared<detail::ProjectedBackend>(h, m, options);
  }
  return KernelGrid(h, m, std::move(t_points), options, std::move(backend));
}

std::size_t KernelGrid::nodes_per_cell() const noexcept { return backend_->nodes_per_cell(); }
std::size_t KernelGrid::node_count() const noexcept { return backend_->node_count(); }
std::size_t KernelGrid::noise_dim() const noexcept { return backend_->noise_dim(); }
std::size_t KernelGrid::factor_bytes() const noexcept { return backend_->factor_bytes(); }

bool KernelGrid::has_t_point(double t) const noexcept {
  return std::any_of(t_points_.begin(), t_points_.end(), [&](double p) { return std::abs(p - t) <= 1e-12; });
}

std::size_t KernelGrid::nodes_up_to(double t) const {
  const double mm = static_cast<double>(m_);
  const double scaled = t * mm;
  const double cells = std::round(scaled);
  if (t < 0.0 || t > 1.0 + 1e-12 || std::abs(scaled - cells) > 1e-9 * mm) {
    throw DomainError("kernel grid: t = " + std::to_string(t) + " is not a multiple of 1/m in [0, 1]");
  }
  return static_cast<std::size_t>(cells) * backend_->nodes_per_cell();
}

void KernelGrid::node_values(std::span<const double> noise, std::span<double> out) const {
  backend_->node_values(noise, out);
}

double KernelGrid::node_gram(std::size_t i, std::size_t j) const {
  if (i >= node_count() || j >= node_count()) throw DomainError("kernel grid: node index out of range");
  return backend_->node_gram(i, j);
}

Eigen::MatrixXd KernelGrid::node_gram_block(std::size_t begin, std::size_t end) const {
  if (begin > end || end > node_count()) throw DomainError("kernel grid: node range out of bounds");
  return backend_->node_gram_block(begin, end);
}

double KernelGrid::hs_norm_sq(double t) const { return backend_->hs_norm_sq(nodes_up_to(t)); }

Eigen::MatrixXd KernelGrid::dense_kernel(double t) const {
  return backend_->dense_kernel(nodes_up_to(t), options_.memory_cap_bytes);
}

}  // namespace cw::rosenblatt

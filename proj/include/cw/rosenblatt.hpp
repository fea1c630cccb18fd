#pragma once

// The Rosenblatt process Z^H_t = I_2(L_t), H in (1/2, 1), with
//   L_t(y1, y2) = d(H) 1_{[0,t]^2}(y1, y2) int_{y1 v y2}^t dK(u, y1) dK(u, y2) du,
// where dK is the derivative in its first argument of the fBm Volterra kernel
// with Hurst index (H + 1) / 2.
//
// Discretisation: a KernelGrid stores, for a grid of u-nodes on [0, 1], factor
// rows r_u (weights included) such that A_t = sum_{u <= t} r_u r_u^T, so
//   Z_t ~ xi^T A_t xi - tr(A_t) = sum_{u <= t} (Y_u^2 - |r_u|^2),  Y = R xi.
// Everything downstream (paths, V_d, the T2/T4 split) only needs Y and the
// Gram matrix of the rows.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cw/chaos.hpp"
#include "cw/fractional.hpp"
#include "cw/random.hpp"

namespace cw::rosenblatt {

using fractional::HurstParam;

struct RosenblattConstants {
  double h = 0.0;
  double d_h = 0.0;   // d(H) = (1/(H+1)) sqrt(2(2H-1)/H)
  double c_h = 0.0;   // c(H) = sqrt(H(2H-1) / B(2-2H, H-1/2))
  double c1_h = 0.0;  // 4 d(H)
  double e_h = 0.0;   // H^2 (H+1)^2 / 4
  double f_h = 0.0;   // (H+1) / (2(2H-1))
};

RosenblattConstants make_constants(HurstParam h);

/// c(H) for the Volterra kernel K^H; requires H > 1/2.
double kernel_constant(HurstParam h);

/// K^H(t, s) for t > s > 0.
double kernel_K(HurstParam h, double t, double s);

/// d/dt K^H(t, s) = c(H) (t/s)^{H-1/2} (t-s)^{H-3/2}, for t > s > 0.
double dK(HurstParam h, double u, double s);

enum class GridKind {
  /// Stationary factor whose row Gram matrix is
  ///   <r_i, r_j> = delta^H sqrt(rho_H(i-j) / 2),  delta = 1/m,
  /// which reproduces Cov(Z_s, Z_t) exactly at every cell boundary. Rows are
  /// applied through a circulant embedding (noise basis is spectral).
  covariance_matched,
  /// Rows are L^2 projections of dK^{(H+1)/2}(u, .) onto indicator cells in y
  /// (exact, via the incomplete beta function), with Gauss-Legendre nodes in u.
  /// A_t is then the cell projection of L_t.
  kernel_projected,
};

struct KernelGridOptions {
  GridKind kind = GridKind::covariance_matched;
  /// Gauss-Legendre u-nodes per cell (kernel_projected only).
  std::size_t nodes_per_cell = 1;
  /// Geometric refinement (ratio sqrt 2) of the first y-cell, resolving the
  /// y^{-H/2} singularity of the kernel at the origin (kernel_projected only).
  /// 0 picks the depth from H so that the unresolved tail is below 1e-6.
  std::size_t origin_levels = 0;
  /// Memory budget for stored factors and dense kernels.
  std::size_t memory_cap_bytes = std::size_t{1} << 30;
};

namespace detail {
class GridBackend;
}

class KernelGrid {
 public:
  /// t_points must be sorted, in (0, 1], and multiples of 1/m.
  static KernelGrid build(HurstParam h, std::size_t m, std::vector<double> t_points,
                          const KernelGridOptions& options = {});

  HurstParam hurst() const noexcept { return h_; }
  const RosenblattConstants& constants() const noexcept { return constants_; }
  GridKind kind() const noexcept { return options_.kind; }
  const KernelGridOptions& options() const noexcept { return options_; }
  std::size_t cells() const noexcept { return m_; }
  std::size_t nodes_per_cell() const noexcept;
  std::size_t node_count() const noexcept;
  std::size_t noise_dim() const noexcept;
  std::span<const double> t_points() const noexcept { return t_points_; }
  bool has_t_point(double t) const noexcept;

  /// Number of u-nodes with u <= t; t must be a multiple of 1/m in [0, 1].
  std::size_t nodes_up_to(double t) const;

  /// Y = R xi for a noise vector of length noise_dim().
  void node_values(std::span<const double> noise, std::span<double> out) const;
  /// <r_i, r_j>.
  double node_gram(std::size_t i, std::size_t j) const;
  /// Gram matrix of rows [begin, end).
  Eigen::MatrixXd node_gram_block(std::size_t begin, std::size_t end) const;
  /// ||A_t||^2 (Hilbert-Schmidt); Var(Z_t) = 2 ||A_t||^2.
  double hs_norm_sq(double t) const;
  /// Dense A_t in the noise basis; refused when it would breach the memory cap.
  Eigen::MatrixXd dense_kernel(double t) const;
  std::size_t factor_bytes() const noexcept;

 private:
  KernelGrid(HurstParam h, std::size_t m, std::vector<double> t_points, KernelGridOptions options,
             std::shared_ptr<const detail::GridBackend> backend);

  HurstParam h_;
  RosenblattConstants constants_;
  std::size_t m_;
  std::vector<double> t_points_;
  KernelGridOptions options_;
  std::shared_ptr<const detail::GridBackend> backend_;
};

/// t_points {k/d : 1 <= k <= d}.
std::vector<double> uniform_t_points(std::size_t d);

/// Grid able to carry paths with d increments: m = ratio * d cells.
KernelGrid build_path_grid(HurstParam h, std::size_t d, std::size_t ratio = 8,
                           const KernelGridOptions& options = {});

struct RosenblattPath {
  HurstParam h{0.75};
  std::size_t d = 0;
  /// Z at k/d, k = 0..d; values[0] == 0.
  std::vector<double> values;
  /// Node values Y = R xi, retained for pathwise coupling.
  std::vector<double> nodes;
  chaos::GaussianNoise noise;

  double z1() const { return values.back(); }
  /// Increment Z_{k/d} - Z_{(k-1)/d}, k = 1..d.
  double increment(std::size_t k) const { return values[k] - values[k - 1]; }
};

/// One path on [0, 1] observed at k/d; the grid must contain every k/d.
RosenblattPath simulate_path(const KernelGrid& grid, std::size_t d, Stream& stream);

/// Z_1 only (the Rosenblatt random variable), from a fresh noise draw.
double sample_z1(const KernelGrid& grid, Stream& stream);

/// V_d = c_{1,H}^{-1} d^{-H} sum_k [ (Z_{(k+1)/d} - Z_{k/d})^2 d^{2H} - 1 ].
double v_statistic(const RosenblattPath& path);

struct Decomposition {
  double t2 = 0.0;  // second-chaos part I_2(h_d)
  double t4 = 0.0;  // fourth-chaos part plus the centring offset
};

/// Splits V_d into its second- and fourth-chaos parts. Each increment is
/// diagonalised on its own block (eigenbasis of the block Gram matrix), so
/// t2 + t4 == V_d is a genuine identity check rather than a definition.
Decomposition decompose_v(const RosenblattPath& path, const KernelGrid& grid);

}  // namespace cw::rosenblatt

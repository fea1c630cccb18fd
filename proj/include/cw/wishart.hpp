#pragma once

// Entry matrices in the two regimes, the centred Wishart matrix
// W = (1/d) X X^T - I, its renormalisations, and the target-law samplers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cw/chaos.hpp"
#include "cw/random.hpp"
#include "cw/rosenblatt.hpp"

namespace cw::wishart {

using fractional::HurstParam;

enum class Regime { independent_chaos, correlated_rosenblatt };

struct EntryMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  Eigen::MatrixXd entries;  // n x d
  Regime regime = Regime::independent_chaos;
  std::vector<int> orders;  // chaos order of each row (independent regime)
  double h = 0.0;           // Hurst index (correlated regime)
  std::uint64_t stream_id = 0;
  std::size_t block_dim = 0;  // basis size per entry (independent) or grid nodes per row (correlated)
  std::vector<std::string> warnings;
};

enum class Renorm { none, clt, rosenblatt };

struct WishartMatrix {
  std::size_t n = 0;
  Eigen::MatrixXd w;
  Renorm renorm = Renorm::none;
  double h = 0.0;  // set for rosenblatt renormalisation
  std::size_t source_n = 0;
  std::size_t source_d = 0;
};

/// X_ij = I_{q_i}(h_ij^{(x) q_i}) with h_ij a unit vector on the basis block of
/// entry (i, j); blocks are disjoint, so every pair of entries is independent.
/// The noise is one draw of dimension n * d * block_dim, blocks in row-major order.
EntryMatrix gen_independent_entries(std::span<const int> orders, std::size_t d, Stream& stream,
                                    std::size_t block_dim = 1);

/// Global basis dimension used by gen_independent_entries.
std::size_t independent_basis_dim(std::size_t n, std::size_t d, std::size_t block_dim);

/// Unit vector h_ij of entry (i, j) in the global basis (for algebraic checks).
std::vector<double> independent_entry_direction(std::size_t n, std::size_t d, std::size_t block_dim,
                                                std::size_t i, std::size_t j);

/// X_ij = d^H (Z^i_{j/d} - Z^i_{(j-1)/d}) for n independent Rosenblatt paths on
/// one shared grid. Rows draw their noise from `stream` in order. When `paths`
/// is given the underlying paths are returned as well.
EntryMatrix gen_correlated_entries(HurstParam h, std::size_t n, std::size_t d,
                                   const rosenblatt::KernelGrid& grid, Stream& stream,
                                   std::vector<rosenblatt::RosenblattPath>* paths = nullptr);

/// Same, but row i uses its own stream rows[i].
EntryMatrix gen_correlated_entries(HurstParam h, std::size_t d, const rosenblatt::KernelGrid& grid,
                                   std::span<Stream> rows,
                                   std::vector<rosenblatt::RosenblattPath>* paths = nullptr);

WishartMatrix build_wishart(const EntryMatrix& x);

struct RenormMode {
  Renorm kind = Renorm::clt;
  double h = 0.0;
  static RenormMode clt() { return {Renorm::clt, 0.0}; }
  static RenormMode rosenblatt(HurstParam h) { return {Renorm::rosenblatt, h.value()}; }
};

/// Scalar factor sqrt(d) (clt) or c_{1,H}^{-1} d^{1-H} (rosenblatt).
double renorm_factor(RenormMode mode, std::size_t d);

/// Throws DomainError when w is already renormalised.
WishartMatrix renormalize(const WishartMatrix& w, RenormMode mode);

/// Symmetric Gaussian matrix: diagonal N(0, m4 - 1), off-diagonal N(0, 1),
/// independent upper triangle drawn in half-vector order.
Eigen::MatrixXd sample_goe(std::size_t n, double m4, Stream& stream);

/// diag(Z^1_1, ..., Z^n_1) with independent Rosenblatt variables.
Eigen::MatrixXd sample_rosenblatt_diag(std::size_t n, HurstParam h, const rosenblatt::KernelGrid& grid,
                                       Stream& stream);

/// (W_11, W_12, ..., W_1n, W_22, ..., W_nn); throws on asymmetric input.
std::vector<double> half_vector(const Eigen::MatrixXd& w, double tol = 1e-12);
Eigen::MatrixXd from_half_vector(std::span<const double> v);

}  // namespace cw::wishart

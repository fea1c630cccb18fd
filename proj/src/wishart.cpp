#include "cw/wishart.hpp"

#include <cmath>
#include <set>
#include <string>

#include "cw/errors.hpp"

namespace cw::wishart {
namespace {

constexpr std::size_t kMaxNoiseDim = std::size_t{1} << 28;

}  // namespace

std::size_t independent_basis_dim(std::size_t n, std::size_t d, std::size_t block_dim) {
  return n * d * block_dim;
}

std::vector<double> independent_entry_direction(std::size_t n, std::size_t d, std::size_t block_dim,
                                                std::size_t i, std::size_t j) {
  if (i >= n || j >= d || block_dim == 0) throw DomainError("independent_entry_direction: index out of range");
  std::vector<double> h(independent_basis_dim(n, d, block_dim), 0.0);
  const std::size_t offset = (i * d + j) * block_dim;
  const double v = 1.0 / std::sqrt(static_cast<double>(block_dim));
  for (std::size_t b = 0; b < block_dim; ++b) h[offset + b] = v;
  return h;
}

EntryMatrix gen_independent_entries(std::span<const int> orders, std::size_t d, Stream& stream,
                                    std::size_t block_dim) {
  const std::size_t n = orders.size();
  if (n == 0 || d == 0) throw DomainError("gen_independent_entries: n and d must be positive");
  if (block_dim == 0) throw DomainError("gen_independent_entries: block_dim must be positive");
  for (int q : orders) {
    if (q < 1 || q > chaos::kMaxRankOneOrder) {
      throw DomainError("gen_independent_entries: chaos order " + std::to_string(q) + " outside [1, " +
                        std::to_string(chaos::kMaxRankOneOrder) + "]");
    }
  }
  if (independent_basis_dim(n, d, block_dim) > kMaxNoiseDim) {
    throw ResourceError("gen_independent_entries: n * d * block_dim exceeds the noise budget");
  }
  EntryMatrix x;
  x.n = n;
  x.d = d;
  x.regime = Regime::independent_chaos;
  x.orders.assign(orders.begin(), orders.end());
  x.stream_id = stream.id();
  x.block_dim = block_dim;
  if (std::set<int>(orders.begin(), orders.end()).size() > 1) {
    x.warnings.push_back("mixed chaos orders: entries do not share a common fourth moment");
  }
  x.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(block_dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double xi = 0.0;
      for (std::size_t b = 0; b < block_dim; ++b) xi += stream.normal();
      x.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          chaos::unit_rank_one_chaos(orders[i], xi * scale);
    }
  }
  return x;
}

namespace {

EntryMatrix correlated_shell(HurstParam h, std::size_t n, std::size_t d, const rosenblatt::KernelGrid& grid) {
  h.require_rosenblatt();
  if (grid.hurst().value() != h.value()) throw DomainError("gen_correlated_entries: grid built for another H");
  if (n == 0 || d == 0) throw DomainError("gen_correlated_entries: n and d must be positive");
  EntryMatrix x;
  x.n = n;
  x.d = d;
  x.regime = Regime::correlated_rosenblatt;
  x.h = h.value();
  x.block_dim = grid.node_count();
  x.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  return x;
}

void fill_row(EntryMatrix& x, std::size_t i, const rosenblatt::KernelGrid& grid, Stream& stream,
              std::vector<rosenblatt::RosenblattPath>* paths) {
  auto path = rosenblatt::simulate_path(grid, x.d, stream);
  const double scale = std::pow(static_cast<double>(x.d), x.h);
  for (std::size_t k = 1; k <= x.d; ++k) {
    x.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) = scale * path.increment(k);
  }
  if (paths) paths->push_back(std::move(path));
}

}  // namespace

EntryMatrix gen_correlated_entries(HurstParam h, std::size_t d, const rosenblatt::KernelGrid& grid,
                                   std::span<Stream> rows, std::vector<rosenblatt::RosenblattPath>* paths) {
  EntryMatrix x = correlated_shell(h, rows.size(), d, grid);
  x.stream_id = rows[0].id();
  if (paths) paths->clear();
  for (std::size_t i = 0; i < rows.size(); ++i) fill_row(x, i, grid, rows[i], paths);
  return x;
}

EntryMatrix gen_correlated_entries(HurstParam h, std::size_t n, std::size_t d, const rosenblatt::KernelGrid& grid,
                                   Stream& stream, std::vector<rosenblatt::RosenblattPath>* paths) {
  EntryMatrix x = correlated_shell(h, n, d, grid);
  x.stream_id = stream.id();
  if (paths) paths->clear();
  for (std::size_t i = 0; i < n; ++i) fill_row(x, i, grid, stream, paths);
  return x;
}

WishartMatrix build_wishart(const EntryMatrix& x) {
  WishartMatrix w;
  w.n = x.n;
  w.source_n = x.n;
  w.source_d = x.d;
  const auto n = static_cast<Eigen::Index>(x.n);
  w.w = Eigen::MatrixXd::Zero(n, n);
  w.w.selfadjointView<Eigen::Lower>().rankUpdate(x.entries, 1.0 / static_cast<double>(x.d));
  w.w.diagonal().array() -= 1.0;
  w.w.triangularView<Eigen::StrictlyUpper>() = w.w.transpose();
  return w;
}

double renorm_factor(RenormMode mode, std::size_t d) {
  const double dd = static_cast<double>(d);
  switch (mode.kind) {
    case Renorm::clt:
      return std::sqrt(dd);
    case Renorm::rosenblatt: {
      const HurstParam h(mode.h);
      return std::pow(dd, 1.0 - h.value()) / rosenblatt::make_constants(h).c1_h;
    }
    case Renorm::none:
      break;
  }
  throw DomainError("renormalize: mode must be clt or rosenblatt");
}

WishartMatrix renormalize(const WishartMatrix& w, RenormMode mode) {
  if (w.renorm != Renorm::none) throw DomainError("renormalize: matrix is already renormalised");
  WishartMatrix out = w;
  out.w *= renorm_factor(mode, w.source_d);
  out.renorm = mode.kind;
  out.h = mode.h;
  return out;
}

Eigen::MatrixXd sample_goe(std::size_t n, double m4, Stream& stream) {
  if (!(m4 > 1.0)) throw DomainError("sample_goe: m4 must exceed 1");
  if (n == 0) throw DomainError("sample_goe: n must be positive");
  const double diag_sd = std::sqrt(m4 - 1.0);
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd z(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    z(i, i) = diag_sd * stream.normal();
    for (Eigen::Index j = i + 1; j < nn; ++j) z(i, j) = z(j, i) = stream.normal();
  }
  return z;
}

Eigen::MatrixXd sample_rosenblatt_diag(std::size_t n, HurstParam h, const rosenblatt::KernelGrid& grid,
                                       Stream& stream) {
  h.require_rosenblatt();
  if (grid.hurst().value() != h.value()) throw DomainError("sample_rosenblatt_diag: grid built for another H");
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) r(i, i) = rosenblatt::sample_z1(grid, stream);
  return r;
}

std::vector<double> half_vector(const Eigen::MatrixXd& w, double tol) {
  if (w.rows() != w.cols()) throw DomainError("half_vector: matrix is not square");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(w.rows() * (w.rows() + 1) / 2));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = i; j < w.cols(); ++j) {
      if (std::abs(w(i, j) - w(j, i)) > tol * scale) throw DomainError("half_vector: matrix is not symmetric");
      v.push_back(w(i, j));
    }
  }
  return v;
}

Eigen::MatrixXd from_half_vector(std::span<const double> v) {
  const double root = (std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0;
  const auto n = static_cast<Eigen::Index>(std::llround(root));
  if (n <= 0 || static_cast<std::size_t>(n * (n + 1) / 2) != v.size()) {
    throw DomainError("from_half_vector: length is not triangular");
  }
  Eigen::MatrixXd w(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) w(i, j) = w(j, i) = v[k++];
  }
  return w;
}

}  // namespace cw::wishart

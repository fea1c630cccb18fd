#include "cw/rosenblatt.hpp"

#include <cmath>
#include <string>

#include "cw/errors.hpp"
#include "cw/quadrature.hpp"

namespace cw::rosenblatt {
namespace {

// B(a, b) through the log-gamma identity log B = lgamma(a) + lgamma(b) - lgamma(a + b).
double beta_fn(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

template <class F>
double composite_gauss(F&& f, double a, double b, std::size_t panels) {
  static const quad::Rule rule = quad::gauss_legendre(16);
  const double width = (b - a) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) panel += rule.weights[i] * f(lo + width * rule.nodes[i]);
    acc += panel * width;
  }
  return acc;
}

}  // namespace

RosenblattConstants make_constants(HurstParam h) {
  h.require_rosenblatt();
  const double x = h.value();
  RosenblattConstants c;
  c.h = x;
  c.d_h = std::sqrt(2.0 * (2.0 * x - 1.0) / x) / (x + 1.0);
  c.c_h = kernel_constant(h);
  c.c1_h = 4.0 * c.d_h;
  c.e_h = x * x * (x + 1.0) * (x + 1.0) / 4.0;
  c.f_h = (x + 1.0) / (2.0 * (2.0 * x - 1.0));
  return c;
}

double kernel_constant(HurstParam h) {
  h.require_rosenblatt();
  const double x = h.value();
  return std::sqrt(x * (2.0 * x - 1.0) / beta_fn(2.0 - 2.0 * x, x - 0.5));
}

double kernel_K(HurstParam h, double t, double s) {
  if (!(s > 0.0) || !(t > s)) throw DomainError("kernel_K: requires t > s > 0");
  const double x = h.value();
  const double c = kernel_constant(h);
  // u = s + v^p with p = 1/(H - 1/2) turns (u-s)^{H-3/2} du into p dv, leaving
  // the smooth integrand p (s + v^p)^{H-1/2} on [0, (t-s)^{H-1/2}].
  const double p = 1.0 / (x - 0.5);
  const double upper = std::pow(t - s, x - 0.5);
  auto integrand = [&](double v) { return p * std::pow(s + std::pow(v, p), x - 0.5); };
  double prev = composite_gauss(integrand, 0.0, upper, 1);
  double cur = prev;
  for (std::size_t panels = 2; panels <= 1024; panels *= 2) {
    cur = composite_gauss(integrand, 0.0, upper, panels);
    if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) break;
    prev = cur;
  }
  return c * std::pow(s, 0.5 - x) * cur;
}

double dK(HurstParam h, double u, double s) {
  if (!(s > 0.0) || !(u > s)) throw DomainError("dK: requires u > s > 0");
  const double x = h.value();
  return kernel_constant(h) * std::pow(u / s, x - 0.5) * std::pow(u - s, x - 1.5);
}

std::vector<double> uniform_t_points(std::size_t d) {
  if (d == 0) throw DomainError("uniform_t_points: d must be positive");
  std::vector<double> t(d);
  for (std::size_t k = 1; k <= d; ++k) t[k - 1] = static_cast<double>(k) / static_cast<double>(d);
  return t;
}

KernelGrid build_path_grid(HurstParam h, std::size_t d, std::size_t ratio, const KernelGridOptions& options) {
  if (ratio == 0) throw DomainError("build_path_grid: grid ratio must be positive");
  return KernelGrid::build(h, std::max<std::size_t>(ratio * d, 64), uniform_t_points(d), options);
}

RosenblattPath simulate_path(const KernelGrid& grid, std::size_t d, Stream& stream) {
  if (d == 0) throw DomainError("simulate_path: d must be positive");
  std::vector<std::size_t> bounds(d + 1, 0);
  for (std::size_t k = 1; k <= d; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(d);
    if (!grid.has_t_point(t)) {
      throw DomainError("simulate_path: grid lacks t-point " + std::to_string(k) + "/" + std::to_string(d));
    }
    bounds[k] = grid.nodes_up_to(t);
  }
  RosenblattPath path;
  path.h = grid.hurst();
  path.d = d;
  path.noise = chaos::GaussianNoise::draw(stream, grid.noise_dim());
  path.nodes.resize(grid.node_count());
  grid.node_values(path.noise.values, path.nodes);
  path.values.assign(d + 1, 0.0);
  double z = 0.0;
  for (std::size_t k = 1; k <= d; ++k) {
    double block = 0.0;
    for (std::size_t j = bounds[k - 1]; j < bounds[k]; ++j) {
      block += path.nodes[j] * path.nodes[j] - grid.node_gram(j, j);
    }
    z += block;
    path.values[k] = z;
  }
  return path;
}

double sample_z1(const KernelGrid& grid, Stream& stream) {
  const auto noise = stream.normals(grid.noise_dim());
  std::vector<double> y(grid.node_count());
  grid.node_values(noise, y);
  double z = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) z += y[j] * y[j] - grid.node_gram(j, j);
  return z;
}

double v_statistic(const RosenblattPath& path) {
  if (path.d < 2) throw DomainError("v_statistic: needs at least two increments");
  if (path.values.size() != path.d + 1) throw DomainError("v_statistic: malformed path");
  const double x = path.h.value();
  const double dd = static_cast<double>(path.d);
  const double scale = std::pow(dd, 2.0 * x);
  double acc = 0.0;
  for (std::size_t k = 1; k <= path.d; ++k) {
    const double inc = path.increment(k);
    acc += inc * inc * scale - 1.0;
  }
  return acc * std::pow(dd, -x) / make_constants(path.h).c1_h;
}

Decomposition decompose_v(const RosenblattPath& path, const KernelGrid& grid) {
  if (path.nodes.empty()) throw DomainError("decompose_v: path does not retain its noise");
  if (path.nodes.size() != grid.node_count() || path.h.value() != grid.hurst().value()) {
    throw DomainError("decompose_v: path was not generated on this grid");
  }
  const std::size_t d = path.d;
  const double dd = static_cast<double>(d);
  const double x = path.h.value();
  const double c1 = make_constants(path.h).c1_h;
  // Increment k is I_2(F_k) with F_k = R_k^T R_k. On the eigenbasis of the block
  // Gram G_k = R_k R_k^T = U diag(lambda) U^T, eta_a = u_a^T Y_k / sqrt(lambda_a)
  // are i.i.d. N(0, 1) and
  //   I_2(F_k)^2 = I_4(F_k (x) F_k) + 4 I_2(F_k (x)_1 F_k) + 2 ||F_k||^2,
  //   I_2(F_k (x)_1 F_k) = sum lambda^2 (eta^2 - 1),
  //   I_4(F_k (x) F_k) = (sum lambda (eta^2 - 1))^2 - sum lambda^2 (4 eta^2 - 2).
  const bool stationary = grid.kind() == GridKind::covariance_matched;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> shared;
  double second = 0.0;
  double fourth = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t begin = grid.nodes_up_to(static_cast<double>(k) / dd);
    const std::size_t end = grid.nodes_up_to(static_cast<double>(k + 1) / dd);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> local;
    if (stationary) {
      if (k == 0) shared.compute(grid.node_gram_block(begin, end));
    } else {
      local.compute(grid.node_gram_block(begin, end));
    }
    const auto& eig = stationary ? shared : local;
    Eigen::Map<const Eigen::VectorXd> y(path.nodes.data() + begin, static_cast<Eigen::Index>(end - begin));
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * y;  // sqrt(lambda_a) eta_a
    double i2 = 0.0;
    double contraction = 0.0;
    double fourth_corr = 0.0;
    double norm_sq = 0.0;
    for (Eigen::Index a = 0; a < proj.size(); ++a) {
      const double lambda = eig.eigenvalues()(a);
      if (lambda <= 0.0) continue;  // rank-deficient block: no noise direction
      const double eta_sq = proj(a) * proj(a) / lambda;
      i2 += lambda * (eta_sq - 1.0);
      contraction += lambda * lambda * (eta_sq - 1.0);
      fourth_corr += lambda * lambda * (4.0 * eta_sq - 2.0);
      norm_sq += lambda * lambda;
    }
    second += contraction;
    fourth += std::pow(dd, 2.0 * x) * (i2 * i2 - fourth_corr + 2.0 * norm_sq) - 1.0;
  }
  Decomposition out;
  out.t2 = 4.0 / c1 * std::pow(dd, x) * second;
  out.t4 = fourth * std::pow(dd, -x) / c1;
  return out;
}

}  // namespace cw::rosenblatt

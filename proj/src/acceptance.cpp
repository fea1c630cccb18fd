#include "cw/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cw/chaos.hpp"
#include "cw/errors.hpp"
#include "cw/experiments.hpp"
#include "cw/fractional.hpp"
#include "cw/parallel.hpp"
#include "cw/persist.hpp"
#include "cw/random.hpp"
#include "cw/rosenblatt.hpp"
#include "cw/wishart.hpp"

namespace cw::harness {
namespace {

using fractional::HurstParam;

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

struct Tally {
  CriterionResult& r;
  void check(bool ok, const std::string& detail) {
    r.pass = r.pass && ok;
    r.details.push_back(std::string(ok ? "" : "FAILED ") + detail);
  }
};

// Sample covariance of x and y with the standard error of the product mean.
struct CovEstimate {
  double cov = 0.0;
  double se = 0.0;
};

CovEstimate covariance(std::span<const double> x, std::span<const double> y) {
  const auto mx = mean_and_stderr(x).mean;
  const auto my = mean_and_stderr(y).mean;
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
  const auto m = mean_and_stderr(p);
  const double n = static_cast<double>(x.size());
  return {m.mean * n / (n - 1.0), m.se};
}

ExperimentConfig theorem2_config(double h, std::uint64_t seed, unsigned workers) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::theorem2;
  cfg.hurst = h;
  cfg.n = 2;
  cfg.d_list = {16, 32, 64, 128, 256, 512};
  cfg.replicas = 2000;
  cfg.grid_ratio = 8;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

const Check& find_check(const ExperimentResult& res, const std::string& name) {
  for (const auto& c : res.checks) {
    if (c.name == name) return c;
  }
  throw DomainError("missing check " + name);
}

// 1. Variance of Z_1 on the projected kernel grid.
void kernel_normalization(Tally& t, const AcceptanceOptions&) {
  for (double h : {0.6, 0.75, 0.9}) {
    rosenblatt::KernelGridOptions o;
    o.kind = rosenblatt::GridKind::kernel_projected;
    const auto grid = rosenblatt::KernelGrid::build(HurstParam(h), 4096, {1.0}, o);
    const double v = 2.0 * grid.hs_norm_sq(1.0);
    t.check(std::abs(v - 1.0) <= 0.01, "H=" + fmt(h) + " 2||A_1||^2=" + fmt(v, 6));
  }
}

// 2. Covariance of the simulated process against the fBm covariance.
void rosenblatt_covariance(Tally& t, const AcceptanceOptions& opt) {
  const std::size_t reps = 100000;
  const StreamFactory f(opt.seed);
  for (double h : {0.6, 0.9}) {
    const HurstParam hp(h);
    const auto grid = rosenblatt::KernelGrid::build(hp, 2048, rosenblatt::uniform_t_points(4));
    std::vector<std::vector<double>> z(4, std::vector<double>(reps));
    parallel_for(reps, opt.workers, [&](std::size_t r) {
      Stream s = f.stream(Purpose::test, r, h == 0.6 ? 2 : 3);
      const auto path = rosenblatt::simulate_path(grid, 4, s);
      for (std::size_t k = 0; k < 4; ++k) z[k][r] = path.values[k + 1];
    });
    double worst = 0.0;
    std::string where;
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a; b < 4; ++b) {
        const double s = 0.25 * static_cast<double>(a + 1);
        const double u = 0.25 * static_cast<double>(b + 1);
        const double target = fractional::fbm_cov(hp, s, u);
        const double rel = std::abs(covariance(z[a], z[b]).cov / target - 1.0);
        if (rel > worst) {
          worst = rel;
          where = "(" + fmt(s) + "," + fmt(u) + ")";
        }
      }
    }
    t.check(worst <= 0.03, "H=" + fmt(h) + " worst relative error " + fmt(worst, 3) + " at " + where);
  }
}

// 3. Row correlations of the correlated entry matrix.
void correlation_structure(Tally& t, const AcceptanceOptions& opt) {
  const HurstParam h(0.75);
  const std::size_t d = 64, n = 2, reps = 4000, max_lag = 5;
  const auto grid = rosenblatt::build_path_grid(h, d, 8);
  const StreamFactory f(opt.seed);
  std::vector<std::vector<double>> lag(max_lag + 1, std::vector<double>(reps));
  std::vector<double> cross(reps);
  parallel_for(reps, opt.workers, [&](std::size_t r) {
    Stream s = f.stream(Purpose::test, r, 4);
    const auto x = wishart::gen_correlated_entries(h, n, d, grid, s);
    for (std::size_t k = 0; k <= max_lag; ++k) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        for (std::size_t j = 0; j + k < d; ++j) {
          acc += x.entries(i, static_cast<Eigen::Index>(j)) * x.entries(i, static_cast<Eigen::Index>(j + k));
        }
      }
      lag[k][r] = acc / static_cast<double>(n * (d - k));
    }
    double c = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) c += x.entries(0, j) * x.entries(1, j);
    cross[r] = c / static_cast<double>(d);
  });
  const double var = mean_and_stderr(lag[0]).mean;
  double worst = 0.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    const double corr = mean_and_stderr(lag[k]).mean / var;
    worst = std::max(worst, std::abs(corr - fractional::rho(h, static_cast<long long>(k))));
  }
  t.check(worst <= 0.02, "lags 1..5 worst |corr - rho| " + fmt(worst, 3));
  const auto c = mean_and_stderr(cross);
  t.check(std::abs(c.mean) <= 5.0 * c.se, "cross-row " + fmt(c.mean, 3) + " (se " + fmt(c.se, 2) + ")");
}

// 4. Second moments in the independent regime.
void independent_moments(Tally& t, const AcceptanceOptions& opt) {
  for (int q : {1, 2}) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::moments;
    cfg.orders = {q};
    cfg.n = 2;
    cfg.d_list = {256};
    cfg.replicas = 50000;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    const auto res = run_moments(cfg);
    for (const auto& c : res.checks) t.check(c.pass, "q=" + std::to_string(q) + " " + c.name + " " + c.detail);
  }
}

// 5 and 6. Rates of the correlated regime.
void theorem2_rate(Tally& t, const AcceptanceOptions& opt, const std::string& check) {
  for (double h : {0.6, 0.9}) {
    const auto res = run_theorem2(theorem2_config(h, opt.seed, opt.workers));
    const auto& c = find_check(res, check);
    t.check(c.pass, "H=" + fmt(h) + " " + c.detail);
  }
}

// 7. Independent regime trend towards the GOE law.
void theorem1_trend(Tally& t, const AcceptanceOptions& opt) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::theorem1;
  cfg.orders = {1};
  cfg.n = 3;
  cfg.d_list = {64, 128, 256, 512, 1024, 2048, 4096};
  cfg.replicas = 5000;
  cfg.directions = 128;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  const auto res = run_theorem1(cfg);
  const auto& ratio = find_check(res, "sliced_w1_goe_ratio");
  t.check(ratio.pass, "sliced W1 " + ratio.detail);
  const auto& slope = find_check(res, "entry_w1_diag_slope");
  t.check(slope.pass, "per-entry W1 " + slope.detail);
}

// 8. Chaos algebra.
void chaos_algebra(Tally& t, const AcceptanceOptions& opt) {
  using chaos::ChaosTensor;
  const StreamFactory f(opt.seed);
  Stream setup = f.stream(Purpose::test, 0, 8);
  auto random_vector = [&](std::size_t m, double scale) {
    auto v = setup.normals(m);
    for (double& x : v) x *= scale;
    return v;
  };
  auto random_symmetric = [&](std::size_t m) {
    return chaos::symmetrize(ChaosTensor(2, m, random_vector(m * m, 1.0 / static_cast<double>(m))));
  };

  const std::size_t reps = 100000;
  const std::size_t m = 16;
  const auto f1 = ChaosTensor::vector(random_vector(m, 0.3));
  const auto g1 = ChaosTensor::vector(random_vector(m, 0.3));
  const auto a2 = random_symmetric(m);
  const auto b2 = random_symmetric(m);
  auto unit = [](std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    for (double& x : v) x /= std::sqrt(s);
    return v;
  };
  const auto h3 = ChaosTensor::vector(unit(random_vector(m, 1.0)));
  const auto k3 = ChaosTensor::vector(unit(random_vector(m, 1.0)));

  std::vector<std::vector<double>> s(6, std::vector<double>(reps));
  parallel_for(reps, opt.workers, [&](std::size_t r) {
    Stream st = f.stream(Purpose::test, r, 80);
    const auto noise = chaos::GaussianNoise::draw(st, m);
    s[0][r] = chaos::sample_I1(f1, noise);
    s[1][r] = chaos::sample_I1(g1, noise);
    s[2][r] = chaos::sample_I2(a2, noise);
    s[3][r] = chaos::sample_I2(b2, noise);
    s[4][r] = chaos::sample_rank_one_chaos(3, h3, noise);
    s[5][r] = chaos::sample_rank_one_chaos(3, k3, noise);
  });
  auto within = [&](const std::string& label, std::size_t i, std::size_t j, double target) {
    const auto c = covariance(s[i], s[j]);
    t.check(std::abs(c.cov - target) <= 5.0 * c.se,
            label + " " + fmt(c.cov) + " vs " + fmt(target) + " (se " + fmt(c.se, 2) + ")");
  };
  within("isometry q=1", 0, 1, f1.inner(g1));
  within("isometry q=2", 2, 3, 2.0 * a2.inner(b2));
  within("isometry q=2 variance", 2, 2, 2.0 * a2.inner(a2));
  const double hk = h3.inner(k3);
  within("isometry q=3", 4, 5, 6.0 * hk * hk * hk);
  within("orders 1,2", 0, 2, 0.0);
  within("orders 2,3", 3, 4, 0.0);
  within("orders 1,3", 1, 5, 0.0);

  // Product formula, pathwise.
  const auto hg = chaos::symmetrize(ChaosTensor::outer(f1, g1));
  double worst = 0.0;
  for (std::size_t r = 0; r < 1000; ++r) {
    Stream st = f.stream(Purpose::test, r, 81);
    const auto noise = chaos::GaussianNoise::draw(st, m);
    const double lhs = chaos::sample_I1(f1, noise) * chaos::sample_I1(g1, noise);
    const double rhs = chaos::sample_I2(hg, noise) + f1.inner(g1);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  t.check(worst <= 1e-10, "product formula max deviation " + fmt(worst, 2));

  // Contraction bound on random pairs.
  bool bound = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    const int q = 1 + (trial / 3) % 3;
    const std::size_t dim = 5;
    auto pf = ChaosTensor(p, dim, random_vector(static_cast<std::size_t>(std::pow(dim, p)), 1.0));
    auto qf = ChaosTensor(q, dim, random_vector(static_cast<std::size_t>(std::pow(dim, q)), 1.0));
    pf = chaos::symmetrize(pf);
    qf = chaos::symmetrize(qf);
    for (int r = 0; r <= std::min(p, q); ++r) {
      bound = bound && chaos::contract(pf, qf, r).norm() <= pf.norm() * qf.norm() * (1.0 + 1e-12);
    }
  }
  t.check(bound, "contraction bound on 100 random pairs");

  // Disjoint-block entries are independent with an exactly zero contraction.
  const std::size_t n = 2, d = 3, block = 2;
  bool zero = true;
  for (std::size_t e1 = 0; e1 < n * d; ++e1) {
    for (std::size_t e2 = e1 + 1; e2 < n * d; ++e2) {
      const auto u = ChaosTensor::tensor_power(
          ChaosTensor::vector(wishart::independent_entry_direction(n, d, block, e1 / d, e1 % d)), 2);
      const auto v = ChaosTensor::tensor_power(
          ChaosTensor::vector(wishart::independent_entry_direction(n, d, block, e2 / d, e2 % d)), 2);
      const auto c = chaos::contract(u, v, 1);
      for (double x : c.coeffs()) zero = zero && x == 0.0;
      zero = zero && chaos::uz_independent(u, v, 0.0);
    }
  }
  t.check(zero, "disjoint-block first contractions exactly zero");

  // Hermite three-term recurrence.
  double rec = 0.0;
  for (int k = 1; k < 30; ++k) {
    for (double x = -10.0; x <= 10.0; x += 0.25) {
      const double lhs = (k + 1) * chaos::hermite(k + 1, x);
      const double rhs = x * chaos::hermite(k, x) - chaos::hermite(k - 1, x);
      const double scale = std::max({std::abs(lhs), std::abs(x * chaos::hermite(k, x)), std::abs(chaos::hermite(k - 1, x)), 1e-300});
      rec = std::max(rec, std::abs(lhs - rhs) / scale);
    }
  }
  t.check(rec <= 1e-12, "Hermite recurrence max relative deviation " + fmt(rec, 2));
}

// 9. T2 + T4 = V_d and orthogonality of the two parts.
void decomposition(Tally& t, const AcceptanceOptions& opt) {
  const std::size_t d = 64, reps = 2000;
  const StreamFactory f(opt.seed);
  for (double h : {0.6, 0.9}) {
    const HurstParam hp(h);
    const auto grid = rosenblatt::build_path_grid(hp, d, 8);
    std::vector<double> gap(reps), prod(reps);
    parallel_for(reps, opt.workers, [&](std::size_t r) {
      Stream s = f.stream(Purpose::test, r, h == 0.6 ? 90 : 91);
      const auto path = rosenblatt::simulate_path(grid, d, s);
      const auto dec = rosenblatt::decompose_v(path, grid);
      gap[r] = std::abs(dec.t2 + dec.t4 - rosenblatt::v_statistic(path));
      prod[r] = dec.t2 * dec.t4;
    });
    double worst = 0.0;
    for (double g : gap) worst = std::max(worst, g);
    t.check(worst <= 1e-10, "H=" + fmt(h) + " max |T2+T4-V| " + fmt(worst, 2));
    const auto e = mean_and_stderr(prod);
    t.check(std::abs(e.mean) <= 5.0 * e.se, "H=" + fmt(h) + " E[T2 T4] " + fmt(e.mean, 3) + " (se " + fmt(e.se, 2) + ")");
  }
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// 10. Identical output for different worker counts.
void determinism(Tally& t, const AcceptanceOptions& opt) {
  std::vector<std::string> csv;
  for (unsigned workers : {1u, 8u}) {
    auto res = run_theorem2(theorem2_config(0.6, opt.seed, workers));
    const auto dir = opt.scratch / ("determinism-w" + std::to_string(workers));
    const auto files = write_outputs(res, dir, 0.0);
    csv.push_back(read_bytes(files.csv));
  }
  t.check(!csv[0].empty() && csv[0] == csv[1],
          "rates.csv with 1 and 8 workers: " + std::string(csv[0] == csv[1] ? "identical" : "different") + " (" +
              std::to_string(csv[0].size()) + " bytes)");
}

}  // namespace

std::string criterion_title(int id) {
  switch (id) {
    case 1: return "kernel normalization";
    case 2: return "Rosenblatt covariance";
    case 3: return "correlation structure";
    case 4: return "independent-regime moments";
    case 5: return "diagonal coupling rate";
    case 6: return "off-diagonal rate";
    case 7: return "GOE trend proxy";
    case 8: return "chaos algebra";
    case 9: return "decomposition identities";
    case 10: return "determinism";
  }
  throw DomainError("no acceptance criterion " + std::to_string(id));
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  CriterionResult r;
  r.id = id;
  r.title = criterion_title(id);
  r.pass = true;
  Tally t{r};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: kernel_normalization(t, options); break;
      case 2: rosenblatt_covariance(t, options); break;
      case 3: correlation_structure(t, options); break;
      case 4: independent_moments(t, options); break;
      case 5: theorem2_rate(t, options, "diag_coupling_sq_slope"); break;
      case 6: theorem2_rate(t, options, "offdiag_sq_slope"); break;
      case 7: theorem1_trend(t, options); break;
      case 8: chaos_algebra(t, options); break;
      case 9: decomposition(t, options); break;
      case 10: determinism(t, options); break;
    }
  } catch (const std::exception& e) {
    t.check(false, std::string("error: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::string line = std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ":";
  for (std::size_t i = 0; i < r.details.size(); ++i) line += (i == 0 ? " " : "; ") + r.details[i];
  line += " (" + fmt(r.seconds, 3) + " s)";
  return line;
}

}  // namespace cw::harness

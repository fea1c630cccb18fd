#include "cw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "cw/errors.hpp"
#include "cw/parallel.hpp"

namespace cw::metrics {

SampleSet::SampleSet(std::size_t dims, std::vector<double> data, std::string label, std::uint64_t seed)
    : dims_(dims), data_(std::move(data)), label_(std::move(label)), seed_(seed) {
  if (dims_ == 0) throw DomainError("SampleSet: dims must be positive");
  if (data_.size() % dims_ != 0) throw DomainError("SampleSet: data length is not a multiple of dims");
  if (replicas() < 2) throw DomainError("SampleSet: needs at least two replicas");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("SampleSet: non-finite sample");
  }
}

std::vector<double> SampleSet::column(std::size_t c) const {
  if (c >= dims_) throw DomainError("SampleSet: column out of range");
  std::vector<double> out(replicas());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = data_[r * dims_ + c];
  return out;
}

double w1_exact_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("w1_exact_1d: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x.size() == y.size()) {
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = std::abs(x[i] - y[i]);
    return pairwise_sum(diff) / static_cast<double>(x.size());
  }
  // Integrate |Q_a(p) - Q_b(p)| over the merged breakpoints i/na and j/nb,
  // kept as integer numerators over na * nb to avoid rounding in the merge.
  const std::uint64_t na = x.size();
  const std::uint64_t nb = y.size();
  std::uint64_t i = 0, j = 0, pos = 0;
  std::vector<double> pieces;
  pieces.reserve(x.size() + y.size());
  while (i < na && j < nb) {
    const std::uint64_t next_a = (i + 1) * nb;
    const std::uint64_t next_b = (j + 1) * na;
    const std::uint64_t next = std::min(next_a, next_b);
    pieces.push_back(static_cast<double>(next - pos) * std::abs(x[i] - y[j]));
    pos = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return pairwise_sum(pieces) / (static_cast<double>(na) * static_cast<double>(nb));
}

double w1_exact_1d(const SampleSet& a, const SampleSet& b) {
  if (a.dims() != 1 || b.dims() != 1) throw DomainError("w1_exact_1d: samples must be one-dimensional");
  return w1_exact_1d(a.data(), b.data());
}

double w1_gaussian_ref_1d(std::span<const double> a, double mean, double var, std::size_t grid) {
  if (!(var > 0.0)) throw DomainError("w1_gaussian_ref_1d: variance must be positive");
  if (a.empty()) throw DomainError("w1_gaussian_ref_1d: empty sample");
  if (grid < 2) throw DomainError("w1_gaussian_ref_1d: quantile grid needs at least two points");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double r = static_cast<double>(x.size());
  const double lo = 1.0 / (2.0 * r);
  const double hi = 1.0 - lo;
  const boost::math::normal_distribution<double> normal(mean, std::sqrt(var));
  std::vector<double> diff(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    const double p = std::clamp((static_cast<double>(k) + 0.5) / static_cast<double>(grid), lo, hi);
    const auto idx = std::min(x.size() - 1, static_cast<std::size_t>(std::ceil(p * r)) - 1);
    diff[k] = std::abs(x[idx] - boost::math::quantile(normal, p));
  }
  return pairwise_sum(diff) / static_cast<double>(grid);
}

std::vector<double> sliced_direction(std::size_t dims, const SlicedOptions& options, std::size_t r) {
  Stream s = StreamFactory(options.seed).stream(Purpose::directions, options.index, r);
  std::vector<double> theta(dims);
  double norm = 0.0;
  do {
    s.fill_normal(theta);
    norm = 0.0;
    for (double v : theta) norm += v * v;
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& v : theta) v /= norm;
  return theta;
}

namespace {

std::vector<double> project(const SampleSet& a, std::span<const double> theta) {
  std::vector<double> out(a.replicas());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto row = a.row(r);
    double acc = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) acc += row[k] * theta[k];
    out[r] = acc;
  }
  return out;
}

template <class Fn>
double average_over_directions(std::size_t dims, const SlicedOptions& options, Fn&& per_direction) {
  if (options.directions == 0) throw DomainError("sliced_w1: needs at least one direction");
  std::vector<double> values(options.directions);
  parallel_for(options.directions, options.workers, [&](std::size_t r) {
    values[r] = per_direction(sliced_direction(dims, options, r));
  });
  return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace

double sliced_w1(const SampleSet& a, const SampleSet& b, const SlicedOptions& options) {
  if (a.dims() != b.dims()) throw DomainError("sliced_w1: dimension mismatch");
  return average_over_directions(a.dims(), options, [&](const std::vector<double>& theta) {
    return w1_exact_1d(project(a, theta), project(b, theta));
  });
}

double sliced_w1_gaussian(const SampleSet& a, const Eigen::MatrixXd& cov, const SlicedOptions& options,
                          std::size_t grid) {
  const auto k = static_cast<Eigen::Index>(a.dims());
  if (cov.rows() != k || cov.cols() != k) throw DomainError("sliced_w1_gaussian: covariance dimension mismatch");
  return average_over_directions(a.dims(), options, [&](const std::vector<double>& theta) {
    Eigen::Map<const Eigen::VectorXd> t(theta.data(), k);
    return w1_gaussian_ref_1d(project(a, theta), 0.0, t.dot(cov * t), grid);
  });
}

Estimate moment_hat(std::span<const double> a, int p) {
  if (a.size() < 2) throw DomainError("moment_hat: needs at least two samples");
  if (p < 1) throw DomainError("moment_hat: order must be positive");
  // For a sample mean the jackknife pseudo-values are the summands themselves,
  // so the jackknife error reduces to sd / sqrt(n).
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = std::pow(a[i], p);
  const auto m = mean_and_stderr(v);
  return {m.mean, m.se};
}

PowerFit fit_power_law(std::span<const double> ds, std::span<const double> ys, std::span<const double> stderrs) {
  const std::size_t k = ds.size();
  if (k < 3) throw DomainError("fit_power_law: needs at least three points");
  if (ys.size() != k || (!stderrs.empty() && stderrs.size() != k)) {
    throw DomainError("fit_power_law: length mismatch");
  }
  bool weighted = !stderrs.empty();
  for (std::size_t i = 0; i < k; ++i) {
    if (!(ds[i] > 0.0)) throw DomainError("fit_power_law: d must be positive");
    if (!(ys[i] > 0.0) || !std::isfinite(ys[i])) throw DomainError("fit_power_law: y must be positive and finite");
    if (weighted && !(stderrs[i] > 0.0)) weighted = false;
  }
  // log y_i - log y_0 from mantissas and binary exponents, so a common scale
  // factor cancels before any rounding can touch the slope.
  int e0 = 0;
  const double m0 = std::frexp(ys[0], &e0);
  const double lm0 = std::log(m0);
  std::vector<double> x(k), y(k), w(k);
  for (std::size_t i = 0; i < k; ++i) {
    int e = 0;
    const double m = std::frexp(ys[i], &e);
    x[i] = std::log(ds[i]);
    y[i] = (std::log(m) - lm0) + static_cast<double>(e - e0) * std::numbers::ln2;
    if (weighted) {
      const double rel = stderrs[i] / ys[i];
      w[i] = 1.0 / (rel * rel);
    } else {
      w[i] = 1.0;
    }
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_power_law: d values must not all coincide");
  PowerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = (ybar - fit.slope * xbar) + std::log(ys[0]);
  if (weighted) {
    fit.slope_stderr = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = y[i] - ybar - fit.slope * (x[i] - xbar);
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  }
  return fit;
}

double hs_norm(const Eigen::MatrixXd& m) { return m.norm(); }

const RateFit& RateReport::fit_metric(const std::string& metric) {
  std::vector<double> ds, ys, ses;
  for (const auto& row : rows) {
    if (row.metric != metric) continue;
    ds.push_back(static_cast<double>(row.d));
    ys.push_back(row.estimate);
    ses.push_back(row.stderr_est);
  }
  RateFit f;
  f.metric = metric;
  f.fit = fit_power_law(ds, ys, ses);
  f.points = ds.size();
  auto it = std::find_if(fits.begin(), fits.end(), [&](const RateFit& r) { return r.metric == metric; });
  if (it != fits.end()) {
    *it = f;
    return *it;
  }
  fits.push_back(f);
  return fits.back();
}

const RateFit* RateReport::find_fit(const std::string& metric) const {
  for (const auto& f : fits) {
    if (f.metric == metric) return &f;
  }
  return nullptr;
}

}  // namespace cw::metrics

// chaoswishart: rate experiments, moment checks, kernel diagnostics and the acceptance suite.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cw/acceptance.hpp"
#include "cw/config.hpp"
#include "cw/errors.hpp"
#include "cw/experiments.hpp"
#include "cw/persist.hpp"

namespace {

using namespace cw::harness;

constexpr int kExitConfig = 2;
constexpr int kExitSelftest = 3;

// Flag values as given on the command line, keyed like the config file.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::string config_path;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option("--" + key, values[key], help);
  }
  Settings given(CLI::App* app) const {
    Settings s;
    for (const auto& [key, value] : values) {
      if (app->count("--" + key) > 0) s[key] = value;
    }
    return s;
  }
};

void add_common(CLI::App* app, FlagSet& flags) {
  app->add_option("--config,--manifest", flags.config_path,
                  "settings file: key = value lines, or a manifest.json from an earlier run");
  flags.add(app, "seed", "master seed (required)");
  flags.add(app, "out", "output directory (default results)");
  flags.add(app, "workers", "worker threads, 0 = all cores (default 0)");
}

void add_entry_flags(CLI::App* app, FlagSet& flags) {
  flags.add(app, "n", "matrix size n");
  flags.add(app, "d-list", "comma-separated increasing list of d");
  flags.add(app, "q", "chaos order, or one order per row");
  flags.add(app, "reps", "Monte Carlo replicas per d");
  flags.add(app, "block-dim", "basis vectors per entry block");
}

ExperimentConfig build_config(ExperimentKind kind, CLI::App* app, const FlagSet& flags) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.out_dir = "results";
  cfg.workers = 0;
  if (!flags.config_path.empty()) apply_settings(cfg, read_settings(flags.config_path));
  apply_settings(cfg, flags.given(app));
  if (cfg.kind != kind && !(kind == ExperimentKind::theorem1 && cfg.kind == ExperimentKind::theorem2)) {
    throw cw::ConfigError("settings describe a " + to_string(cfg.kind) + " run, not " + to_string(kind));
  }
  validate(cfg);
  return cfg;
}

void print_summary(const ExperimentResult& res, const WrittenFiles& files) {
  for (const auto& r : res.report.rows) {
    std::printf("%-12s d=%-6zu %-30s %14.6g  +- %.3g\n", r.experiment.c_str(), r.d, r.metric.c_str(), r.estimate,
                r.stderr_est);
  }
  for (const auto& f : res.report.fits) {
    std::printf("fit %-30s slope %.4f +- %.4f (%zu points)\n", f.metric.c_str(), f.fit.slope, f.fit.slope_stderr,
                f.points);
  }
  for (const auto& c : res.checks) std::printf("%s %s: %s\n", c.pass ? "[PASS]" : "[FAIL]", c.name.c_str(), c.detail.c_str());
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("fingerprint %s\nwrote %s, %s, %s\n", res.report.fingerprint.c_str(), files.csv.string().c_str(),
              files.report.string().c_str(), files.manifest.string().c_str());
}

int run_and_write(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto res = run_experiment(cfg);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto files = write_outputs(res, cfg.out_dir, total);
  print_summary(res, files);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wishart matrices with Wiener-chaos entries: rate experiments and checks"};
  app.require_subcommand(1);

  FlagSet rates_flags, moments_flags, diag_flags;
  auto* rates = app.add_subcommand("rates", "rate experiment for the independent (1) or correlated (2) regime");
  add_common(rates, rates_flags);
  add_entry_flags(rates, rates_flags);
  rates_flags.add(rates, "theorem", "1 = independent chaos entries, 2 = Rosenblatt increments");
  rates_flags.add(rates, "hurst", "Hurst index in (1/2, 1) for --theorem 2");
  rates_flags.add(rates, "grid-ratio", "kernel grid cells per increment (default 8)");
  rates_flags.add(rates, "directions", "sliced W1 directions (default 128)");
  rates_flags.add(rates, "quantile-grid", "quantile grid for Gaussian W1 (default 4096)");
  rates_flags.add(rates, "bootstrap", "bootstrap resamples for W1 errors (default 32)");

  auto* moments = app.add_subcommand("moments", "second moments of the renormalized Wishart entries");
  add_common(moments, moments_flags);
  add_entry_flags(moments, moments_flags);

  auto* diag = app.add_subcommand("kernel-diag", "variance of Z_1 on kernel grids of increasing size");
  add_common(diag, diag_flags);
  diag_flags.add(diag, "hurst", "Hurst index in (1/2, 1)");
  diag_flags.add(diag, "m-list", "comma-separated increasing list of cell counts");
  diag_flags.add(diag, "grid", "projected, matched or both (default both)");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  std::vector<int> criteria;
  AcceptanceOptions acc;
  std::string scratch;
  selftest->add_option("--criteria", criteria, "criteria to run (default all)")->delimiter(',');
  selftest->add_option("--workers", acc.workers, "worker threads (default 1)");
  selftest->add_option("--seed", acc.seed, "master seed (default 42)");
  selftest->add_option("--scratch", scratch, "scratch directory for run outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*rates) {
      auto cfg = build_config(ExperimentKind::theorem1, rates, rates_flags);
      if (!rates_flags.given(rates).count("theorem") && rates_flags.config_path.empty()) {
        throw cw::ConfigError("--theorem is required");
      }
      return run_and_write(cfg);
    }
    if (*moments) return run_and_write(build_config(ExperimentKind::moments, moments, moments_flags));
    if (*diag) return run_and_write(build_config(ExperimentKind::kernel_diag, diag, diag_flags));
    if (*selftest) {
      if (!scratch.empty()) acc.scratch = scratch;
      if (criteria.empty()) {
        for (int i = 1; i <= kCriterionCount; ++i) criteria.push_back(i);
      }
      bool ok = true;
      for (int id : criteria) {
        if (id < 1 || id > kCriterionCount) throw cw::ConfigError("no acceptance criterion " + std::to_string(id));
      }
      for (int id : criteria) {
        const auto r = run_criterion(id, acc);
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
      }
      return ok ? 0 : kExitSelftest;
    }
  } catch (const cw::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

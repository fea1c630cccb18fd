#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cw/config.hpp"
#include "cw/errors.hpp"
#include "cw/experiments.hpp"
#include "cw/persist.hpp"

using namespace cw;
using namespace cw::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "chaoswishart-harness-test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig small_theorem1() {
  ExperimentConfig c;
  c.kind = ExperimentKind::theorem1;
  c.n = 2;
  c.d_list = {4, 8, 16};
  c.replicas = 100;
  c.directions = 8;
  c.bootstrap = 4;
  c.seed = 5;
  return c;
}

ExperimentConfig small_theorem2(double h) {
  ExperimentConfig c;
  c.kind = ExperimentKind::theorem2;
  c.n = 2;
  c.d_list = {4, 8, 16};
  c.hurst = h;
  c.replicas = 100;
  c.directions = 8;
  c.grid_ratio = 4;
  c.seed = 6;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  auto c = small_theorem1();
  CHECK_NOTHROW(validate(c));
  c.seed.reset();
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_theorem1();
  c.d_list = {4, 8};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.d_list = {8, 4, 16};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_theorem1();
  c.replicas = 99;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_theorem1();
  c.orders = {13};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_theorem1();
  c.orders = {1, 2, 3};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.orders = {1, 2};
  CHECK_NOTHROW(validate(c));
  CHECK(c.row_orders() == std::vector<int>{1, 2});
  auto t = small_theorem2(0.5);
  CHECK_THROWS_AS(validate(t), ConfigError);
  t.hurst = 0.7;
  CHECK_NOTHROW(validate(t));
}

TEST_CASE("settings parsing") {
  const auto dir = scratch();
  {
    std::ofstream f(dir / "run.conf");
    f << "# comment\nexperiment = theorem2\nhurst = 0.8\nd-list = 8,16,32\nreps = 200\nseed = 11\n";
  }
  ExperimentConfig c;
  apply_settings(c, read_settings(dir / "run.conf"));
  CHECK(c.kind == ExperimentKind::theorem2);
  CHECK(c.hurst == 0.8);
  CHECK(c.d_list == std::vector<std::size_t>{8, 16, 32});
  CHECK(c.replicas == 200);
  CHECK(*c.seed == 11);
  {
    std::ofstream f(dir / "run.json");
    f << R"({"config": {"experiment": "moments", "q": [2], "seed": 3, "d-list": [16], "reps": 500}})";
  }
  ExperimentConfig j;
  apply_settings(j, read_settings(dir / "run.json"));
  CHECK(j.kind == ExperimentKind::moments);
  CHECK(j.orders == std::vector<int>{2});
  CHECK(j.d_list == std::vector<std::size_t>{16});
  CHECK(*j.seed == 3);
  CHECK_NOTHROW(validate(j));
  CHECK_THROWS_AS(apply_settings(c, Settings{{"bogus", "1"}}), ConfigError);
  CHECK_THROWS_AS(apply_settings(c, Settings{{"reps", "12x"}}), ConfigError);
  CHECK_THROWS_AS(apply_settings(c, Settings{{"hurst", "abc"}}), ConfigError);
  CHECK_THROWS_AS(read_settings(dir / "does-not-exist.conf"), ConfigError);
  CHECK(parse_size_list("1, 2,3") == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_int_list("1,,2"), ConfigError);
}

TEST_CASE("fingerprints and CSV") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  metrics::RateReport r;
  r.rows.push_back({"theorem1", 8, 2, "x", 0.125, 0.5, 100, 5});
  CHECK(csv_text(r) == "experiment,d,n,metric,estimate,stderr,replicas,seed\ntheorem1,8,2,x,0.125,0.5,100,5\n");
  const auto c = small_theorem1();
  auto c2 = c;
  c2.workers = 7;
  c2.out_dir = "elsewhere";
  CHECK(report_fingerprint(c, "x") == report_fingerprint(c2, "x"));
  auto c3 = c;
  c3.directions = 9;
  CHECK(report_fingerprint(c, "x") != report_fingerprint(c3, "x"));
  CHECK(report_fingerprint(c, "x").size() == 16);
}

TEST_CASE("runs are independent of the worker count") {
  for (auto cfg : {small_theorem1(), small_theorem2(0.65)}) {
    auto a = cfg, b = cfg;
    a.workers = 1;
    b.workers = 3;
    auto ra = run_experiment(a), rb = run_experiment(b);
    const auto da = scratch() / "w1", db = scratch() / "w3";
    fs::create_directories(da);
    fs::create_directories(db);
    write_outputs(ra, da, 0.0);
    write_outputs(rb, db, 0.0);
    CHECK(slurp(da / "rates.csv") == slurp(db / "rates.csv"));
    CHECK(ra.report.fingerprint == rb.report.fingerprint);
  }
}

TEST_CASE("outputs and manifest round trip") {
  auto cfg = small_theorem1();
  auto res = run_experiment(cfg);
  const auto dir = scratch() / "rt";
  fs::create_directories(dir);
  const auto files = write_outputs(res, dir, 1.5);
  const auto manifest = nlohmann::json::parse(slurp(files.manifest));
  CHECK(manifest["artifact_version"] == kArtifactVersion);
  CHECK(manifest["rng"] == kRngName);
  CHECK(manifest["fingerprint"] == res.report.fingerprint);
  const auto report = nlohmann::json::parse(slurp(files.report));
  CHECK(report["fingerprint"] == res.report.fingerprint);
  CHECK(report["rows"].size() == res.report.rows.size());

  ExperimentConfig again;
  apply_settings(again, read_settings(files.manifest));
  CHECK(to_json(again) == to_json(cfg));
  auto res2 = run_experiment(again);
  CHECK(csv_text(res2.report) == csv_text(res.report));
}

TEST_CASE("theorem 2 at the boundary Hurst index") {
  CHECK(std::isnan(theorem2_exponent(0.75)));
  CHECK(theorem2_exponent(0.6) == doctest::Approx(-0.2));
  CHECK(theorem2_exponent(0.9) == doctest::Approx(-0.2));
  auto res = run_experiment(small_theorem2(0.75));
  std::size_t refs = 0;
  for (const auto& row : res.report.rows) {
    if (row.metric == "reference_sqrtlog") {
      ++refs;
      const double d = static_cast<double>(row.d);
      CHECK(row.estimate == doctest::Approx(std::sqrt(std::log(d)) * std::pow(d, -0.25)));
    }
  }
  CHECK(refs == 3);
  CHECK(res.report.find_fit("diag_coupling_sq") == nullptr);
}

TEST_CASE("moments run") {
  ExperimentConfig c;
  c.kind = ExperimentKind::moments;
  c.d_list = {32};
  c.orders = {2};
  c.replicas = 4000;
  c.seed = 8;
  const auto res = run_experiment(c);
  bool seen = false;
  for (const auto& row : res.report.rows) {
    if (row.metric == "diag_second_moment") {
      seen = true;
      CHECK(std::abs(row.estimate - 14.0) < 5 * row.stderr_est);
    }
  }
  CHECK(seen);
}

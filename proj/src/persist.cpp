#include "cw/persist.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "cw/errors.hpp"

namespace cw::harness {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << text;
  if (!os) throw ResourceError("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json fit_json(const metrics::RateFit& f) {
  return {{"metric", f.metric},
          {"slope", f.fit.slope},
          {"slope_stderr", f.fit.slope_stderr},
          {"intercept", f.fit.intercept},
          {"points", f.points}};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string csv_text(const metrics::RateReport& report) {
  std::string out = "experiment,d,n,metric,estimate,stderr,replicas,seed\n";
  for (const auto& r : report.rows) {
    out += r.experiment + "," + std::to_string(r.d) + "," + std::to_string(r.n) + "," + r.metric + "," +
           number(r.estimate) + "," + number(r.stderr_est) + "," + std::to_string(r.replicas) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string report_fingerprint(const ExperimentConfig& cfg, const std::string& csv) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump() + "\n" + csv)));
  return buf;
}

nlohmann::json report_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = to_json(result.config);
  j["fingerprint"] = result.report.fingerprint;
  auto rows = nlohmann::json::array();
  for (const auto& r : result.report.rows) {
    rows.push_back({{"d", r.d},
                    {"n", r.n},
                    {"metric", r.metric},
                    {"estimate", r.estimate},
                    {"stderr", r.stderr_est},
                    {"replicas", r.replicas}});
  }
  j["rows"] = rows;
  auto fits = nlohmann::json::array();
  for (const auto& f : result.report.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;
  auto checks = nlohmann::json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["checks"] = checks;
  j["warnings"] = result.warnings;
  return j;
}

nlohmann::json manifest_json(const ExperimentResult& result, double total_seconds) {
  nlohmann::json j;
  j["config"] = to_json(result.config);
  j["artifact_version"] = kArtifactVersion;
  j["rng"] = kRngName;
  j["timestamp"] = utc_timestamp();
  j["workers"] = result.config.workers;
  j["fingerprint"] = result.report.fingerprint;
  auto stages = nlohmann::json::array();
  for (const auto& s : result.stages) stages.push_back({{"stage", s.name}, {"seconds", s.seconds}});
  j["stages"] = stages;
  j["total_seconds"] = total_seconds;
  j["substreams"] = result.substreams;
  return j;
}

WrittenFiles write_outputs(ExperimentResult& result, const std::filesystem::path& dir, double total_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto csv = csv_text(result.report);
  result.report.fingerprint = report_fingerprint(result.config, csv);
  WrittenFiles files{dir / "rates.csv", dir / "report.json", dir / "manifest.json"};
  write_file(files.csv, csv);
  write_file(files.report, report_json(result).dump(2) + "\n");
  write_file(files.manifest, manifest_json(result, total_seconds).dump(2) + "\n");
  return files;
}

}  // namespace cw::harness

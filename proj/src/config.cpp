#include "cw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cw/chaos.hpp"
#include "cw/errors.hpp"

namespace cw::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": cannot parse '" + text + "'");
  }
  return value;
}

ExperimentKind parse_kind(const std::string& text) {
  const auto t = trim(text);
  if (t == "1" || t == "theorem1") return ExperimentKind::theorem1;
  if (t == "2" || t == "theorem2") return ExperimentKind::theorem2;
  if (t == "moments") return ExperimentKind::moments;
  if (t == "kernel-diag") return ExperimentKind::kernel_diag;
  throw ConfigError("experiment: unknown kind '" + text + "'");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::theorem1: return "theorem1";
    case ExperimentKind::theorem2: return "theorem2";
    case ExperimentKind::moments: return "moments";
    case ExperimentKind::kernel_diag: return "kernel-diag";
  }
  return "unknown";
}

std::vector<int> ExperimentConfig::row_orders() const {
  if (orders.size() == 1) return std::vector<int>(n, orders.front());
  return orders;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw ConfigError("list '" + text + "' has an empty item");
    out.push_back(parse_number<std::size_t>("list", item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw ConfigError("list '" + text + "' has an empty item");
    out.push_back(parse_number<int>("list", item));
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("seed is required");
  if (cfg.d_list.empty()) throw ConfigError("d-list is empty");
  for (std::size_t i = 1; i < cfg.d_list.size(); ++i) {
    if (cfg.d_list[i] <= cfg.d_list[i - 1]) throw ConfigError("d-list must be strictly increasing");
  }
  const bool fits = cfg.kind != ExperimentKind::moments;
  if (fits && cfg.d_list.size() < 3) throw ConfigError("d-list needs at least three entries for a rate fit");
  if (cfg.d_list.front() < 2) throw ConfigError("d-list entries must be at least 2");
  if (cfg.kind != ExperimentKind::kernel_diag) {
    if (cfg.replicas < 100) throw ConfigError("reps must be at least 100");
    if (cfg.n < 1) throw ConfigError("n must be positive");
    if (cfg.n > 64) throw ConfigError("n must be at most 64");
  }
  if (cfg.kind == ExperimentKind::theorem2 && cfg.n < 2) throw ConfigError("theorem 2 needs n >= 2");
  if (cfg.kind == ExperimentKind::theorem2 || cfg.kind == ExperimentKind::kernel_diag) {
    if (!(cfg.hurst > 0.5 && cfg.hurst < 1.0)) throw ConfigError("hurst must lie in (0.5, 1)");
  }
  if (cfg.kind == ExperimentKind::theorem1 || cfg.kind == ExperimentKind::moments) {
    if (cfg.orders.empty()) throw ConfigError("q must list at least one chaos order");
    if (cfg.orders.size() != 1 && cfg.orders.size() != cfg.n) throw ConfigError("q must give one order or one per row");
    for (int q : cfg.orders) {
      if (q < 1 || q > chaos::kMaxRankOneOrder) throw ConfigError("q must lie in [1, 12]");
    }
    if (cfg.block_dim < 1) throw ConfigError("block-dim must be positive");
  }
  if (cfg.grid_ratio < 1) throw ConfigError("grid-ratio must be positive");
  if (cfg.directions < 1) throw ConfigError("directions must be positive");
  if (cfg.quantile_grid < 2) throw ConfigError("quantile-grid must be at least 2");
  if (cfg.bootstrap < 2) throw ConfigError("bootstrap must be at least 2");
  if (cfg.grid != "projected" && cfg.grid != "matched" && cfg.grid != "both") {
    throw ConfigError("grid must be projected, matched or both");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = to_string(cfg.kind);
  j["n"] = cfg.n;
  j["d-list"] = cfg.d_list;
  j["q"] = cfg.orders;
  j["hurst"] = cfg.hurst;
  j["reps"] = cfg.replicas;
  j["grid-ratio"] = cfg.grid_ratio;
  j["directions"] = cfg.directions;
  j["quantile-grid"] = cfg.quantile_grid;
  j["bootstrap"] = cfg.bootstrap;
  j["block-dim"] = cfg.block_dim;
  j["grid"] = cfg.grid;
  if (cfg.seed) j["seed"] = *cfg.seed;
  return j;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings read_settings_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  if (j.contains("config")) j = j["config"];
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  Settings out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out[key] = joined;
    } else if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_number_float()) {
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      out[key] = os.str();
    } else {
      out[key] = value.dump();
    }
  }
  return out;
}

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  char c = 0;
  while (is.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  return c == '{' ? read_settings_json(path) : read_settings_file(path);
}

void apply_settings(ExperimentConfig& cfg, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "experiment" || key == "theorem") {
      cfg.kind = parse_kind(value);
    } else if (key == "n") {
      cfg.n = parse_number<std::size_t>(key, value);
    } else if (key == "d-list" || key == "m-list") {
      cfg.d_list = parse_size_list(value);
    } else if (key == "q") {
      cfg.orders = parse_int_list(value);
    } else if (key == "hurst") {
      cfg.hurst = parse_number<double>(key, value);
    } else if (key == "reps") {
      cfg.replicas = parse_number<std::size_t>(key, value);
    } else if (key == "grid-ratio") {
      cfg.grid_ratio = parse_number<std::size_t>(key, value);
    } else if (key == "directions") {
      cfg.directions = parse_number<std::size_t>(key, value);
    } else if (key == "quantile-grid") {
      cfg.quantile_grid = parse_number<std::size_t>(key, value);
    } else if (key == "bootstrap") {
      cfg.bootstrap = parse_number<std::size_t>(key, value);
    } else if (key == "block-dim") {
      cfg.block_dim = parse_number<std::size_t>(key, value);
    } else if (key == "grid") {
      cfg.grid = trim(value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out") {
      cfg.out_dir = trim(value);
    } else if (key == "workers") {
      cfg.workers = parse_number<unsigned>(key, value);
    } else {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
}

}  // namespace cw::harness

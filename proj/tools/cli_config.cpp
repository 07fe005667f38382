#include "cli_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>

namespace dlbsim::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "processes",      "seed",          "flops_per_sec", "doubles_per_sec",
    "sr_ratio",       "latency_sec",   "return_fraction",
    "w_threshold",    "w_low",         "w_high",
    "delta",          "n_tries",       "strategy",      "dlb_enabled",
    "sample_interval", "blocks",       "block_size",    "grid_p",
    "grid_q",
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::invalid_argument("config key '" + key + "': bad boolean '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (kKnownKeys.count(key) == 0 && key.rfind("slowdown.", 0) != 0) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                  "'");
    }
    if (!keys.emplace(key, value).second) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
    }
  }
  return keys;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& keys) {
  bool saw_r = false, saw_ratio = false;
  for (const auto& [key, value] : keys) {
    if (key == "processes") {
      cfg.sim.process_count = static_cast<int>(to_int(key, value));
    } else if (key == "seed") {
      cfg.sim.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "flops_per_sec") {
      cfg.sim.machine.flops_per_sec = to_double(key, value);
    } else if (key == "doubles_per_sec") {
      cfg.sim.machine.doubles_per_sec = to_double(key, value);
      saw_r = true;
    } else if (key == "sr_ratio") {
      saw_ratio = true;
      const double ratio = to_double(key, value);
      if (!(ratio > 0)) throw std::invalid_argument("sr_ratio must be > 0");
      cfg.sim.machine.doubles_per_sec = cfg.sim.machine.flops_per_sec / ratio;
    } else if (key == "latency_sec") {
      cfg.sim.machine.latency_sec = to_double(key, value);
    } else if (key == "return_fraction") {
      cfg.sim.machine.return_fraction = to_double(key, value);
    } else if (key == "w_threshold") {
      cfg.w_threshold = static_cast<int>(to_int(key, value));
    } else if (key == "w_low") {
      cfg.w_low = static_cast<int>(to_int(key, value));
    } else if (key == "w_high") {
      cfg.w_high = static_cast<int>(to_int(key, value));
    } else if (key == "delta") {
      cfg.sim.dlb.delta_sec = to_double(key, value);
    } else if (key == "n_tries") {
      cfg.sim.dlb.n_tries = static_cast<int>(to_int(key, value));
    } else if (key == "strategy") {
      cfg.sim.dlb.strategy = strategy_from_name(value);
    } else if (key == "dlb_enabled") {
      cfg.sim.dlb.enabled = to_bool(key, value);
    } else if (key == "sample_interval") {
      cfg.sim.sample_interval_sec = to_double(key, value);
    } else if (key == "blocks") {
      cfg.cholesky.blocks = static_cast<int>(to_int(key, value));
    } else if (key == "block_size") {
      cfg.cholesky.block_size = static_cast<int>(to_int(key, value));
    } else if (key == "grid_p") {
      cfg.cholesky.grid_rows = static_cast<int>(to_int(key, value));
    } else if (key == "grid_q") {
      cfg.cholesky.grid_cols = static_cast<int>(to_int(key, value));
    } else if (key.rfind("slowdown.", 0) == 0) {
      const ProcessId pid = static_cast<ProcessId>(to_int(key, key.substr(9)));
      cfg.sim.slowdown[pid] = to_double(key, value);
    } else {
      throw std::invalid_argument("unknown key '" + key + "'");
    }
  }
  if (saw_r && saw_ratio) {
    throw std::invalid_argument("config sets both doubles_per_sec and sr_ratio");
  }
}

void RunConfig::finalize() {
  if ((w_low >= 0) != (w_high >= 0)) {
    throw std::invalid_argument("w_low and w_high must be given together");
  }
  sim.dlb.thresholds =
      (w_low >= 0) ? Thresholds::with_gap(w_low, w_high) : Thresholds(w_threshold);
  sim.dlb.validate();
  sim.machine.validate();
}

}  // namespace dlbsim::cli

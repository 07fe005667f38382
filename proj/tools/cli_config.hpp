#pragma once

#include <map>
#include <string>

#include "dlbsim/cholesky.hpp"
#include "dlbsim/simulator.hpp"

namespace dlbsim::cli {

// Everything a run needs; flat key=value config files and command-line flags
// both land here. Precedence: flags > config file > defaults.
struct RunConfig {
  SimConfig sim;
  CholeskySpec cholesky;
  bool auto_threshold = false;

  // Threshold bookkeeping so file and flags can override each other cleanly.
  int w_threshold = 5;
  int w_low = -1;  // gap enabled when both w_low and w_high are >= 0
  int w_high = -1;

  void finalize();  // folds thresholds into sim.dlb and validates
};

// Parses a flat UTF-8 key=value file ('#' comments, blank lines allowed).
// Unknown keys are rejected by name. Returns the raw pairs in file order.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies parsed keys onto cfg. Throws std::invalid_argument on bad values or
// inconsistent combinations (e.g. both doubles_per_sec and sr_ratio).
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& keys);

}  // namespace dlbsim::cli

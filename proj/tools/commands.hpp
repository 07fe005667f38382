#pragma once

#include <string>
#include <vector>

#include "cli_config.hpp"

namespace dlbsim::cli {

struct ProbArgs {
  long long total = 10;
  std::vector<long long> busy;  // empty -> default sweep {P/10, P/4, P/2, 3P/4}
  int n_max = 10;
  std::string out_dir = ".";
};
int cmd_prob(const ProbArgs& args);

struct PairtimeArgs {
  std::vector<int> process_counts{10};
  std::vector<double> busy_fractions{0.1, 0.25, 0.5, 0.75, 0.9};
  int trials = 50;
  RunConfig cfg;
  std::string out_file = "pairtime.csv";
};
int cmd_pairtime(const PairtimeArgs& args);

struct CholeskyArgs {
  RunConfig cfg;
  bool compare = false;
  int seeds = 1;          // derived seeds for --compare sweeps
  bool emit_dag = false;  // write the DAG and skip simulation
  std::string out_prefix = "cholesky";
  std::string decision_log;  // optional jsonl path
};
int cmd_cholesky(const CholeskyArgs& args);

struct CalibrateArgs {
  RunConfig cfg;
  std::string out_file;  // optional; always printed to stdout
};
int cmd_calibrate(const CalibrateArgs& args);

}  // namespace dlbsim::cli

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "commands.hpp"
#include "dlbsim/simulator.hpp"

namespace {

using namespace dlbsim;
using namespace dlbsim::cli;

// Shared simulation flags. Command-line values override config-file keys,
// which override defaults, so each flag only lands in RunConfig when the user
// actually passed it.
struct SimFlags {
  std::string config_path;
  std::uint64_t seed = 1;
  double flops = 0, doubles = 0, sr_ratio = 0, latency = 0, return_fraction = 0;
  double delta = 0, sample_interval = 0;
  int n_tries = 0, w_threshold = 0, w_low = 0, w_high = 0;
  std::string strategy;
  bool dlb_off = false;

  CLI::Option* o_seed = nullptr;
  CLI::Option* o_flops = nullptr;
  CLI::Option* o_doubles = nullptr;
  CLI::Option* o_sr = nullptr;
  CLI::Option* o_latency = nullptr;
  CLI::Option* o_retfrac = nullptr;
  CLI::Option* o_delta = nullptr;
  CLI::Option* o_sample = nullptr;
  CLI::Option* o_tries = nullptr;
  CLI::Option* o_wt = nullptr;
  CLI::Option* o_wlow = nullptr;
  CLI::Option* o_whigh = nullptr;
  CLI::Option* o_strategy = nullptr;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key=value config file");
    o_seed = cmd.add_option("--seed", seed, "global random seed (recorded in outputs)");
    o_flops = cmd.add_option("--flops-per-sec", flops, "compute rate S");
    o_doubles = cmd.add_option("--doubles-per-sec", doubles, "transfer rate R");
    o_sr = cmd.add_option("--sr-ratio", sr_ratio, "set R as S / ratio");
    o_latency = cmd.add_option("--latency", latency, "per-message latency in seconds");
    o_retfrac = cmd.add_option("--return-fraction", return_fraction,
                               "fraction of D returned with the result");
    o_delta = cmd.add_option("--delta", delta, "waiting time between search rounds");
    o_sample = cmd.add_option("--sample-interval", sample_interval,
                              "workload sampling interval in seconds");
    o_tries = cmd.add_option("--n-tries", n_tries, "pair requests per round");
    o_wt = cmd.add_option("--w-threshold", w_threshold, "busy/idle threshold W_T");
    o_wlow = cmd.add_option("--w-low", w_low, "idle threshold of the optional gap");
    o_whigh = cmd.add_option("--w-high", w_high, "busy threshold of the optional gap");
    o_strategy = cmd.add_option("--strategy", strategy, "basic | equalizing | smart");
    cmd.add_flag("--no-dlb", dlb_off, "disable load balancing");
  }

  void apply(RunConfig& cfg) const {
    if (!config_path.empty()) apply_config(cfg, parse_config_file(config_path));
    if (o_seed->count()) cfg.sim.seed = seed;
    if (o_flops->count()) cfg.sim.machine.flops_per_sec = flops;
    if (o_doubles->count() && o_sr->count()) {
      throw std::invalid_argument("give either --doubles-per-sec or --sr-ratio, not both");
    }
    if (o_doubles->count()) cfg.sim.machine.doubles_per_sec = doubles;
    if (o_sr->count()) {
      if (!(sr_ratio > 0)) throw std::invalid_argument("--sr-ratio must be > 0");
      cfg.sim.machine.doubles_per_sec = cfg.sim.machine.flops_per_sec / sr_ratio;
    }
    if (o_latency->count()) cfg.sim.machine.latency_sec = latency;
    if (o_retfrac->count()) cfg.sim.machine.return_fraction = return_fraction;
    if (o_delta->count()) cfg.sim.dlb.delta_sec = delta;
    if (o_sample->count()) cfg.sim.sample_interval_sec = sample_interval;
    if (o_tries->count()) cfg.sim.dlb.n_tries = n_tries;
    if (o_wt->count()) cfg.w_threshold = w_threshold;
    if (o_wlow->count()) cfg.w_low = w_low;
    if (o_whigh->count()) cfg.w_high = w_high;
    if (o_strategy->count()) cfg.sim.dlb.strategy = strategy_from_name(strategy);
    if (dlb_off) cfg.sim.dlb.enabled = false;
    cfg.finalize();
  }
};

struct GridFlags {
  int blocks = 0, block_size = 0, grid_p = 0, grid_q = 0;
  CLI::Option *o_blocks = nullptr, *o_m = nullptr, *o_p = nullptr, *o_q = nullptr;

  void attach(CLI::App& cmd) {
    o_blocks = cmd.add_option("--blocks", blocks, "blocks per matrix dimension (N)");
    o_m = cmd.add_option("--block-size", block_size, "doubles per block dimension (m)");
    o_p = cmd.add_option("--grid-p", grid_p, "process grid rows");
    o_q = cmd.add_option("--grid-q", grid_q, "process grid cols");
  }

  void apply(RunConfig& cfg) const {
    if (o_blocks->count()) cfg.cholesky.blocks = blocks;
    if (o_m->count()) cfg.cholesky.block_size = block_size;
    if (o_p->count()) cfg.cholesky.grid_rows = grid_p;
    if (o_q->count()) cfg.cholesky.grid_cols = grid_q;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-migration load balancing: analytics and simulated experiments"};
  app.require_subcommand(1);

  // prob: success-probability curves of the randomized partner search.
  ProbArgs prob;
  CLI::App* prob_cmd = app.add_subcommand("prob", "emit success-probability curves as CSV");
  prob_cmd->add_option("--P", prob.total, "total process count")->required();
  prob_cmd->add_option("--K", prob.busy, "busy process count (repeatable; default sweep)");
  prob_cmd->add_option("--n-max", prob.n_max, "largest tries-per-round to tabulate");
  prob_cmd->add_option("--out", prob.out_dir, "output directory");

  // pairtime: simulated time to form busy-idle pairs.
  PairtimeArgs pairtime;
  SimFlags pairtime_flags;
  CLI::App* pair_cmd = app.add_subcommand("pairtime", "measure pairing times across P and K/P");
  pair_cmd->add_option("--P", pairtime.process_counts, "process counts (repeatable)");
  pair_cmd->add_option("--k-frac", pairtime.busy_fractions, "busy fractions (repeatable)");
  pair_cmd->add_option("--trials", pairtime.trials, "trials per (P, K) cell");
  pair_cmd->add_option("--out", pairtime.out_file, "output CSV path");
  pairtime_flags.attach(*pair_cmd);

  // cholesky: the factorization experiment.
  CholeskyArgs chol;
  SimFlags chol_flags;
  GridFlags chol_grid;
  CLI::App* chol_cmd = app.add_subcommand("cholesky", "run the block Cholesky benchmark");
  chol_grid.attach(*chol_cmd);
  chol_flags.attach(*chol_cmd);
  chol_cmd->add_flag("--compare", chol.compare, "run DLB on and off and report the improvement");
  chol_cmd->add_option("--seeds", chol.seeds, "derived seeds for --compare");
  chol_cmd->add_flag("--auto-threshold", chol.cfg.auto_threshold,
                     "calibrate W_T from a DLB-off run (half the peak workload)");
  chol_cmd->add_flag("--emit-dag", chol.emit_dag, "write the task graph and skip simulation");
  chol_cmd->add_option("--out", chol.out_prefix, "output path prefix");
  chol_cmd->add_option("--decision-log", chol.decision_log, "write protocol decisions as JSONL");

  // calibrate: DLB-off run, prints the calibrated threshold.
  CalibrateArgs calib;
  SimFlags calib_flags;
  GridFlags calib_grid;
  CLI::App* calib_cmd = app.add_subcommand("calibrate", "derive W_T from a DLB-off run");
  calib_grid.attach(*calib_cmd);
  calib_flags.attach(*calib_cmd);
  calib_cmd->add_option("--out", calib.out_file, "also write the JSON result here");

  try {
    app.parse(argc, argv);

    if (prob_cmd->parsed()) return cmd_prob(prob);
    if (pair_cmd->parsed()) {
      pairtime_flags.apply(pairtime.cfg);
      return cmd_pairtime(pairtime);
    }
    if (chol_cmd->parsed()) {
      chol_flags.apply(chol.cfg);
      chol_grid.apply(chol.cfg);
      return cmd_cholesky(chol);
    }
    if (calib_cmd->parsed()) {
      calib_flags.apply(calib.cfg);
      calib_grid.apply(calib.cfg);
      return cmd_calibrate(calib);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const dlbsim::DeadlockError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dlbsim/probability.hpp"
#include "dlbsim/rng.hpp"

namespace dlbsim::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

int cmd_prob(const ProbArgs& args) {
  std::vector<long long> sweep = args.busy;
  if (sweep.empty()) {
    const long long p = args.total;
    std::set<long long> uniq{p / 10, p / 4, p / 2, 3 * p / 4};
    sweep.assign(uniq.begin(), uniq.end());
  }
  for (long long busy : sweep) {
    const auto curve = success_curve(args.total, busy, args.n_max);
    const std::string path = args.out_dir + "/prob_P" + std::to_string(args.total) + "_K" +
                             std::to_string(busy) + ".csv";
    auto out = open_out(path);
    out << "n,success_probability\n";
    for (const auto& [n, prob] : curve) {
      out << n << ',' << fmt(prob) << '\n';
    }
    std::cout << path << '\n';
  }
  return 0;
}

int cmd_pairtime(const PairtimeArgs& args) {
  auto out = open_out(args.out_file);
  out << "P,K,k_fraction,trials,seed,mean_time_sec,max_time_sec,mean_rounds,mean_rounds_to_first_pair\n";
  for (int p : args.process_counts) {
    for (double frac : args.busy_fractions) {
      int busy = static_cast<int>(std::lround(frac * p));
      busy = std::clamp(busy, 1, p - 1);
      const PairingResult res = pairing_time_experiment(p, busy, args.cfg.sim, args.trials);
      out << p << ',' << busy << ',' << fmt(frac) << ',' << args.trials << ','
          << args.cfg.sim.seed << ',' << fmt(res.mean_time) << ',' << fmt(res.max_time) << ','
          << fmt(res.mean_rounds) << ',' << fmt(res.mean_rounds_to_first) << '\n';
    }
  }
  std::cout << args.out_file << '\n';
  return 0;
}

namespace {

void write_trace(const TraceReport& report, const std::string& prefix) {
  open_out(prefix + "_trace.json") << report.to_json();
  auto csv = open_out(prefix + "_workload.csv");
  report.write_workload_csv(csv);
}

}  // namespace

int cmd_cholesky(const CholeskyArgs& args) {
  RunConfig cfg = args.cfg;
  cfg.cholesky.validate();
  cfg.sim.process_count = cfg.cholesky.process_count();

  const TaskGraph graph = generate_dag(cfg.cholesky);

  if (args.emit_dag) {
    auto out = open_out(args.out_prefix + "_dag.jsonl");
    graph.write_jsonl(out);
    std::cout << args.out_prefix + "_dag.jsonl" << '\n';
    return 0;
  }

  if (args.cfg.auto_threshold) {
    const int wt = calibrate_threshold(graph, cfg.sim);
    cfg.sim.dlb.thresholds = Thresholds(wt);
  }
  cfg.sim.decision_log = !args.decision_log.empty();

  if (!args.compare) {
    const TraceReport report = run(graph, cfg.sim);
    write_trace(report, args.out_prefix);
    if (!args.decision_log.empty()) {
      auto log = open_out(args.decision_log);
      report.write_decision_log(log);
    }
    std::cout << args.out_prefix << "_trace.json makespan=" << fmt(report.makespan) << '\n';
    return 0;
  }

  // Paired runs, DLB on vs off, across derived seeds.
  ordered_json summary;
  summary["blocks"] = cfg.cholesky.blocks;
  summary["block_size"] = cfg.cholesky.block_size;
  summary["grid"] = {cfg.cholesky.grid_rows, cfg.cholesky.grid_cols};
  summary["strategy"] = strategy_name(cfg.sim.dlb.strategy);
  summary["w_threshold"] = cfg.sim.dlb.thresholds.busy_above();
  summary["delta"] = cfg.sim.dlb.delta_sec;
  summary["base_seed"] = cfg.sim.seed;
  ordered_json runs = ordered_json::array();
  std::vector<double> improvements;
  for (int i = 0; i < std::max(1, args.seeds); ++i) {
    SimConfig on = cfg.sim;
    on.seed = args.seeds > 1 ? derive_seed(cfg.sim.seed, static_cast<std::uint64_t>(i))
                             : cfg.sim.seed;
    on.dlb.enabled = true;
    SimConfig off = on;
    off.dlb.enabled = false;

    const TraceReport with_dlb = run(graph, on);
    const TraceReport without_dlb = run(graph, off);
    const double improvement =
        (without_dlb.makespan - with_dlb.makespan) / without_dlb.makespan;
    improvements.push_back(improvement);
    runs.push_back({{"seed", on.seed},
                    {"makespan_dlb", with_dlb.makespan},
                    {"makespan_nodlb", without_dlb.makespan},
                    {"improvement", improvement}});
    if (i == 0) {
      write_trace(with_dlb, args.out_prefix + "_dlb");
      write_trace(without_dlb, args.out_prefix + "_nodlb");
    }
  }
  summary["runs"] = std::move(runs);
  summary["median_improvement"] = median(improvements);
  open_out(args.out_prefix + "_summary.json") << summary.dump(2) << '\n';
  std::cout << args.out_prefix << "_summary.json median_improvement="
            << fmt(median(improvements)) << '\n';
  return 0;
}

int cmd_calibrate(const CalibrateArgs& args) {
  RunConfig cfg = args.cfg;
  cfg.cholesky.validate();
  cfg.sim.process_count = cfg.cholesky.process_count();
  const TaskGraph graph = generate_dag(cfg.cholesky);

  SimConfig quiet = cfg.sim;
  quiet.dlb.enabled = false;
  const TraceReport report = run(graph, quiet);
  const int wt = (report.max_workload + 1) / 2;

  ordered_json j;
  j["max_workload"] = report.max_workload;
  j["w_threshold"] = wt;
  j["seed"] = quiet.seed;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!args.out_file.empty()) open_out(args.out_file) << text;
  return 0;
}

}  // namespace dlbsim::cli

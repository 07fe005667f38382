#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlbsim/cost_model.hpp"
#include "dlbsim/dlb_protocol.hpp"
#include "dlbsim/task_graph.hpp"
#include "dlbsim/types.hpp"

namespace dlbsim {

struct SimConfig {
  int process_count = 1;  // P
  std::uint64_t seed = 1;
  MachineModel machine;
  DlbConfig dlb;
  // <= 0 derives one from the serial flop total, roughly 200 samples per run.
  double sample_interval_sec = 0;
  // Per-process compute slowdown factor >= 1 (external interference model).
  std::map<ProcessId, double> slowdown;
  bool audit = true;          // conservation and consistency checks while running
  bool decision_log = false;  // keep a per-event protocol log in the report

  double slowdown_of(ProcessId p) const;
  void validate() const;
};

struct ProcessStats {
  std::int64_t tasks_executed = 0;
  std::int64_t tasks_exported = 0;
  std::int64_t tasks_imported = 0;
  std::int64_t search_rounds = 0;
  std::int64_t pairings = 0;
  double mean_pairing_time = 0;
};

struct DecisionRecord {
  double time = 0;
  ProcessId process = 0;
  std::string event;   // "round" | "paired" | "export" | "import"
  std::string detail;  // free-form, e.g. the export decision
};

struct TraceReport {
  double makespan = 0;
  int max_workload = 0;
  std::vector<WorkloadSample> samples;
  std::vector<ProcessStats> per_process;
  std::vector<ProcessId> executed_by;  // where each task ran, indexed by id
  std::vector<DecisionRecord> decisions;
  std::uint64_t seed = 0;

  std::string to_json() const;
  void write_workload_csv(std::ostream& out) const;
  void write_decision_log(std::ostream& out) const;
};

// Event-queue exhaustion with unfinished tasks. what() names the stuck tasks.
class DeadlockError : public std::runtime_error {
 public:
  explicit DeadlockError(const std::string& what) : std::runtime_error(what) {}
};

// Runs the graph to completion on P simulated processes and returns the
// trace. Deterministic: identical (graph, cfg) gives a bit-identical report.
TraceReport run(const TaskGraph& graph, const SimConfig& cfg);

// Runs once with DLB disabled and returns ceil(max observed workload / 2).
int calibrate_threshold(const TaskGraph& graph, const SimConfig& cfg);

// Pairing experiment: K processes seeded busy, P-K idle, roles pinned, no
// task execution. Each trial runs until every feasible pair (min(K, P-K))
// has formed; every pairing contributes its formation time and the number of
// search rounds its busy side needed.
struct PairingResult {
  double mean_time = 0;
  double max_time = 0;
  // Rounds per pairing, averaged over every pairing of every trial. The late
  // pairings of a trial search a nearly drained population, so this grows
  // with P at K = P/2.
  double mean_rounds = 0;
  // Rounds the first pairing of each trial needed: the full-density
  // regime the round-success probability describes.
  double mean_rounds_to_first = 0;
  std::int64_t pairings = 0;
};

PairingResult pairing_time_experiment(int process_count, int busy_count, const SimConfig& cfg,
                                      int trials);

}  // namespace dlbsim

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "dlbsim/types.hpp"

namespace dlbsim {

// Hardware model: S flops/s per process, R doubles/s off the node, plus a
// per-message latency (0 keeps the pure bandwidth model). A migrated task
// moves D doubles in total: D - D_out on export, D_out back with the result,
// where D_out = return_fraction * D.
struct MachineModel {
  double flops_per_sec = 2.2e9;    // S
  double doubles_per_sec = 5.5e7;  // R, S/R = 40 by default
  double latency_sec = 0.0;
  double return_fraction = 1.0 / 3.0;

  void validate() const;

  double output_doubles(double data_doubles) const { return return_fraction * data_doubles; }
};

// T_L = F/S
double local_time(double flops, const MachineModel& model);

// T_R = F/S + D/R, plus one latency per leg when latency is nonzero.
double remote_time(double flops, double data_doubles, const MachineModel& model);

// Q = (S/R) * (D/F): fraction of extra time paid for remote execution. Equals
// (remote_time - local_time) / local_time at zero latency.
double overhead_ratio(double flops, double data_doubles, const MachineModel& model);

// Time for the export leg (task + input payload) and the result-return leg.
double export_comm_time(double data_doubles, const MachineModel& model);
double return_comm_time(double data_doubles, const MachineModel& model);

// Running means of observed task execution and round-trip migration times,
// per task kind. count == 0 means no estimate; callers fall back to the
// machine model.
class PerfRecorder {
 public:
  void record_execution(TaskKind kind, double elapsed_sec);
  void record_migration(TaskKind kind, double elapsed_sec);

  std::optional<double> execution_mean(TaskKind kind) const;
  std::optional<double> migration_mean(TaskKind kind) const;
  std::int64_t execution_count(TaskKind kind) const;

  // Recorder mean when present, F/S otherwise.
  double execution_estimate(const Task& task, const MachineModel& model) const;

 private:
  struct Stat {
    double mean = 0;
    std::int64_t count = 0;
    void add(double x) { mean += (x - mean) / static_cast<double>(++count); }
  };
  std::array<Stat, kTaskKindCount> execution_{};
  std::array<Stat, kTaskKindCount> migration_{};
};

struct CompletionEstimate {
  double local = 0;   // seconds until the result exists here if the task is kept
  double remote = 0;  // seconds until the result is back here if exported
};

// local  = local_queue_ahead + exec
// remote = remote_queue_ahead + export_comm + exec + return_comm
// with exec preferring the recorded mean over F/S.
CompletionEstimate predict_completion(const Task& task, double local_queue_ahead,
                                      double remote_queue_ahead, const PerfRecorder& recorder,
                                      const MachineModel& model);

}  // namespace dlbsim

#include "dlbsim/cost_model.hpp"

#include <stdexcept>

namespace dlbsim {

void MachineModel::validate() const {
  if (!(flops_per_sec > 0)) throw std::invalid_argument("flops_per_sec must be > 0");
  if (!(doubles_per_sec > 0)) throw std::invalid_argument("doubles_per_sec must be > 0");
  if (latency_sec < 0) throw std::invalid_argument("latency_sec must be >= 0");
  if (return_fraction < 0 || return_fraction > 1) {
    throw std::invalid_argument("return_fraction must lie in [0, 1]");
  }
}

double local_time(double flops, const MachineModel& model) {
  if (!(flops > 0)) throw std::invalid_argument("flops must be > 0");
  return flops / model.flops_per_sec;
}

double remote_time(double flops, double data_doubles, const MachineModel& model) {
  if (data_doubles < 0) throw std::invalid_argument("doubles must be >= 0");
  return local_time(flops, model) + data_doubles / model.doubles_per_sec +
         2.0 * model.latency_sec;
}

double overhead_ratio(double flops, double data_doubles, const MachineModel& model) {
  if (!(flops > 0)) throw std::invalid_argument("flops must be > 0");
  if (data_doubles < 0) throw std::invalid_argument("doubles must be >= 0");
  return (model.flops_per_sec / model.doubles_per_sec) * (data_doubles / flops);
}

double export_comm_time(double data_doubles, const MachineModel& model) {
  return (data_doubles - model.output_doubles(data_doubles)) / model.doubles_per_sec +
         model.latency_sec;
}

double return_comm_time(double data_doubles, const MachineModel& model) {
  return model.output_doubles(data_doubles) / model.doubles_per_sec + model.latency_sec;
}

void PerfRecorder::record_execution(TaskKind kind, double elapsed_sec) {
  if (elapsed_sec < 0) throw std::invalid_argument("elapsed time must be >= 0");
  execution_[static_cast<std::size_t>(kind)].add(elapsed_sec);
}

void PerfRecorder::record_migration(TaskKind kind, double elapsed_sec) {
  if (elapsed_sec < 0) throw std::invalid_argument("elapsed time must be >= 0");
  migration_[static_cast<std::size_t>(kind)].add(elapsed_sec);
}

std::optional<double> PerfRecorder::execution_mean(TaskKind kind) const {
  const Stat& s = execution_[static_cast<std::size_t>(kind)];
  if (s.count == 0) return std::nullopt;
  return s.mean;
}

std::optional<double> PerfRecorder::migration_mean(TaskKind kind) const {
  const Stat& s = migration_[static_cast<std::size_t>(kind)];
  if (s.count == 0) return std::nullopt;
  return s.mean;
}

std::int64_t PerfRecorder::execution_count(TaskKind kind) const {
  return execution_[static_cast<std::size_t>(kind)].count;
}

double PerfRecorder::execution_estimate(const Task& task, const MachineModel& model) const {
  if (auto mean = execution_mean(task.kind)) return *mean;
  return task.flops / model.flops_per_sec;
}

CompletionEstimate predict_completion(const Task& task, double local_queue_ahead,
                                      double remote_queue_ahead, const PerfRecorder& recorder,
                                      const MachineModel& model) {
  if (local_queue_ahead < 0 || remote_queue_ahead < 0) {
    throw std::invalid_argument("queue-ahead estimates must be >= 0");
  }
  const double exec = recorder.execution_estimate(task, model);
  CompletionEstimate est;
  est.local = local_queue_ahead + exec;
  est.remote = remote_queue_ahead + export_comm_time(task.data_doubles, model) + exec +
               return_comm_time(task.data_doubles, model);
  return est;
}

}  // namespace dlbsim

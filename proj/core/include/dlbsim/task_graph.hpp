#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlbsim/types.hpp"

namespace dlbsim {

// Dependency DAG of tasks. Ids are dense integers assigned at construction so
// trace files stay stable across runs.
class TaskGraph {
 public:
  TaskId add_task(Task task);

  const Task& task(TaskId id) const { return tasks_[static_cast<std::size_t>(id)]; }
  const std::vector<Task>& tasks() const { return tasks_; }
  std::size_t size() const { return tasks_.size(); }
  bool empty() const { return tasks_.empty(); }

  // Rejects cycles, unresolved dep ids, nonpositive flops, negative data and
  // (when process_count > 0) owners outside [0, process_count).
  void validate(int process_count = -1) const;

  // Topological order by Kahn's algorithm; throws on cycles.
  std::vector<TaskId> topological_order() const;

  // Line-oriented JSON: one object per task with fields
  // {id, kind, flops, doubles, deps, owner, block}.
  std::string to_jsonl() const;
  void write_jsonl(std::ostream& out) const;
  static TaskGraph from_jsonl(const std::string& text);

 private:
  std::vector<Task> tasks_;
};

}  // namespace dlbsim

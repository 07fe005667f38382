#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "dlbsim/types.hpp"

namespace dlbsim {

// Queue of ready tasks, FIFO by the time each task became ready; ties break
// by ascending task id so replays are deterministic.
class ReadyQueue {
 public:
  struct Entry {
    double ready_time = 0;
    TaskId id = -1;
  };

  void push(TaskId id, double ready_time);
  TaskId pop_front();
  bool erase(TaskId id);

  // Removes the `count` latest-ready entries (tail first). Returns the removed
  // ids, latest first. count is clamped to the queue size.
  std::vector<TaskId> take_tail(std::size_t count);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::deque<Entry>& entries() const { return entries_; }

 private:
  std::deque<Entry> entries_;  // sorted by (ready_time, id)
};

// Workload of a process: the number of ready tasks in its queue.
inline int workload(const ReadyQueue& queue) {
  return static_cast<int>(queue.size());
}

}  // namespace dlbsim

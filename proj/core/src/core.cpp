#include <algorithm>
#include <stdexcept>

#include "dlbsim/ready_queue.hpp"
#include "dlbsim/rng.hpp"
#include "dlbsim/thresholds.hpp"
#include "dlbsim/types.hpp"

namespace dlbsim {

const char* kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Potrf: return "potrf";
    case TaskKind::Trsm: return "trsm";
    case TaskKind::Syrk: return "syrk";
    case TaskKind::Gemm: return "gemm";
    case TaskKind::Custom: return "custom";
  }
  return "custom";
}

TaskKind kind_from_name(std::string_view name) {
  if (name == "potrf") return TaskKind::Potrf;
  if (name == "trsm") return TaskKind::Trsm;
  if (name == "syrk") return TaskKind::Syrk;
  if (name == "gemm") return TaskKind::Gemm;
  return TaskKind::Custom;
}

const char* load_class_name(LoadClass c) {
  switch (c) {
    case LoadClass::Busy: return "busy";
    case LoadClass::Idle: return "idle";
    case LoadClass::Neutral: return "neutral";
  }
  return "neutral";
}

Thresholds::Thresholds(int low, int high) : idle_at_or_below_(low), busy_above_(high) {
  if (low < 0) throw std::invalid_argument("threshold must be >= 0");
  if (low > high) throw std::invalid_argument("W_low must not exceed W_high");
}

Thresholds::Thresholds(int w_threshold) : Thresholds(w_threshold, w_threshold) {}

Thresholds Thresholds::with_gap(int w_low, int w_high) { return Thresholds(w_low, w_high); }

void ReadyQueue::push(TaskId id, double ready_time) {
  Entry entry{ready_time, id};
  // Readiness times arrive almost sorted; walk back over ties and stragglers.
  auto pos = entries_.end();
  while (pos != entries_.begin()) {
    const Entry& prev = *(pos - 1);
    if (prev.ready_time < entry.ready_time ||
        (prev.ready_time == entry.ready_time && prev.id < entry.id)) {
      break;
    }
    --pos;
  }
  entries_.insert(pos, entry);
}

TaskId ReadyQueue::pop_front() {
  if (entries_.empty()) throw std::out_of_range("pop_front on empty ready queue");
  TaskId id = entries_.front().id;
  entries_.pop_front();
  return id;
}

bool ReadyQueue::erase(TaskId id) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [id](const Entry& e) { return e.id == id; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::vector<TaskId> ReadyQueue::take_tail(std::size_t count) {
  count = std::min(count, entries_.size());
  std::vector<TaskId> taken;
  taken.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    taken.push_back(entries_.back().id);
    entries_.pop_back();
  }
  return taken;
}

std::vector<ProcessId> Rng::sample_distinct(int count, int population, ProcessId exclude) {
  std::vector<ProcessId> pool;
  pool.reserve(static_cast<std::size_t>(population > 0 ? population - 1 : 0));
  for (ProcessId p = 0; p < population; ++p) {
    if (p != exclude) pool.push_back(p);
  }
  if (count > static_cast<int>(pool.size())) count = static_cast<int>(pool.size());
  for (int i = 0; i < count; ++i) {
    std::size_t j = static_cast<std::size_t>(i) + below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace dlbsim

#pragma once

// Randomized-transition harness for the pairing protocol. Drives P state
// machines with adversarially reordered message delivery, random timer fires,
// task consumption and task arrivals, and checks the protocol invariants
// after every transition:
//   - a process is partner in at most one transaction, and task exports flow
//     only between mutually locked partners
//   - task custody is conserved (every task in exactly one place)
//   - Basic leaves exactly W_T behind, Equalizing lands within one task of
//     level, Smart exports only tasks predicted to finish earlier remotely
//   - no process ever requests itself

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlbsim/dlb_protocol.hpp"
#include "dlbsim/rng.hpp"

namespace dlbsim::fuzz {

struct Violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Harness {
 public:
  Harness(int process_count, Strategy strategy, std::uint64_t seed, int w_threshold = 5)
      : cfg_(make_cfg(strategy, w_threshold)), rng_(seed) {
    for (ProcessId p = 0; p < process_count; ++p) {
      machines_.emplace_back(p, process_count, cfg_, seed);
      queues_.emplace_back();
      recorders_.emplace_back();
    }
  }

  // One random transition; throws Violation on any invariant breach.
  void step() {
    ++steps_;
    switch (rng_.below(5)) {
      case 0: fire_timer(); break;
      case 1:
      case 2: deliver_one(); break;
      case 3: consume_task(); break;
      case 4: spawn_task(); break;
    }
    check_custody();
  }

  bool has_pending() const { return !in_flight_.empty(); }

  // Delivers everything still in flight; all handshakes must resolve.
  void drain() {
    while (!in_flight_.empty()) {
      deliver_one();
      check_custody();
    }
    for (const DlbMachine& m : machines_) {
      if (m.phase() == Phase::InTransaction) {
        throw Violation("process " + std::to_string(m.self()) +
                        " still locked after all messages were delivered");
      }
    }
  }

  std::int64_t transitions() const { return steps_; }
  std::int64_t pairings() const { return pairings_; }
  std::int64_t exports() const { return exports_; }

  bool trace_enabled = false;
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  struct InFlight {
    ProcessId from;
    ProcessId to;
    DlbMessage msg;
  };

  static DlbConfig make_cfg(Strategy strategy, int wt) {
    DlbConfig cfg;
    cfg.thresholds = Thresholds(wt);
    cfg.delta_sec = 0.01;
    cfg.strategy = strategy;
    return cfg;
  }

  int pcount() const { return static_cast<int>(machines_.size()); }

  ProcessId random_proc() { return static_cast<ProcessId>(rng_.below(machines_.size())); }

  LoadClass classify(ProcessId p) const {
    return cfg_.thresholds.classify(static_cast<int>(queues_[static_cast<std::size_t>(p)].size()));
  }

  double eta(ProcessId p) const {
    double sum = 0;
    for (const Task& t : queues_[static_cast<std::size_t>(p)]) {
      sum += t.flops / model_.flops_per_sec;
    }
    return sum;
  }

  void advance_clock() { now_ += 0.001 + static_cast<double>(rng_.below(20)) * 0.001; }

  void note(const std::string& s) {
    if (trace_enabled) trace_.push_back(s);
  }

  std::string describe(ProcessId p) const {
    const DlbMachine& m = machines_[static_cast<std::size_t>(p)];
    std::string s = "p" + std::to_string(p) + "[";
    switch (m.phase()) {
      case Phase::Quiescent: s += "Q"; break;
      case Phase::Searching: s += "S"; break;
      case Phase::InTransaction: s += "T:" + std::to_string(*m.partner()); break;
      case Phase::CoolingDown: s += "C"; break;
    }
    return s + " w=" + std::to_string(queues_[static_cast<std::size_t>(p)].size()) + "]";
  }

  void fire_timer() {
    advance_clock();
    const ProcessId p = random_proc();
    note("timer " + describe(p));
    StepResult r = machines_[static_cast<std::size_t>(p)].on_timer(
        now_, classify(p), static_cast<int>(queues_[static_cast<std::size_t>(p)].size()), eta(p));
    handle(p, r);
  }

  void deliver_one() {
    if (in_flight_.empty()) return;
    advance_clock();
    const std::size_t pick = rng_.below(in_flight_.size());
    InFlight m = in_flight_[pick];
    in_flight_.erase(in_flight_.begin() + static_cast<std::ptrdiff_t>(pick));

    auto& queue = queues_[static_cast<std::size_t>(m.to)];
    DlbMachine& machine = machines_[static_cast<std::size_t>(m.to)];
    note(std::string("deliver ") + msg_kind_name(m.msg.kind) + " round=" +
         std::to_string(m.msg.round) + (m.msg.cancelled ? " cancel" : "") + " from p" +
         std::to_string(m.from) + " to " + describe(m.to));

    if (m.msg.kind == MsgKind::TaskExport) {
      // exports must only arrive at the shipper's mutually locked partner
      if (machine.partner() != m.from) {
        throw Violation("task export delivered to a process not locked on the sender");
      }
      StepResult r = machine.on_message(now_, m.from, m.msg, classify(m.to),
                                        static_cast<int>(queue.size()), eta(m.to));
      if (!r.import_arrived) throw Violation("task export was not imported");
      for (const Task& t : m.msg.tasks) {
        if (!custody_in_flight_.erase(t.id)) throw Violation("import of a task not in flight");
        queue.push_back(t);
      }
      handle(m.to, r);
      return;
    }
    StepResult r = machine.on_message(now_, m.from, m.msg, classify(m.to),
                                      static_cast<int>(queue.size()), eta(m.to));
    handle(m.to, r);
  }

  void consume_task() {
    const ProcessId p = random_proc();
    auto& queue = queues_[static_cast<std::size_t>(p)];
    if (queue.empty()) return;
    executed_.insert(queue.front().id);
    queue.pop_front();
  }

  void spawn_task() {
    const ProcessId p = random_proc();
    if (queues_[static_cast<std::size_t>(p)].size() > 30) return;
    Task t;
    t.id = next_task_id_++;
    t.kind = static_cast<TaskKind>(rng_.below(4));
    t.flops = 1e6 + static_cast<double>(rng_.below(1000)) * 1e7;
    t.data_doubles = static_cast<double>(rng_.below(1000)) * 1e4;
    t.owner = p;
    queues_[static_cast<std::size_t>(p)].push_back(t);
  }

  void handle(ProcessId p, StepResult& r) {
    for (const Outgoing& out : r.messages) {
      if (out.to == p) throw Violation("process sent a message to itself");
      note(std::string("  send ") + msg_kind_name(out.msg.kind) + " round=" +
           std::to_string(out.msg.round) + (out.msg.cancelled ? " cancel" : "") + " " +
           describe(p) + " -> p" + std::to_string(out.to));
      in_flight_.push_back(InFlight{p, out.to, out.msg});
    }
    if (r.pairing_formed) ++pairings_;
    if (r.start_export) {
      note("  ship " + describe(p) + " -> p" + std::to_string(r.export_to));
      run_export(p, r);
    }
  }

  void run_export(ProcessId p, const StepResult& r) {
    DlbMachine& machine = machines_[static_cast<std::size_t>(p)];
    auto& queue = queues_[static_cast<std::size_t>(p)];
    const int wl = static_cast<int>(queue.size());

    // both parties must be locked on each other before any tasks move
    const auto partner = machine.partner();
    if (!partner) throw Violation("export without a transaction");
    const DlbMachine& other = machines_[static_cast<std::size_t>(*partner)];
    if (other.partner() != p) {
      throw Violation("export while the partner is locked elsewhere");
    }

    std::vector<Task> tasks;
    switch (cfg_.strategy) {
      case Strategy::Basic: {
        const int count = choose_export_basic(wl, cfg_);
        take_tail(queue, count, tasks);
        if (count > 0 && static_cast<int>(queue.size()) != cfg_.thresholds.busy_above()) {
          throw Violation("basic export left " + std::to_string(queue.size()) + " tasks, not W_T");
        }
        break;
      }
      case Strategy::Equalizing: {
        const int count = choose_export_equalizing(wl, r.partner_workload);
        take_tail(queue, count, tasks);
        if (count > 0) {
          const int mine = wl - count;
          const int theirs = r.partner_workload + count;
          if (mine - theirs < 0 || mine - theirs > 1) {
            throw Violation("equalizing export missed the average");
          }
        }
        break;
      }
      case Strategy::Smart: {
        std::vector<const Task*> view;
        view.reserve(queue.size());
        for (const Task& t : queue) view.push_back(&t);
        std::vector<SmartDecision> decisions;
        const auto ids =
            choose_export_smart(view, 0.0, r.partner_eta, recorders_[static_cast<std::size_t>(p)],
                                model_, &decisions);
        std::set<TaskId> chosen(ids.begin(), ids.end());
        for (const SmartDecision& d : decisions) {
          const bool picked = chosen.count(d.id) > 0;
          if (picked != d.exported) throw Violation("smart decision log mismatch");
          if (picked && !(d.remote_estimate < d.local_estimate)) {
            throw Violation("smart exported a task without predicted benefit");
          }
        }
        for (TaskId id : ids) {
          for (auto it = queue.begin(); it != queue.end(); ++it) {
            if (it->id == id) {
              tasks.push_back(*it);
              queue.erase(it);
              break;
            }
          }
        }
        break;
      }
    }

    for (const Task& t : tasks) custody_in_flight_.insert(t.id);
    exports_ += static_cast<std::int64_t>(tasks.size());
    StepResult shipped = machine.ship(now_, std::move(tasks));
    handle(p, shipped);
  }

  static void take_tail(std::deque<Task>& queue, int count, std::vector<Task>& out) {
    for (int i = 0; i < count && !queue.empty(); ++i) {
      out.push_back(queue.back());
      queue.pop_back();
    }
  }

  // every spawned task is in exactly one queue, in flight, or executed
  void check_custody() const {
    std::set<TaskId> seen;
    auto see = [&](TaskId id) {
      if (!seen.insert(id).second) throw Violation("task exists in two places");
    };
    for (const auto& q : queues_) {
      for (const Task& t : q) see(t.id);
    }
    for (TaskId id : custody_in_flight_) see(id);
    for (TaskId id : executed_) see(id);
    if (seen.size() != static_cast<std::size_t>(next_task_id_)) {
      throw Violation("task lost: " + std::to_string(seen.size()) + " of " +
                      std::to_string(next_task_id_));
    }
  }

  DlbConfig cfg_;
  MachineModel model_;
  Rng rng_;
  double now_ = 0;
  std::int64_t steps_ = 0;
  std::int64_t pairings_ = 0;
  std::int64_t exports_ = 0;
  TaskId next_task_id_ = 0;

  std::vector<DlbMachine> machines_;
  std::vector<std::deque<Task>> queues_;
  std::vector<PerfRecorder> recorders_;
  std::vector<InFlight> in_flight_;
  std::set<TaskId> custody_in_flight_;
  std::set<TaskId> executed_;
  std::vector<std::string> trace_;
};

}  // namespace dlbsim::fuzz

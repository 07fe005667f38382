#include "dlbsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dlbsim/ready_queue.hpp"
#include "dlbsim/rng.hpp"

namespace dlbsim {

using ordered_json = nlohmann::ordered_json;

double SimConfig::slowdown_of(ProcessId p) const {
  auto it = slowdown.find(p);
  return it == slowdown.end() ? 1.0 : it->second;
}

void SimConfig::validate() const {
  if (process_count < 1) throw std::invalid_argument("process_count must be >= 1");
  if (dlb.enabled && process_count < 2) {
    throw std::invalid_argument("dlb requires at least 2 processes");
  }
  machine.validate();
  dlb.validate();
  for (const auto& [pid, factor] : slowdown) {
    if (pid < 0 || pid >= process_count) {
      throw std::invalid_argument("slowdown entry for unknown process " + std::to_string(pid));
    }
    if (!(factor >= 1.0)) throw std::invalid_argument("slowdown factors must be >= 1");
  }
}

namespace {

enum class EventKind : std::uint8_t { TaskFinished, Message, SearchTimer, SampleTimer };

struct Event {
  double time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::SampleTimer;
  ProcessId target = -1;
  ProcessId from = -1;  // Message
  TaskId task = -1;     // TaskFinished
  DlbMessage msg;       // Message
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct PairRecord {
  double time = 0;
  int rounds = 0;
};

class Engine {
 public:
  Engine(const TaskGraph& graph, const SimConfig& cfg,
         std::optional<std::vector<LoadClass>> role_override = std::nullopt)
      : graph_(graph), cfg_(cfg), probe_(role_override.has_value()) {
    cfg_.validate();
    graph_.validate(cfg_.process_count);

    const auto n = graph_.size();
    remaining_deps_.resize(n, 0);
    successors_.resize(n);
    completed_.resize(n, false);
    ship_time_.resize(n, 0);
    for (const Task& t : graph_.tasks()) {
      remaining_deps_[static_cast<std::size_t>(t.id)] = static_cast<int>(t.deps.size());
      for (TaskId d : t.deps) successors_[static_cast<std::size_t>(d)].push_back(t.id);
    }

    procs_.reserve(static_cast<std::size_t>(cfg_.process_count));
    for (ProcessId p = 0; p < cfg_.process_count; ++p) {
      procs_.emplace_back(p, cfg_.process_count, cfg_.dlb, cfg_.seed);
    }
    if (probe_) {
      roles_ = std::move(*role_override);
      if (roles_.size() != procs_.size()) throw std::logic_error("role override size mismatch");
    }

    report_.seed = cfg_.seed;
    report_.per_process.resize(procs_.size());
    report_.executed_by.assign(n, -1);
  }

  TraceReport run() {
    seed_initial_tasks();
    const double sample_interval = sampling_interval();
    if (!probe_ && sample_interval > 0 && !graph_.empty()) {
      Event ev;
      ev.time = 0.0;
      ev.kind = EventKind::SampleTimer;
      schedule(std::move(ev));
      sample_interval_ = sample_interval;
    }
    if (cfg_.dlb.enabled) {
      // Search timers run with a per-process phase so rounds do not collide in
      // synchronized request storms; real processes drift the same way.
      for (ProcessId p = 0; p < cfg_.process_count; ++p) {
        Rng phase_rng(derive_seed(cfg_.seed, (1ull << 32) + static_cast<std::uint64_t>(p)));
        schedule_timer(p, phase_rng.unit() * cfg_.dlb.delta_sec);
      }
    }

    while (!events_.empty()) {
      Event ev = events_.top();
      events_.pop();
      dispatch(ev);
    }

    if (completed_count_ != graph_.size()) {
      throw DeadlockError(deadlock_message());
    }
    finalize_report();
    return std::move(report_);
  }

  // Pairing-probe accessors.
  const std::vector<PairRecord>& pairs() const { return pair_records_; }
  void set_probe_target(std::size_t pairs) { probe_target_pairs_ = pairs; }

 private:
  struct Proc {
    Proc(ProcessId id, int process_count, const DlbConfig& dlb, std::uint64_t seed)
        : machine(id, process_count, dlb, seed) {}

    ReadyQueue queue;
    DlbMachine machine;
    PerfRecorder recorder;

    bool executing = false;
    TaskId current = -1;
    double current_start = 0;
    double current_finish = 0;

    std::int64_t enqueued = 0, dequeued = 0, exported = 0;
    double pairing_time_sum = 0;
  };

  void schedule(Event ev) {
    ev.seq = ++seq_;
    events_.push(std::move(ev));
  }

  void schedule_timer(ProcessId p, double time) {
    Event ev;
    ev.time = time;
    ev.kind = EventKind::SearchTimer;
    ev.target = p;
    schedule(std::move(ev));
  }

  double message_delay(const DlbMessage& msg) const {
    double payload = 0;
    if (msg.kind == MsgKind::TaskExport) {
      for (const Task& t : msg.tasks) {
        payload += t.data_doubles - cfg_.machine.output_doubles(t.data_doubles);
      }
    } else if (msg.kind == MsgKind::ResultReturn) {
      payload = msg.output_doubles;
    }
    return cfg_.machine.latency_sec + payload / cfg_.machine.doubles_per_sec;
  }

  void send(double now, ProcessId from, ProcessId to, DlbMessage msg) {
    Event ev;
    ev.time = now + message_delay(msg);
    ev.kind = EventKind::Message;
    ev.target = to;
    ev.from = from;
    ev.msg = std::move(msg);
    schedule(std::move(ev));
  }

  LoadClass classification(ProcessId p) const {
    if (probe_) return roles_[static_cast<std::size_t>(p)];
    return cfg_.dlb.thresholds.classify(workload(procs_[static_cast<std::size_t>(p)].queue));
  }

  double queue_eta(const Proc& proc, double now) const {
    double eta = proc.executing ? std::max(0.0, proc.current_finish - now) : 0.0;
    for (const auto& entry : proc.queue.entries()) {
      eta += proc.recorder.execution_estimate(graph_.task(entry.id), cfg_.machine);
    }
    return eta;
  }

  // Tasks that become ready in one event land in the queue together before
  // the worker picks the next one up; the peak workload sees the whole batch.
  void enqueue_ready(ProcessId p, TaskId id, double now) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];
    proc.queue.push(id, now);
    ++proc.enqueued;
    report_.max_workload = std::max(report_.max_workload, workload(proc.queue));
  }

  void start_next(ProcessId p, double now) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];
    if (proc.executing || proc.queue.empty()) return;
    const TaskId id = proc.queue.pop_front();
    ++proc.dequeued;
    const Task& task = graph_.task(id);
    const double duration =
        task.flops * cfg_.slowdown_of(p) / cfg_.machine.flops_per_sec;
    proc.executing = true;
    proc.current = id;
    proc.current_start = now;
    proc.current_finish = now + duration;
    Event ev;
    ev.time = proc.current_finish;
    ev.kind = EventKind::TaskFinished;
    ev.target = p;
    ev.task = id;
    schedule(std::move(ev));
  }

  void complete_task(TaskId id, double now) {
    auto idx = static_cast<std::size_t>(id);
    if (completed_[idx]) throw std::logic_error("task completed twice");
    completed_[idx] = true;
    ++completed_count_;
    report_.makespan = std::max(report_.makespan, now);
    std::vector<ProcessId> touched;
    for (TaskId s : successors_[idx]) {
      if (--remaining_deps_[static_cast<std::size_t>(s)] == 0) {
        const ProcessId owner = graph_.task(s).owner;
        enqueue_ready(owner, s, now);
        touched.push_back(owner);
      }
    }
    for (ProcessId p : touched) start_next(p, now);
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::TaskFinished: on_task_finished(ev.target, ev.task, ev.time); break;
      case EventKind::Message: on_message(ev.target, ev.from, ev.msg, ev.time); break;
      case EventKind::SearchTimer: on_search_timer(ev.target, ev.time); break;
      case EventKind::SampleTimer: on_sample_timer(ev.time); break;
    }
  }

  void on_task_finished(ProcessId p, TaskId id, double now) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];
    const Task& task = graph_.task(id);
    proc.recorder.record_execution(task.kind, now - proc.current_start);
    proc.executing = false;
    proc.current = -1;
    report_.executed_by[static_cast<std::size_t>(id)] = p;
    ++report_.per_process[static_cast<std::size_t>(p)].tasks_executed;

    if (task.owner == p) {
      complete_task(id, now);
    } else {
      DlbMessage ret;
      ret.kind = MsgKind::ResultReturn;
      ret.task_id = id;
      ret.output_doubles = cfg_.machine.output_doubles(task.data_doubles);
      send(now, p, task.owner, std::move(ret));
    }
    start_next(p, now);
  }

  void on_message(ProcessId p, ProcessId from, const DlbMessage& msg, double now) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];

    if (msg.kind == MsgKind::ResultReturn) {
      const Task& task = graph_.task(msg.task_id);
      proc.recorder.record_migration(task.kind,
                                     now - ship_time_[static_cast<std::size_t>(msg.task_id)]);
      complete_task(msg.task_id, now);
      return;
    }

    const int wl = workload(proc.queue);
    StepResult r = proc.machine.on_message(now, from, msg, classification(p), wl,
                                           queue_eta(proc, now));

    if (msg.kind == MsgKind::TaskExport && r.import_arrived) {
      auto& stats = report_.per_process[static_cast<std::size_t>(p)];
      stats.tasks_imported += static_cast<std::int64_t>(msg.tasks.size());
      log_decision(now, p, "import",
                   "tasks=" + std::to_string(msg.tasks.size()) + " from=" + std::to_string(from));
      for (const Task& t : msg.tasks) enqueue_ready(p, t.id, now);
      start_next(p, now);
    }
    apply(p, now, r);
  }

  void on_search_timer(ProcessId p, double now) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];
    if (searching_open()) {
      StepResult r = proc.machine.on_timer(now, classification(p), workload(proc.queue),
                                           queue_eta(proc, now));
      apply(p, now, r);
      // Keep the round cadence at delta: when a cooldown ends between ticks,
      // fire right at its end instead of waiting a whole extra period.
      double next = now + cfg_.dlb.delta_sec;
      if (proc.machine.phase() == Phase::CoolingDown) {
        const double until = proc.machine.cooldown_until();
        if (until > now && until < next) next = until;
      }
      schedule_timer(p, next);
    }
  }

  // Timers re-arm only while the run can still make progress; afterwards the
  // queue drains and the simulation ends.
  bool searching_open() const {
    if (probe_) return pair_records_.size() < probe_target_pairs_;
    return completed_count_ < graph_.size();
  }

  void on_sample_timer(double now) {
    for (ProcessId p = 0; p < cfg_.process_count; ++p) {
      Proc& proc = procs_[static_cast<std::size_t>(p)];
      const int wl = workload(proc.queue);
      if (cfg_.audit && wl != proc.enqueued - proc.dequeued - proc.exported) {
        throw std::logic_error("workload audit failed for process " + std::to_string(p));
      }
      report_.samples.push_back(WorkloadSample{now, p, wl});
    }
    if (completed_count_ < graph_.size()) {
      Event ev;
      ev.time = now + sample_interval_;
      ev.kind = EventKind::SampleTimer;
      schedule(std::move(ev));
    }
  }

  void apply(ProcessId p, double now, StepResult& r) {
    auto& stats = report_.per_process[static_cast<std::size_t>(p)];
    Proc& proc = procs_[static_cast<std::size_t>(p)];

    if (r.round_started) {
      ++stats.search_rounds;
      log_decision(now, p, "round", load_class_name(classification(p)));
    }
    if (r.pairing_formed) {
      ++stats.pairings;
      proc.pairing_time_sum += r.pairing_time;
      log_decision(now, p, "paired", "t=" + format_double(r.pairing_time) +
                                         " rounds=" + std::to_string(r.pairing_rounds));
      if (probe_) {
        record_probe_pairing(p, r);
        retire(p);
      }
    }
    if (r.start_export) {
      do_export(p, now, r);
    }
    for (Outgoing& out : r.messages) send(now, p, out.to, std::move(out.msg));
  }

  void retire(ProcessId p) { roles_[static_cast<std::size_t>(p)] = LoadClass::Neutral; }

  // A pairing is recorded once both participants have committed; its time and
  // round count come from the side that searched longest.
  void record_probe_pairing(ProcessId p, const StepResult& r) {
    const auto key = std::minmax(p, r.pairing_partner);
    auto it = pending_pairs_.find(key);
    if (it == pending_pairs_.end()) {
      pending_pairs_.emplace(key, PairRecord{r.pairing_time, r.pairing_rounds});
      return;
    }
    PairRecord rec = it->second;
    pending_pairs_.erase(it);
    rec.time = std::max(rec.time, r.pairing_time);
    rec.rounds = std::max(rec.rounds, r.pairing_rounds);
    pair_records_.push_back(rec);
  }

  void do_export(ProcessId p, double now, const StepResult& r) {
    Proc& proc = procs_[static_cast<std::size_t>(p)];
    const int wl = workload(proc.queue);

    std::vector<TaskId> ids;
    switch (cfg_.dlb.strategy) {
      case Strategy::Basic:
        ids = proc.queue.take_tail(static_cast<std::size_t>(choose_export_basic(wl, cfg_.dlb)));
        break;
      case Strategy::Equalizing:
        ids = proc.queue.take_tail(
            static_cast<std::size_t>(choose_export_equalizing(wl, r.partner_workload)));
        break;
      case Strategy::Smart: {
        std::vector<const Task*> queue_tasks;
        queue_tasks.reserve(proc.queue.size());
        for (const auto& entry : proc.queue.entries()) {
          queue_tasks.push_back(&graph_.task(entry.id));
        }
        const double local_base =
            proc.executing ? std::max(0.0, proc.current_finish - now) : 0.0;
        ids = choose_export_smart(queue_tasks, local_base, r.partner_eta, proc.recorder,
                                  cfg_.machine);
        for (TaskId id : ids) proc.queue.erase(id);
        break;
      }
    }

    std::vector<Task> tasks;
    tasks.reserve(ids.size());
    for (TaskId id : ids) {
      tasks.push_back(graph_.task(id));
      ship_time_[static_cast<std::size_t>(id)] = now;
    }
    proc.exported += static_cast<std::int64_t>(ids.size());
    report_.per_process[static_cast<std::size_t>(p)].tasks_exported +=
        static_cast<std::int64_t>(ids.size());
    if (cfg_.audit && cfg_.dlb.strategy == Strategy::Basic && !ids.empty() &&
        workload(proc.queue) != cfg_.dlb.thresholds.busy_above()) {
      throw std::logic_error("basic export did not leave exactly W_T tasks");
    }
    log_decision(now, p, "export",
                 std::string(strategy_name(cfg_.dlb.strategy)) + " tasks=" +
                     std::to_string(ids.size()) + " to=" + std::to_string(r.export_to));

    StepResult shipped = proc.machine.ship(now, std::move(tasks));
    apply(p, now, shipped);
  }

  void seed_initial_tasks() {
    for (const Task& t : graph_.tasks()) {
      if (t.deps.empty()) enqueue_ready(t.owner, t.id, 0.0);
    }
    for (ProcessId p = 0; p < cfg_.process_count; ++p) start_next(p, 0.0);
  }

  double sampling_interval() const {
    if (cfg_.sample_interval_sec > 0) return cfg_.sample_interval_sec;
    double serial = 0;
    for (const Task& t : graph_.tasks()) serial += t.flops;
    serial /= cfg_.machine.flops_per_sec;
    return serial / (200.0 * cfg_.process_count);
  }

  std::string deadlock_message() const {
    std::string msg = "simulation deadlock; stuck tasks:";
    int listed = 0;
    for (const Task& t : graph_.tasks()) {
      if (completed_[static_cast<std::size_t>(t.id)]) continue;
      if (listed++ == 8) {
        msg += " ...";
        break;
      }
      msg += " " + std::to_string(t.id) + "(" + kind_name(t.kind) + " deps_left=" +
             std::to_string(remaining_deps_[static_cast<std::size_t>(t.id)]) + ")";
    }
    return msg;
  }

  void log_decision(double now, ProcessId p, const char* event, std::string detail) {
    if (!cfg_.decision_log) return;
    report_.decisions.push_back(DecisionRecord{now, p, event, std::move(detail)});
  }

  static std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
  }

  void finalize_report() {
    std::int64_t executed = 0, exported = 0, imported = 0;
    for (std::size_t p = 0; p < procs_.size(); ++p) {
      ProcessStats& s = report_.per_process[p];
      s.mean_pairing_time = s.pairings > 0 ? procs_[p].pairing_time_sum /
                                                 static_cast<double>(s.pairings)
                                           : 0.0;
      executed += s.tasks_executed;
      exported += s.tasks_exported;
      imported += s.tasks_imported;
    }
    if (cfg_.audit) {
      if (executed != static_cast<std::int64_t>(graph_.size())) {
        throw std::logic_error("audit: executed task count mismatch");
      }
      if (exported != imported) {
        throw std::logic_error("audit: global exports != imports");
      }
      for (ProcessId owner : report_.executed_by) {
        if (owner < 0) throw std::logic_error("audit: task with no executor");
      }
    }
  }

  TaskGraph graph_;
  SimConfig cfg_;
  bool probe_ = false;
  std::vector<LoadClass> roles_;
  std::size_t probe_target_pairs_ = 0;

  std::vector<Proc> procs_;
  std::vector<int> remaining_deps_;
  std::vector<std::vector<TaskId>> successors_;
  std::vector<bool> completed_;
  std::vector<double> ship_time_;
  std::size_t completed_count_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t seq_ = 0;
  double sample_interval_ = 0;

  std::vector<PairRecord> pair_records_;
  std::map<std::pair<ProcessId, ProcessId>, PairRecord> pending_pairs_;
  TraceReport report_;
};

}  // namespace

TraceReport run(const TaskGraph& graph, const SimConfig& cfg) {
  Engine engine(graph, cfg);
  return engine.run();
}

int calibrate_threshold(const TaskGraph& graph, const SimConfig& cfg) {
  SimConfig quiet = cfg;
  quiet.dlb.enabled = false;
  Engine engine(graph, quiet);
  const TraceReport report = engine.run();
  return (report.max_workload + 1) / 2;  // ceil(max/2)
}

PairingResult pairing_time_experiment(int process_count, int busy_count, const SimConfig& cfg,
                                      int trials) {
  if (process_count < 2) throw std::invalid_argument("need at least 2 processes");
  if (busy_count < 1 || busy_count >= process_count) {
    throw std::invalid_argument("busy count must lie in [1, P-1]");
  }
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  const std::size_t feasible =
      static_cast<std::size_t>(std::min(busy_count, process_count - busy_count));

  PairingResult result;
  double time_sum = 0;
  double rounds_sum = 0;
  double first_rounds_sum = 0;
  for (int trial = 0; trial < trials; ++trial) {
    SimConfig trial_cfg = cfg;
    trial_cfg.process_count = process_count;
    trial_cfg.dlb.enabled = true;
    trial_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    trial_cfg.decision_log = false;

    // The busy_count lowest ids start busy; random target selection makes the
    // labeling irrelevant.
    std::vector<LoadClass> roles(static_cast<std::size_t>(process_count), LoadClass::Idle);
    for (int p = 0; p < busy_count; ++p) roles[static_cast<std::size_t>(p)] = LoadClass::Busy;

    Engine engine(TaskGraph{}, trial_cfg, std::move(roles));
    engine.set_probe_target(feasible);
    engine.run();

    for (const PairRecord& rec : engine.pairs()) {
      time_sum += rec.time;
      rounds_sum += rec.rounds;
      result.max_time = std::max(result.max_time, rec.time);
      ++result.pairings;
    }
    if (!engine.pairs().empty()) first_rounds_sum += engine.pairs().front().rounds;
  }
  if (result.pairings > 0) {
    result.mean_time = time_sum / static_cast<double>(result.pairings);
    result.mean_rounds = rounds_sum / static_cast<double>(result.pairings);
  }
  result.mean_rounds_to_first = first_rounds_sum / static_cast<double>(trials);
  return result;
}

std::string TraceReport::to_json() const {
  ordered_json j;
  j["makespan"] = makespan;
  j["max_workload"] = max_workload;
  j["seed"] = seed;
  ordered_json per = ordered_json::array();
  for (std::size_t p = 0; p < per_process.size(); ++p) {
    const ProcessStats& s = per_process[p];
    ordered_json e;
    e["process"] = p;
    e["tasks_executed"] = s.tasks_executed;
    e["tasks_exported"] = s.tasks_exported;
    e["tasks_imported"] = s.tasks_imported;
    e["search_rounds"] = s.search_rounds;
    e["pairings"] = s.pairings;
    e["mean_pairing_time"] = s.mean_pairing_time;
    per.push_back(std::move(e));
  }
  j["per_process"] = std::move(per);
  ordered_json samp = ordered_json::array();
  for (const WorkloadSample& s : samples) {
    samp.push_back({s.time, s.process, s.workload});
  }
  j["samples"] = std::move(samp);
  return j.dump(2) + "\n";
}

void TraceReport::write_workload_csv(std::ostream& out) const {
  out << "time,process,workload\n";
  char buf[64];
  for (const WorkloadSample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.12g,%d,%d\n", s.time, s.process, s.workload);
    out << buf;
  }
}

void TraceReport::write_decision_log(std::ostream& out) const {
  for (const DecisionRecord& d : decisions) {
    ordered_json j;
    j["time"] = d.time;
    j["process"] = d.process;
    j["event"] = d.event;
    j["detail"] = d.detail;
    out << j.dump() << '\n';
  }
}

}  // namespace dlbsim

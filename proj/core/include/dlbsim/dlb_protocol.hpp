#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dlbsim/cost_model.hpp"
#include "dlbsim/ready_queue.hpp"
#include "dlbsim/rng.hpp"
#include "dlbsim/task_graph.hpp"
#include "dlbsim/thresholds.hpp"
#include "dlbsim/types.hpp"

namespace dlbsim {

enum class Strategy : std::uint8_t { Basic, Equalizing, Smart };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);  // throws on unknown

struct DlbConfig {
  Thresholds thresholds{5};
  double delta_sec = 0.010;  // waiting time between search rounds
  int n_tries = 5;           // pair requests per round
  Strategy strategy = Strategy::Basic;
  bool enabled = true;

  void validate() const;  // throws on delta <= 0 or n_tries < 1
};

// Wire messages of the pairing protocol. One struct covers all kinds; unused
// fields stay at their defaults. PairRequest/Accept/Confirm always carry the
// sender's workload and queue ETA so every strategy shares the same format.
enum class MsgKind : std::uint8_t {
  PairRequest,      // role + workload + eta, broadcast to n_tries targets
  Accept,           // responder locks onto the sender
  Decline,
  Confirm,          // idle initiator tells the accepting busy process it won
  TaskExport,       // busy -> idle, the migrated tasks travel with it
  ResultReturn,     // remote finish -> owner, carries the output payload
  TransactionDone,  // completion ack, or cancellation when `cancelled`
};

const char* msg_kind_name(MsgKind k);

struct DlbMessage {
  MsgKind kind = MsgKind::Decline;
  LoadClass sender_role = LoadClass::Neutral;  // PairRequest
  int workload = 0;                            // PairRequest/Accept/Confirm
  double eta_sec = 0;                          // PairRequest/Accept/Confirm
  std::uint64_t round = 0;                     // request round, echoed in replies
  bool cancelled = false;                      // TransactionDone only
  std::vector<Task> tasks;                     // TaskExport
  TaskId task_id = -1;                         // ResultReturn
  double output_doubles = 0;                   // ResultReturn
};

struct Outgoing {
  ProcessId to = -1;
  DlbMessage msg;
};

enum class Phase : std::uint8_t { Quiescent, Searching, InTransaction, CoolingDown };

// What the surrounding runtime must do after feeding one event to the machine.
struct StepResult {
  std::vector<Outgoing> messages;

  bool round_started = false;
  // Pair is final from this process's point of view (counted once per
  // transaction); pairing_time/rounds describe the search episode that ended.
  bool pairing_formed = false;
  ProcessId pairing_partner = -1;
  double pairing_time = 0;
  int pairing_rounds = 0;

  // Busy side must now pick tasks per its strategy and call ship().
  bool start_export = false;
  ProcessId export_to = -1;
  int partner_workload = 0;
  double partner_eta = 0;

  bool import_arrived = false;  // a TaskExport landed; enqueue its tasks
  bool released = false;        // left InTransaction (completed or cancelled)
};

// Per-process pairing state machine. A pure transition system: every input is
// an explicit event carrying the current time, workload and classification;
// outputs are messages. The runtime (simulator or a live transport) owns the
// queues and delivers messages in a total order.
//
// Protocol sketch: any busy or idle process periodically broadcasts
// PairRequest to n_tries random peers, then waits delta before the next
// round. A free process that receives a request from the opposite role
// replies Accept and locks onto the sender; everything else gets Decline.
// The initiator pairs with the first Accept and cancels every other one with
// TransactionDone(cancelled). A busy initiator ships straight away; an idle
// initiator sends Confirm so the accepting busy process knows it won before
// shipping. The export lands, the importer acks with TransactionDone, and
// both sides cool down for delta.
//
// Every transaction is identified by the round id of the request that
// created it, and every transaction message carries that id, so messages of
// an abandoned or finished exchange can neither tear nor drive a newer one
// between the same pair. When two processes request each other in the same
// window and both lock as responders, each cancels the accept it receives
// and the crossing dissolves; the pair retries after its cooldown.
class DlbMachine {
 public:
  DlbMachine(ProcessId self, int process_count, const DlbConfig& cfg, std::uint64_t global_seed);

  // Search timer tick. cls/wl/eta describe the process right now.
  StepResult on_timer(double now, LoadClass cls, int wl, double eta);

  // Any protocol message except ResultReturn (which never touches pairing
  // state and is handled by the runtime alone).
  StepResult on_message(double now, ProcessId from, const DlbMessage& msg, LoadClass cls, int wl,
                        double eta);

  // Completes a start_export request: the runtime picked `tasks` (possibly
  // none). Empty exports finish the transaction immediately; otherwise the
  // returned TaskExport must be delivered to the partner after its transfer
  // time and the machine stays locked until the partner's ack.
  StepResult ship(double now, std::vector<Task> tasks);

  Phase phase() const { return phase_; }
  double cooldown_until() const { return cooldown_until_; }
  std::optional<ProcessId> partner() const;
  ProcessId self() const { return self_; }

 private:
  StepResult handle_request(double now, ProcessId from, const DlbMessage& msg, LoadClass cls,
                            int wl, double eta);
  StepResult handle_accept(double now, ProcessId from, const DlbMessage& msg, int wl, double eta);
  StepResult handle_confirm(double now, ProcessId from, const DlbMessage& msg);
  StepResult handle_decline(double now, const DlbMessage& msg);
  StepResult handle_task_export(double now, ProcessId from, const DlbMessage& msg);
  StepResult handle_done(double now, ProcessId from, const DlbMessage& msg);

  void begin_transaction(ProcessId partner, LoadClass side, bool initiated,
                         std::uint64_t txn_round);
  void start_export_step(StepResult& r, double now, int partner_wl, double partner_eta);
  void mark_paired(StepResult& r, double now);
  void release(double now);
  static Outgoing make(ProcessId to, DlbMessage msg);

  ProcessId self_;
  int process_count_;
  DlbConfig cfg_;
  Rng rng_;

  Phase phase_ = Phase::Quiescent;
  double cooldown_until_ = 0;

  // searching
  std::uint64_t round_ = 0;
  int pending_replies_ = 0;
  LoadClass advertised_role_ = LoadClass::Neutral;

  // transaction; txn_round_ identifies its generation (the round id of the
  // pair request that created it) so stale messages from earlier exchanges
  // between the same two processes cannot tear a newer one
  ProcessId partner_ = -1;
  LoadClass side_ = LoadClass::Neutral;  // Busy or Idle side of the exchange
  std::uint64_t txn_round_ = 0;
  bool initiated_by_me_ = false;
  bool shipped_ = false;
  bool pairing_counted_ = false;

  // search episode, for pairing-time statistics
  bool in_episode_ = false;
  double episode_start_ = 0;
  int episode_rounds_ = 0;
};

// Export strategies. All return how much (or which) work leaves the busy
// process; callers pull that many entries off the ready-queue tail.

// Keep exactly W_T: export w_i - W_T tasks (0 when not actually busy).
int choose_export_basic(int busy_workload, const DlbConfig& cfg);

// Level with the partner: export floor((w_i - w_j) / 2) so the busy side
// keeps the extra task on odd sums (0 when w_i <= w_j).
int choose_export_equalizing(int busy_workload, int idle_workload);

struct SmartDecision {
  TaskId id = -1;
  double local_estimate = 0;
  double remote_estimate = 0;
  bool exported = false;
};

// Walk the queue from the tail (latest to run first); export each task whose
// predicted remote completion beats its local completion, updating both
// queue-ahead estimates as tasks are claimed. `queue_head_to_tail` is the
// ready queue resolved to tasks; local_base covers work already executing.
std::vector<TaskId> choose_export_smart(const std::vector<const Task*>& queue_head_to_tail,
                                        double local_base, double remote_eta,
                                        const PerfRecorder& recorder, const MachineModel& model,
                                        std::vector<SmartDecision>* decisions = nullptr);

}  // namespace dlbsim

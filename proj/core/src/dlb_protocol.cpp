#include "dlbsim/dlb_protocol.hpp"

#include <stdexcept>
#include <string>

namespace dlbsim {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Basic: return "basic";
    case Strategy::Equalizing: return "equalizing";
    case Strategy::Smart: return "smart";
  }
  return "basic";
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "basic") return Strategy::Basic;
  if (name == "equalizing") return Strategy::Equalizing;
  if (name == "smart") return Strategy::Smart;
  throw std::invalid_argument("unknown strategy: " + std::string(name));
}

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::PairRequest: return "pair_request";
    case MsgKind::Accept: return "accept";
    case MsgKind::Decline: return "decline";
    case MsgKind::Confirm: return "confirm";
    case MsgKind::TaskExport: return "task_export";
    case MsgKind::ResultReturn: return "result_return";
    case MsgKind::TransactionDone: return "transaction_done";
  }
  return "?";
}

void DlbConfig::validate() const {
  if (!(delta_sec > 0)) throw std::invalid_argument("delta must be > 0");
  if (n_tries < 1) throw std::invalid_argument("n_tries must be >= 1");
}

DlbMachine::DlbMachine(ProcessId self, int process_count, const DlbConfig& cfg,
                       std::uint64_t global_seed)
    : self_(self),
      process_count_(process_count),
      cfg_(cfg),
      rng_(derive_seed(global_seed, static_cast<std::uint64_t>(self))) {
  cfg_.validate();
  if (process_count < 1) throw std::invalid_argument("process_count must be >= 1");
  if (self < 0 || self >= process_count) throw std::invalid_argument("self out of range");
}

std::optional<ProcessId> DlbMachine::partner() const {
  if (phase_ == Phase::InTransaction) return partner_;
  return std::nullopt;
}

Outgoing DlbMachine::make(ProcessId to, DlbMessage msg) { return Outgoing{to, std::move(msg)}; }

StepResult DlbMachine::on_timer(double now, LoadClass cls, int wl, double eta) {
  StepResult r;
  if (!cfg_.enabled) return r;
  if (phase_ == Phase::Searching || phase_ == Phase::InTransaction) return r;
  if (phase_ == Phase::CoolingDown && now < cooldown_until_) return r;
  if (cls == LoadClass::Neutral) return r;

  const int tries = std::min(cfg_.n_tries, process_count_ - 1);
  if (tries < 1) return r;

  phase_ = Phase::Searching;
  ++round_;
  pending_replies_ = tries;
  advertised_role_ = cls;
  if (!in_episode_) {
    in_episode_ = true;
    episode_start_ = now;
    episode_rounds_ = 0;
  }
  ++episode_rounds_;
  r.round_started = true;

  for (ProcessId target : rng_.sample_distinct(tries, process_count_, self_)) {
    DlbMessage req;
    req.kind = MsgKind::PairRequest;
    req.sender_role = cls;
    req.workload = wl;
    req.eta_sec = eta;
    req.round = round_;
    r.messages.push_back(make(target, std::move(req)));
  }
  return r;
}

StepResult DlbMachine::on_message(double now, ProcessId from, const DlbMessage& msg, LoadClass cls,
                                  int wl, double eta) {
  switch (msg.kind) {
    case MsgKind::PairRequest: return handle_request(now, from, msg, cls, wl, eta);
    case MsgKind::Accept: return handle_accept(now, from, msg, wl, eta);
    case MsgKind::Decline: return handle_decline(now, msg);
    case MsgKind::Confirm: return handle_confirm(now, from, msg);
    case MsgKind::TaskExport: return handle_task_export(now, from, msg);
    case MsgKind::TransactionDone: return handle_done(now, from, msg);
    case MsgKind::ResultReturn: break;  // runtime-level, no pairing state involved
  }
  return {};
}

StepResult DlbMachine::handle_request(double /*now*/, ProcessId from, const DlbMessage& msg,
                                      LoadClass cls, int wl, double eta) {
  StepResult r;
  const bool opposite = (msg.sender_role == LoadClass::Busy && cls == LoadClass::Idle) ||
                        (msg.sender_role == LoadClass::Idle && cls == LoadClass::Busy);
  if (phase_ == Phase::InTransaction || !opposite || !cfg_.enabled) {
    DlbMessage reply;
    reply.kind = MsgKind::Decline;
    reply.round = msg.round;
    r.messages.push_back(make(from, std::move(reply)));
    return r;
  }
  // Lock onto the requester; it confirms, ships or cancels.
  begin_transaction(from, cls, /*initiated=*/false, msg.round);
  DlbMessage reply;
  reply.kind = MsgKind::Accept;
  reply.workload = wl;
  reply.eta_sec = eta;
  reply.round = msg.round;
  r.messages.push_back(make(from, std::move(reply)));
  return r;
}

StepResult DlbMachine::handle_accept(double now, ProcessId from, const DlbMessage& msg, int wl,
                                     double eta) {
  StepResult r;
  if (phase_ == Phase::Searching && msg.round == round_) {
    --pending_replies_;
    begin_transaction(from, advertised_role_, /*initiated=*/true, round_);
    if (side_ == LoadClass::Busy) {
      start_export_step(r, now, msg.workload, msg.eta_sec);
    } else {
      mark_paired(r, now);
      // The confirmation refreshes this side's workload and ETA; the busy
      // partner sizes its export from these.
      DlbMessage confirm;
      confirm.kind = MsgKind::Confirm;
      confirm.workload = wl;
      confirm.eta_sec = eta;
      confirm.round = msg.round;
      r.messages.push_back(make(from, std::move(confirm)));
    }
    return r;
  }
  // Any other accept gets cancelled, echoing its round so only the matching
  // half-transaction unlocks at the sender: late accepts after the first one
  // won, zombie accepts of long-finished rounds, and crossed requests where
  // both sides locked onto each other as responders. First accept wins; a
  // dissolved crossing simply retries after its cooldown.
  DlbMessage cancel;
  cancel.kind = MsgKind::TransactionDone;
  cancel.cancelled = true;
  cancel.round = msg.round;
  r.messages.push_back(make(from, std::move(cancel)));
  return r;
}

StepResult DlbMachine::handle_confirm(double now, ProcessId from, const DlbMessage& msg) {
  StepResult r;
  if (phase_ == Phase::InTransaction && from == partner_ && msg.round == txn_round_ &&
      side_ == LoadClass::Busy && !shipped_) {
    start_export_step(r, now, msg.workload, msg.eta_sec);
  }
  return r;
}

StepResult DlbMachine::handle_decline(double now, const DlbMessage& msg) {
  StepResult r;
  if (phase_ == Phase::Searching && msg.round == round_) {
    if (--pending_replies_ <= 0) {
      phase_ = Phase::CoolingDown;
      cooldown_until_ = now + cfg_.delta_sec;
    }
  }
  return r;
}

StepResult DlbMachine::handle_task_export(double now, ProcessId from, const DlbMessage& msg) {
  StepResult r;
  r.import_arrived = true;  // tasks are never dropped, whatever the state
  DlbMessage ack;
  ack.kind = MsgKind::TransactionDone;
  ack.round = msg.round;
  r.messages.push_back(make(from, std::move(ack)));
  if (phase_ == Phase::InTransaction && from == partner_ && msg.round == txn_round_) {
    mark_paired(r, now);
    release(now);
    r.released = true;
  }
  return r;
}

StepResult DlbMachine::handle_done(double now, ProcessId from, const DlbMessage& msg) {
  StepResult r;
  if (phase_ == Phase::InTransaction && from == partner_ && msg.round == txn_round_) {
    if (!msg.cancelled) mark_paired(r, now);
    release(now);
    // A cancelled handshake is neither a failed round nor a completed
    // transaction; the loser may search again at its next tick.
    if (msg.cancelled) phase_ = Phase::Quiescent;
    r.released = true;
  }
  return r;
}

StepResult DlbMachine::ship(double now, std::vector<Task> tasks) {
  if (phase_ != Phase::InTransaction || side_ != LoadClass::Busy || shipped_) {
    throw std::logic_error("ship() outside an open busy-side transaction");
  }
  StepResult r;
  shipped_ = true;
  if (tasks.empty()) {
    DlbMessage done;
    done.kind = MsgKind::TransactionDone;
    done.round = txn_round_;
    r.messages.push_back(make(partner_, std::move(done)));
    release(now);
    r.released = true;
    return r;
  }
  DlbMessage exp;
  exp.kind = MsgKind::TaskExport;
  exp.round = txn_round_;
  exp.tasks = std::move(tasks);
  r.messages.push_back(make(partner_, std::move(exp)));
  return r;  // stays locked until the importer's ack
}

void DlbMachine::begin_transaction(ProcessId partner, LoadClass side, bool initiated,
                                   std::uint64_t txn_round) {
  phase_ = Phase::InTransaction;
  partner_ = partner;
  side_ = side;
  txn_round_ = txn_round;
  initiated_by_me_ = initiated;
  shipped_ = false;
  pairing_counted_ = false;
}

void DlbMachine::start_export_step(StepResult& r, double now, int partner_wl, double partner_eta) {
  mark_paired(r, now);
  r.start_export = true;
  r.export_to = partner_;
  r.partner_workload = partner_wl;
  r.partner_eta = partner_eta;
}

void DlbMachine::mark_paired(StepResult& r, double now) {
  if (pairing_counted_) return;
  pairing_counted_ = true;
  r.pairing_formed = true;
  r.pairing_partner = partner_;
  r.pairing_time = in_episode_ ? now - episode_start_ : 0.0;
  r.pairing_rounds = in_episode_ ? episode_rounds_ : 0;
  in_episode_ = false;
  episode_rounds_ = 0;
}

void DlbMachine::release(double now) {
  phase_ = Phase::CoolingDown;
  cooldown_until_ = now + cfg_.delta_sec;
  partner_ = -1;
  side_ = LoadClass::Neutral;
  initiated_by_me_ = false;
  shipped_ = false;
}

int choose_export_basic(int busy_workload, const DlbConfig& cfg) {
  const int excess = busy_workload - cfg.thresholds.busy_above();
  return excess > 0 ? excess : 0;
}

int choose_export_equalizing(int busy_workload, int idle_workload) {
  if (busy_workload <= idle_workload) return 0;
  return (busy_workload - idle_workload) / 2;
}

std::vector<TaskId> choose_export_smart(const std::vector<const Task*>& queue_head_to_tail,
                                        double local_base, double remote_eta,
                                        const PerfRecorder& recorder, const MachineModel& model,
                                        std::vector<SmartDecision>* decisions) {
  const std::size_t n = queue_head_to_tail.size();
  std::vector<double> exec(n);
  std::vector<double> ahead(n);  // local queue time in front of position i
  double acc = local_base;
  for (std::size_t i = 0; i < n; ++i) {
    exec[i] = recorder.execution_estimate(*queue_head_to_tail[i], model);
    ahead[i] = acc;
    acc += exec[i];
  }

  std::vector<TaskId> picked;
  double remote_ahead = remote_eta;
  for (std::size_t idx = n; idx-- > 0;) {
    const Task& task = *queue_head_to_tail[idx];
    const CompletionEstimate est =
        predict_completion(task, ahead[idx], remote_ahead, recorder, model);
    const bool take = est.remote < est.local;
    if (decisions) decisions->push_back({task.id, est.local, est.remote, take});
    if (take) {
      picked.push_back(task.id);
      remote_ahead += exec[idx] + export_comm_time(task.data_doubles, model);
    }
  }
  return picked;
}

}  // namespace dlbsim

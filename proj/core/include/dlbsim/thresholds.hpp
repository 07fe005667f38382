#pragma once

#include <cstdint>

namespace dlbsim {

enum class LoadClass : std::uint8_t { Busy, Idle, Neutral };

const char* load_class_name(LoadClass c);

// Busy/idle classification. With a single threshold W_T every workload is
// either busy (w > W_T) or idle (w <= W_T). With a gap enabled, workloads in
// (W_low, W_high] are Neutral and take no part in pairing.
class Thresholds {
 public:
  explicit Thresholds(int w_threshold);
  static Thresholds with_gap(int w_low, int w_high);  // throws if w_low > w_high

  LoadClass classify(int workload) const {
    if (workload > busy_above_) return LoadClass::Busy;
    if (workload <= idle_at_or_below_) return LoadClass::Idle;
    return LoadClass::Neutral;
  }

  bool has_gap() const { return idle_at_or_below_ != busy_above_; }
  int busy_above() const { return busy_above_; }
  int idle_at_or_below() const { return idle_at_or_below_; }

 private:
  Thresholds(int low, int high);
  int idle_at_or_below_;
  int busy_above_;
};

inline LoadClass classify(int workload, const Thresholds& thresholds) {
  return thresholds.classify(workload);
}

}  // namespace dlbsim

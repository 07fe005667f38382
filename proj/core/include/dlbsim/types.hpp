#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlbsim {

using ProcessId = std::int32_t;
using TaskId = std::int64_t;

enum class TaskKind : std::uint8_t { Potrf, Trsm, Syrk, Gemm, Custom };

inline constexpr std::size_t kTaskKindCount = 5;

const char* kind_name(TaskKind kind);
// Unknown names map to Custom; the name is kept as the task label.
TaskKind kind_from_name(std::string_view name);

// 1-based (row, col) coordinates of a block in a lower-triangular block matrix.
struct BlockCoord {
  int i = 0;
  int j = 0;
  friend bool operator==(const BlockCoord&, const BlockCoord&) = default;
};

// A unit of work. Tasks carry cost metadata only; no numeric payload is ever
// executed.
struct Task {
  TaskId id = -1;
  TaskKind kind = TaskKind::Custom;
  std::string label;         // names a custom kind; empty for the named kinds
  double flops = 0;          // F, floating point operations, > 0
  double data_doubles = 0;   // D, input+output payload in doubles, >= 0
  std::vector<TaskId> deps;  // tasks that must complete first
  ProcessId owner = 0;       // home process of the output data
  std::optional<BlockCoord> block;
};

struct WorkloadSample {
  double time = 0;
  ProcessId process = 0;
  int workload = 0;
};

}  // namespace dlbsim

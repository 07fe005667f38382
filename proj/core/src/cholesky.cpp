#include "dlbsim/cholesky.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dlbsim {

void CholeskySpec::validate() const {
  if (blocks < 1) throw std::invalid_argument("blocks must be >= 1");
  if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("grid dims must be >= 1");
}

std::pair<double, double> task_costs(TaskKind kind, int block_size) {
  if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
  const double m = block_size;
  double flops = 0;
  double doubles = 0;
  switch (kind) {
    case TaskKind::Gemm:
      flops = 2.0 * m * m * m;
      doubles = 3.0 * m * m;
      break;
    case TaskKind::Syrk:
    case TaskKind::Trsm:
      flops = m * m * m;
      doubles = 2.0 * m * m;
      break;
    case TaskKind::Potrf:
      flops = m * m * m / 3.0;
      doubles = m * m;
      break;
    case TaskKind::Custom:
      throw std::invalid_argument("custom tasks carry explicit costs");
  }
  flops = std::max(1.0, std::floor(flops));
  return {flops, doubles};
}

ProcessId block_cyclic_owner(int i, int j, int grid_rows, int grid_cols) {
  if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("grid dims must be >= 1");
  if (j < 1 || i < j) {
    throw std::invalid_argument("block (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is outside the lower triangle");
  }
  return static_cast<ProcessId>(((i - 1) % grid_rows) * grid_cols + (j - 1) % grid_cols);
}

TaskGraph generate_dag(const CholeskySpec& spec) {
  spec.validate();
  const int n = spec.blocks;
  TaskGraph graph;

  // Last task that wrote block (i, j); serializes commuting updates in
  // ascending column order.
  std::vector<std::vector<TaskId>> last_write(static_cast<std::size_t>(n) + 1,
                                              std::vector<TaskId>(static_cast<std::size_t>(n) + 1, -1));
  // Trsm output of the current column, indexed by row.
  std::vector<TaskId> column_trsm(static_cast<std::size_t>(n) + 1, -1);

  auto add = [&](TaskKind kind, int i, int j, std::vector<TaskId> deps) {
    auto [flops, doubles] = task_costs(kind, spec.block_size);
    Task t;
    t.kind = kind;
    t.flops = flops;
    t.data_doubles = doubles;
    t.deps = std::move(deps);
    t.owner = block_cyclic_owner(i, j, spec.grid_rows, spec.grid_cols);
    t.block = BlockCoord{i, j};
    TaskId id = graph.add_task(std::move(t));
    last_write[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = id;
    return id;
  };
  auto prior_write = [&](int i, int j) {
    return last_write[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  };

  for (int k = 1; k <= n; ++k) {
    std::vector<TaskId> deps;
    if (TaskId w = prior_write(k, k); w >= 0) deps.push_back(w);
    TaskId potrf = add(TaskKind::Potrf, k, k, std::move(deps));

    for (int i = k + 1; i <= n; ++i) {
      deps = {potrf};
      if (TaskId w = prior_write(i, k); w >= 0) deps.push_back(w);
      column_trsm[static_cast<std::size_t>(i)] = add(TaskKind::Trsm, i, k, std::move(deps));
    }

    for (int j = k + 1; j <= n; ++j) {
      deps = {column_trsm[static_cast<std::size_t>(j)]};
      if (TaskId w = prior_write(j, j); w >= 0) deps.push_back(w);
      add(TaskKind::Syrk, j, j, std::move(deps));
      for (int i = j + 1; i <= n; ++i) {
        deps = {column_trsm[static_cast<std::size_t>(i)], column_trsm[static_cast<std::size_t>(j)]};
        if (TaskId w = prior_write(i, j); w >= 0) deps.push_back(w);
        add(TaskKind::Gemm, i, j, std::move(deps));
      }
    }
  }
  return graph;
}

}  // namespace dlbsim

#pragma once

#include <utility>

#include "dlbsim/task_graph.hpp"
#include "dlbsim/types.hpp"

namespace dlbsim {

// Right-looking block Cholesky benchmark: N x N blocks of m x m doubles,
// lower triangle stored, blocks distributed block-cyclically over a p x q
// process grid (row-major process numbering).
struct CholeskySpec {
  int blocks = 12;      // N
  int block_size = 80;  // m, doubles per block dimension
  int grid_rows = 2;    // p
  int grid_cols = 5;    // q

  int process_count() const { return grid_rows * grid_cols; }
  void validate() const;
};

// Leading-order dense-kernel costs for an m x m block:
//   Gemm (2m^3, 3m^2), Syrk (m^3, 2m^2), Trsm (m^3, 2m^2), Potrf (m^3/3, m^2).
// Flops are floored with a minimum of 1.
std::pair<double, double> task_costs(TaskKind kind, int block_size);

// Owner of block (i, j), 1-based, lower triangle only (j <= i):
//   ((i-1) mod p) * q + ((j-1) mod q).
ProcessId block_cyclic_owner(int i, int j, int grid_rows, int grid_cols);

// Task DAG of the factorization. Per column k: Potrf(k,k), then Trsm(i,k) for
// i > k, then the trailing updates Syrk(j,j) / Gemm(i,j) for k < j <= i <= N.
// Updates that commute onto the same block are serialized in ascending column
// order through a dependency chain. Owners follow the block-cyclic map of the
// task's output block.
TaskGraph generate_dag(const CholeskySpec& spec);

}  // namespace dlbsim

#include <doctest.h>

#include <array>
#include <algorithm>
#include <stdexcept>
#include <map>
#include <set>

#include "dlbsim/cholesky.hpp"
#include "dlbsim/cost_model.hpp"

using namespace dlbsim;

namespace {

// Independent loop-nest counter for the right-looking factorization.
struct KindCounts {
  long long potrf = 0, trsm = 0, syrk = 0, gemm = 0;
};

KindCounts count_by_loop_nest(int n) {
  KindCounts c;
  for (int k = 1; k <= n; ++k) {
    ++c.potrf;
    for (int i = k + 1; i <= n; ++i) ++c.trsm;
    for (int j = k + 1; j <= n; ++j) {
      ++c.syrk;
      for (int i = j + 1; i <= n; ++i) ++c.gemm;
    }
  }
  return c;
}

KindCounts count_graph(const TaskGraph& g) {
  KindCounts c;
  for (const Task& t : g.tasks()) {
    switch (t.kind) {
      case TaskKind::Potrf: ++c.potrf; break;
      case TaskKind::Trsm: ++c.trsm; break;
      case TaskKind::Syrk: ++c.syrk; break;
      case TaskKind::Gemm: ++c.gemm; break;
      default: break;
    }
  }
  return c;
}

CholeskySpec spec(int n, int m = 100, int p = 2, int q = 5) {
  CholeskySpec s;
  s.blocks = n;
  s.block_size = m;
  s.grid_rows = p;
  s.grid_cols = q;
  return s;
}

const Task* find_task(const TaskGraph& g, TaskKind kind, int i, int j) {
  for (const Task& t : g.tasks()) {
    if (t.kind == kind && t.block && t.block->i == i && t.block->j == j) return &t;
  }
  return nullptr;
}

bool depends_transitively(const TaskGraph& g, TaskId from, TaskId on) {
  std::set<TaskId> seen;
  std::vector<TaskId> stack{from};
  while (!stack.empty()) {
    const TaskId id = stack.back();
    stack.pop_back();
    if (id == on) return true;
    if (!seen.insert(id).second) continue;
    for (TaskId d : g.task(id).deps) stack.push_back(d);
  }
  return false;
}

}  // namespace

TEST_CASE("task counts match the closed forms for N up to 20") {
  for (int n = 1; n <= 20; ++n) {
    const TaskGraph g = generate_dag(spec(n));
    const KindCounts got = count_graph(g);
    const KindCounts want = count_by_loop_nest(n);
    CHECK(got.potrf == want.potrf);
    CHECK(got.trsm == want.trsm);
    CHECK(got.syrk == want.syrk);
    CHECK(got.gemm == want.gemm);
    // closed forms
    const long long N = n;
    CHECK(got.potrf == N);
    CHECK(got.trsm == N * (N - 1) / 2);
    CHECK(got.syrk == N * (N - 1) / 2);
    CHECK(got.gemm == N * (N - 1) * (N - 2) / 6);
  }
}

TEST_CASE("N=1 generates a single factorization task") {
  const TaskGraph g = generate_dag(spec(1));
  REQUIRE(g.size() == 1);
  CHECK(g.task(0).kind == TaskKind::Potrf);
  CHECK(g.task(0).deps.empty());
}

TEST_CASE("N=4 graph has 20 tasks and 364 at N=12") {
  CHECK(generate_dag(spec(4)).size() == 20);
  CHECK(generate_dag(spec(12)).size() == 364);
}

TEST_CASE("N=4 dependencies follow the right-looking algorithm") {
  const TaskGraph g = generate_dag(spec(4));
  g.validate(10);

  const Task* potrf1 = find_task(g, TaskKind::Potrf, 1, 1);
  const Task* potrf2 = find_task(g, TaskKind::Potrf, 2, 2);
  REQUIRE(potrf1 != nullptr);
  REQUIRE(potrf2 != nullptr);
  CHECK(depends_transitively(g, potrf2->id, potrf1->id));

  // Every trailing update Gemm(i,j) of column k depends directly on both
  // Trsm(i,k) and Trsm(j,k).
  std::map<std::pair<int, int>, std::vector<const Task*>> gemms;
  for (const Task& t : g.tasks()) {
    if (t.kind == TaskKind::Gemm) gemms[{t.block->i, t.block->j}].push_back(&t);
  }
  CHECK(gemms.size() == 3);  // (3,2), (4,2), (4,3)
  int checked = 0;
  for (const auto& [block, updates] : gemms) {
    const auto [i, j] = block;
    REQUIRE(static_cast<int>(updates.size()) == j - 1);  // one update per column k < j
    for (int k = 1; k < j; ++k) {
      const Task* gemm = updates[static_cast<std::size_t>(k - 1)];
      const Task* trsm_i = find_task(g, TaskKind::Trsm, i, k);
      const Task* trsm_j = find_task(g, TaskKind::Trsm, j, k);
      REQUIRE(trsm_i != nullptr);
      REQUIRE(trsm_j != nullptr);
      const auto& deps = gemm->deps;
      CHECK(std::count(deps.begin(), deps.end(), trsm_i->id) == 1);
      CHECK(std::count(deps.begin(), deps.end(), trsm_j->id) == 1);
      ++checked;
    }
  }
  CHECK(checked == 4);  // (3,2)@1, (4,2)@1, (4,3)@1, (4,3)@2
}

TEST_CASE("commuting updates of one block are serialized in column order") {
  const TaskGraph g = generate_dag(spec(5));
  // Block (5,4) receives gemm updates from columns 1..3; each depends on the
  // previous one in its dep list, and Trsm(5,4) depends on the last.
  std::vector<const Task*> updates;
  for (const Task& t : g.tasks()) {
    if (t.kind == TaskKind::Gemm && t.block->i == 5 && t.block->j == 4) updates.push_back(&t);
  }
  REQUIRE(updates.size() == 3);
  for (std::size_t u = 1; u < updates.size(); ++u) {
    const auto& deps = updates[u]->deps;
    CHECK(std::count(deps.begin(), deps.end(), updates[u - 1]->id) == 1);
  }
  const Task* trsm54 = find_task(g, TaskKind::Trsm, 5, 4);
  REQUIRE(trsm54 != nullptr);
  CHECK(std::count(trsm54->deps.begin(), trsm54->deps.end(), updates.back()->id) == 1);
}

TEST_CASE("kernel costs use leading-order flop and data counts") {
  SUBCASE("gemm at m=120 reproduces the worked block numbers") {
    const auto [flops, doubles] = task_costs(TaskKind::Gemm, 120);
    CHECK(flops == 3456000.0);
    CHECK(doubles == 43200.0);
    MachineModel model;  // S/R = 40
    CHECK(overhead_ratio(flops, doubles, model) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("degenerate 1x1 block floors the factorization cost to one flop") {
    const auto [flops, doubles] = task_costs(TaskKind::Potrf, 1);
    CHECK(flops == 1.0);
    CHECK(doubles == 1.0);
  }
  SUBCASE("syrk at m=100") {
    const auto [flops, doubles] = task_costs(TaskKind::Syrk, 100);
    CHECK(flops == 1e6);
    CHECK(doubles == 2e4);
  }
  CHECK_THROWS_AS(task_costs(TaskKind::Custom, 10), std::invalid_argument);
}

TEST_CASE("block-cyclic ownership") {
  CHECK(block_cyclic_owner(1, 1, 2, 5) == 0);
  CHECK(block_cyclic_owner(1, 1, 7, 3) == 0);
  CHECK(block_cyclic_owner(3, 1, 2, 5) == 0);  // ((3-1) mod 2)*5 + 0
  CHECK(block_cyclic_owner(2, 2, 2, 5) == 6);
  CHECK_THROWS_AS(block_cyclic_owner(1, 2, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(block_cyclic_owner(0, 0, 2, 5), std::invalid_argument);

  SUBCASE("12x12 lower triangle on a (2,5) grid is imbalanced") {
    std::map<ProcessId, int> counts;
    int blocks = 0;
    for (int i = 1; i <= 12; ++i) {
      for (int j = 1; j <= i; ++j) {
        ++counts[block_cyclic_owner(i, j, 2, 5)];
        ++blocks;
      }
    }
    CHECK(blocks == 78);
    CHECK(counts.size() == 10);
    int lo = blocks, hi = 0;
    for (const auto& [p, c] : counts) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(lo < hi);  // the imbalance the experiments are built on
  }
}

TEST_CASE("every task is owned by the owner of its output block") {
  const TaskGraph g = generate_dag(spec(6, 100, 2, 3));
  for (const Task& t : g.tasks()) {
    REQUIRE(t.block.has_value());
    CHECK(t.owner == block_cyclic_owner(t.block->i, t.block->j, 2, 3));
  }
}

TEST_CASE("generated graphs are valid schedulable DAGs") {
  for (int n : {1, 2, 5, 9}) {
    const TaskGraph g = generate_dag(spec(n, 50, 3, 2));
    CHECK_NOTHROW(g.validate(6));
    CHECK(g.topological_order().size() == g.size());
  }
}

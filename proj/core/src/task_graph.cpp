#include "dlbsim/task_graph.hpp"

#include <deque>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dlbsim {

using nlohmann::json;

TaskId TaskGraph::add_task(Task task) {
  task.id = static_cast<TaskId>(tasks_.size());
  tasks_.push_back(std::move(task));
  return tasks_.back().id;
}

void TaskGraph::validate(int process_count) const {
  const auto n = static_cast<TaskId>(tasks_.size());
  for (const Task& t : tasks_) {
    if (!(t.flops > 0)) {
      throw std::invalid_argument("task " + std::to_string(t.id) + ": flops must be > 0");
    }
    if (t.data_doubles < 0) {
      throw std::invalid_argument("task " + std::to_string(t.id) + ": doubles must be >= 0");
    }
    if (process_count > 0 && (t.owner < 0 || t.owner >= process_count)) {
      throw std::invalid_argument("task " + std::to_string(t.id) + ": owner out of range");
    }
    for (TaskId d : t.deps) {
      if (d < 0 || d >= n) {
        throw std::invalid_argument("task " + std::to_string(t.id) + ": unresolved dep " +
                                    std::to_string(d));
      }
      if (d == t.id) {
        throw std::invalid_argument("task " + std::to_string(t.id) + ": depends on itself");
      }
    }
  }
  topological_order();  // throws on cycles
}

std::vector<TaskId> TaskGraph::topological_order() const {
  const auto n = tasks_.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<TaskId>> successors(n);
  for (const Task& t : tasks_) {
    for (TaskId d : t.deps) {
      indegree[static_cast<std::size_t>(t.id)]++;
      successors[static_cast<std::size_t>(d)].push_back(t.id);
    }
  }
  std::deque<TaskId> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) frontier.push_back(static_cast<TaskId>(i));
  }
  std::vector<TaskId> order;
  order.reserve(n);
  while (!frontier.empty()) {
    TaskId id = frontier.front();
    frontier.pop_front();
    order.push_back(id);
    for (TaskId s : successors[static_cast<std::size_t>(id)]) {
      if (--indegree[static_cast<std::size_t>(s)] == 0) frontier.push_back(s);
    }
  }
  if (order.size() != n) {
    std::string stuck;
    for (std::size_t i = 0; i < n && stuck.size() < 200; ++i) {
      if (indegree[i] > 0) {
        if (!stuck.empty()) stuck += ", ";
        stuck += std::to_string(i);
      }
    }
    throw std::invalid_argument("task graph has a cycle through tasks: " + stuck);
  }
  return order;
}

namespace {

json task_to_json(const Task& t) {
  json j;
  j["id"] = t.id;
  j["kind"] = (t.kind == TaskKind::Custom && !t.label.empty()) ? t.label : kind_name(t.kind);
  j["flops"] = t.flops;
  j["doubles"] = t.data_doubles;
  j["deps"] = t.deps;
  j["owner"] = t.owner;
  if (t.block) j["block"] = {t.block->i, t.block->j};
  return j;
}

Task task_from_json(const json& j) {
  Task t;
  t.id = j.at("id").get<TaskId>();
  const auto kind = j.at("kind").get<std::string>();
  t.kind = kind_from_name(kind);
  if (t.kind == TaskKind::Custom && kind != "custom") t.label = kind;
  t.flops = j.at("flops").get<double>();
  t.data_doubles = j.at("doubles").get<double>();
  t.deps = j.at("deps").get<std::vector<TaskId>>();
  t.owner = j.at("owner").get<ProcessId>();
  if (j.contains("block")) {
    const auto& b = j.at("block");
    t.block = BlockCoord{b.at(0).get<int>(), b.at(1).get<int>()};
  }
  return t;
}

}  // namespace

void TaskGraph::write_jsonl(std::ostream& out) const {
  for (const Task& t : tasks_) out << task_to_json(t).dump() << '\n';
}

std::string TaskGraph::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

TaskGraph TaskGraph::from_jsonl(const std::string& text) {
  TaskGraph graph;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Task t;
    try {
      t = task_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw std::invalid_argument("task graph line " + std::to_string(lineno) + ": " + e.what());
    }
    if (t.id != static_cast<TaskId>(graph.tasks_.size())) {
      throw std::invalid_argument("task graph line " + std::to_string(lineno) +
                                  ": ids must be dense and in order");
    }
    graph.tasks_.push_back(std::move(t));
  }
  return graph;
}

}  // namespace dlbsim

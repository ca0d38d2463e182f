#include "codisc/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "codisc/errors.hpp"

namespace codisc {

MaxFlowGraph::MaxFlowGraph(int num_nodes)
    : head_(num_nodes, -1), level_(num_nodes), iter_(num_nodes) {}

int MaxFlowGraph::add_edge(int from, int to, std::int64_t capacity) {
  const int id = static_cast<int>(to_.size());
  to_.push_back(to);
  cap_.push_back(capacity);
  base_cap_.push_back(capacity);
  next_.push_back(head_[from]);
  head_[from] = id;

  to_.push_back(from);
  cap_.push_back(0);
  base_cap_.push_back(0);
  next_.push_back(head_[to]);
  head_[to] = id + 1;
  return id;
}

void MaxFlowGraph::set_capacity(int edge_id, std::int64_t capacity) {
  base_cap_[edge_id] = capacity;
}

bool MaxFlowGraph::bfs(int source, int sink) {
  std::fill(level_.begin(), level_.end(), -1);
  // level_ doubles as the BFS queue marker; reuse iter_ as the queue storage.
  std::vector<int>& queue = iter_;
  int qh = 0, qt = 0;
  level_[source] = 0;
  queue[qt++] = source;
  while (qh < qt) {
    const int u = queue[qh++];
    for (int e = head_[u]; e != -1; e = next_[e]) {
      if (cap_[e] > 0 && level_[to_[e]] < 0) {
        level_[to_[e]] = level_[u] + 1;
        queue[qt++] = to_[e];
      }
    }
  }
  return level_[sink] >= 0;
}

std::int64_t MaxFlowGraph::dfs(int node, int sink, std::int64_t limit) {
  if (node == sink) return limit;
  for (int& e = iter_[node]; e != -1; e = next_[e]) {
    const int v = to_[e];
    if (cap_[e] > 0 && level_[v] == level_[node] + 1) {
      const std::int64_t pushed = dfs(v, sink, std::min(limit, cap_[e]));
      if (pushed > 0) {
        cap_[e] -= pushed;
        cap_[e ^ 1] += pushed;
        return pushed;
      }
    }
  }
  level_[node] = -1;
  return 0;
}

std::int64_t MaxFlowGraph::max_flow(int source, int sink) {
  if (source == sink) throw InternalError("max_flow: source equals sink");
  cap_ = base_cap_;
  std::int64_t flow = 0;
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  while (bfs(source, sink)) {
    iter_ = head_;
    while (std::int64_t pushed = dfs(source, sink, inf)) flow += pushed;
  }
  return flow;
}

std::vector<bool> MaxFlowGraph::min_cut_source_side(int source) const {
  std::vector<bool> reachable(num_nodes(), false);
  std::vector<int> stack{source};
  reachable[source] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int e = head_[u]; e != -1; e = next_[e]) {
      if (cap_[e] > 0 && !reachable[to_[e]]) {
        reachable[to_[e]] = true;
        stack.push_back(to_[e]);
      }
    }
  }
  return reachable;
}

}  // namespace codisc

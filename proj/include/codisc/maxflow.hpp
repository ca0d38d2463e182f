#pragma once

#include <cstdint>
#include <vector>

namespace codisc {

// Dinic's max-flow on 64-bit integer capacities. Capacities are exact
// integers so the min cut is exact; callers do their own scaling.
// The graph structure is fixed after the edges are added, but capacities can
// be rewritten and the flow re-run (the dual loop re-solves the same graph
// with fresh source capacities every iteration).
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int num_nodes);

  // Adds the arc and its zero-capacity reverse; returns the arc id for
  // later set_capacity calls.
  int add_edge(int from, int to, std::int64_t capacity);

  void set_capacity(int edge_id, std::int64_t capacity);

  std::int64_t max_flow(int source, int sink);

  // Source side of the min cut (residual reachability); call after max_flow.
  std::vector<bool> min_cut_source_side(int source) const;

  int num_nodes() const { return static_cast<int>(head_.size()); }

 private:
  bool bfs(int source, int sink);
  std::int64_t dfs(int node, int sink, std::int64_t limit);

  std::vector<int> head_;       // first edge per node, -1 when none
  std::vector<int> next_;       // next edge in the node's list
  std::vector<int> to_;
  std::vector<std::int64_t> cap_;       // working capacities (mutated by flow)
  std::vector<std::int64_t> base_cap_;  // capacities as set by the caller
  std::vector<int> level_;
  std::vector<int> iter_;
};

}  // namespace codisc

#pragma once

// Dinic max-flow on real capacities. Used to certify stochastic domination.

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace atrc {

class MaxFlow {
 public:
  static constexpr double inf = std::numeric_limits<double>::infinity();

  explicit MaxFlow(int n) : adj_(static_cast<std::size_t>(n)), level_(n), it_(n) {}

  int add_edge(int from, int to, double cap) {
    adj_[from].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({to, cap});
    adj_[to].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, 0.0});
    return static_cast<int>(arcs_.size()) - 2;
  }

  double run(int s, int t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      for (double f; (f = dfs(s, t, inf)) > eps_;) total += f;
    }
    return total;
  }

  // Nodes reachable from s in the residual graph (after run).
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int a : adj_[v]) {
        const auto& arc = arcs_[a];
        if (arc.cap > eps_ && !seen[arc.to]) {
          seen[arc.to] = 1;
          stack.push_back(arc.to);
        }
      }
    }
    return seen;
  }

  double flow_on(int arc) const { return arcs_[arc ^ 1].cap; }

 private:
  struct Arc {
    int to;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a : adj_[v]) {
        if (arcs_[a].cap > eps_ && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[v] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double pushed) {
    if (v == t) return pushed;
    for (int& i = it_[v]; i < static_cast<int>(adj_[v].size()); ++i) {
      const int a = adj_[v][i];
      Arc& arc = arcs_[a];
      if (arc.cap <= eps_ || level_[arc.to] != level_[v] + 1) continue;
      const double d = dfs(arc.to, t, std::min(pushed, arc.cap));
      if (d > eps_) {
        arc.cap -= d;
        arcs_[a ^ 1].cap += d;
        return d;
      }
    }
    return 0.0;
  }

  static constexpr double eps_ = 1e-15;
  std::vector<std::vector<int>> adj_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace atrc
